#include "rmtlab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace rmtlab {

int default_workers() {
  if (const char* env = std::getenv("RMTLAB_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace rmtlab
