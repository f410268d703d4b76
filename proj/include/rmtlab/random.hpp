#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/uniform_01.hpp>

// Counter-based randomness. Every random quantity in the library is addressed
// by (key, stream id, position), so draws do not depend on evaluation order
// and samples can be generated concurrently without coordination.

namespace rmtlab {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Maps a 128-bit counter and 64-bit key to 128 bits.
using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxBlock philox4x32(PhiloxBlock counter, PhiloxKey key);

/// SplitMix64 finalizer; used for seed derivation only.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Per-sample seed: seed_i = splitmix64(master ^ splitmix64(i)).
/// Fixed forever; experiment outputs depend on it.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index));
}

/// Domain tags keep streams used for different purposes disjoint even when
/// they share a master seed.
enum class Domain : std::uint32_t {
  MatrixEntries = 1,
  Tridiagonal = 2,
  DbmNoise = 3,
  DbmBridge = 4,
  OuNoise = 5,
  LogGasChain = 6,
  TwoByTwo = 7,
  Generic = 8,
};

/// Uniform random bit generator over one Philox stream. The stream is
/// identified by (key, domain, stream id); successive calls walk the
/// counter's low 64 bits.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  CounterStream(std::uint64_t seed, Domain domain, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double normal() { return normal_(*this); }

 private:
  void refill();

  PhiloxKey key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_ = 0;
  PhiloxBlock buffer_{};
  int used_ = 4;
  boost::random::normal_distribution<double> normal_;
};

/// Chi-distributed variate with `dof` degrees of freedom.
inline double chi(CounterStream& rng, double dof) {
  boost::random::gamma_distribution<double> gamma(0.5 * dof, 2.0);
  return std::sqrt(gamma(rng));
}

}  // namespace rmtlab
