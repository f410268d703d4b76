#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rmtlab/serialization.hpp"
#include "rmtlab/statistics.hpp"

namespace rmtlab {

inline constexpr const char* kToolVersion = "1.0.0";

/// Experiment kinds accepted by run_experiment.
const std::vector<std::string>& experiment_kinds();

struct ExperimentManifest {
  std::string kind;
  Json spec = Json::object();  // kind-specific payload; missing keys take defaults
  std::uint64_t seed = 0;
  std::uint64_t samples = 1;
  std::filesystem::path out_dir = ".";
  std::string version = kToolVersion;
  double threshold = -1.0;  // < 0 selects the kind's default

  Json to_json() const;
  /// Throws ConfigError naming the offending field.
  static ExperimentManifest from_json(const Json& j);
};

struct ExperimentOutcome {
  int exit_code = 0;  // 0 pass, 1 statistical failure, 2 configuration error
  bool passes = false;
  std::string verdict;  // structured text block
  std::string error;    // diagnostic for exit code 2
};

/// Runs the experiment and writes into out_dir:
///   manifest.json    the manifest as run (replayable),
///   samples.jsonl    one JSON object per sample with its scalars,
///   observable.csv   the pooled observable (when the kind has one),
///   verdict.txt      key = value verdict block.
/// Configuration errors (including unwritable directories) give exit code 2;
/// other module errors are reported with context and also give exit code 2.
/// Outputs depend only on the manifest, never on the worker count.
ExperimentOutcome run_experiment(const ExperimentManifest& manifest, int workers = 1);

/// Compares the observable.csv files of two experiment output directories.
/// Throws ConfigError when the observable kinds differ.
ComparisonReport compare_experiments(const std::filesystem::path& report_a, const std::filesystem::path& report_b,
                                     double threshold);

/// Reads the observable column of an output directory (or CSV file) together
/// with its kind tag.
std::vector<double> read_observable(const std::filesystem::path& report, std::string* kind = nullptr);

}  // namespace rmtlab
