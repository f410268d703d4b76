// rmtlab <kind> [--config FILE] [--seed U64] [--samples N] [--out DIR]
//               [--workers N] [--threshold F] [--set KEY=JSON ...]
// rmtlab compare DIR_A DIR_B [--threshold F]
//
// Exit codes: 0 all thresholds pass, 1 statistical failure, 2 usage or
// configuration error.

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "rmtlab/cli.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/parallel.hpp"

namespace {

int compare_main(const std::string& a, const std::string& b, double threshold) {
  try {
    const auto report = rmtlab::compare_experiments(a, b, threshold);
    std::cout << rmtlab::to_record(report);
    return report.passes ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "rmtlab: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random matrix statistics experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rmtlab::kToolVersion);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed, samples;
  std::optional<double> threshold;
  std::optional<int> workers;
  std::vector<std::string> overrides;

  for (const auto& kind : rmtlab::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run the '" + kind + "' experiment");
    sub->add_option("--config", config_path, "JSON manifest; flags override its fields");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--samples", samples, "sample count");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker threads (default $RMTLAB_WORKERS or 1)");
    sub->add_option("--threshold", threshold, "acceptance threshold override");
    sub->add_option("--set", overrides, "spec override KEY=JSON, repeatable");
  }
  std::string cmp_a, cmp_b;
  double cmp_threshold = 0.05;
  auto* compare = app.add_subcommand("compare", "compare the observables of two experiment outputs");
  compare->add_option("report_a", cmp_a)->required();
  compare->add_option("report_b", cmp_b)->required();
  compare->add_option("--threshold", cmp_threshold, "KS threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (compare->parsed()) return compare_main(cmp_a, cmp_b, cmp_threshold);

  const std::string kind = app.get_subcommands().front()->get_name();
  rmtlab::ExperimentManifest manifest;
  try {
    rmtlab::Json j = rmtlab::Json::object();
    if (!config_path.empty()) {
      try {
        j = rmtlab::Json::parse(rmtlab::read_text(config_path));
      } catch (const rmtlab::Json::parse_error& e) {
        throw rmtlab::ConfigError("config '" + config_path + "' is not valid JSON: " + e.what());
      }
      if (j.contains("kind") && j["kind"] != kind)
        throw rmtlab::ConfigError("config kind '" + j["kind"].get<std::string>() + "' does not match '" + kind + "'");
    }
    j["kind"] = kind;
    if (seed) j["seed"] = *seed;
    if (samples) j["samples"] = *samples;
    if (!out_dir.empty()) j["out_dir"] = out_dir;
    if (threshold) j["threshold"] = *threshold;
    if (!j.contains("spec")) j["spec"] = rmtlab::Json::object();
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw rmtlab::ConfigError("--set expects KEY=JSON, got '" + o + "'");
      try {
        j["spec"][o.substr(0, eq)] = rmtlab::Json::parse(o.substr(eq + 1));
      } catch (const rmtlab::Json::parse_error&) {
        throw rmtlab::ConfigError("--set " + o.substr(0, eq) + ": value is not valid JSON");
      }
    }
    manifest = rmtlab::ExperimentManifest::from_json(j);
  } catch (const std::exception& e) {
    std::cerr << "rmtlab: " << e.what() << "\n";
    return 2;
  }

  const auto outcome = rmtlab::run_experiment(manifest, workers.value_or(rmtlab::default_workers()));
  if (outcome.exit_code == 2) {
    std::cerr << "rmtlab: " << outcome.error << "\n";
    return 2;
  }
  std::cout << outcome.verdict;
  return outcome.exit_code;
}
