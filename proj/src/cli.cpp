#include "rmtlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "rmtlab/dynamics.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/homogenization.hpp"
#include "rmtlab/loggas.hpp"
#include "rmtlab/parallel.hpp"

namespace rmtlab {

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"density", "local-law", "rigidity",          "gaps",
                                              "correlation", "mesoscopic", "edge",     "small-gap-exponent",
                                              "loggas",  "dbm-relax", "coupled-dbm",       "homog"};
  return kinds;
}

// ---------------------------------------------------------------------------
// Manifest

Json ExperimentManifest::to_json() const {
  return Json{{"kind", kind},       {"spec", spec},
              {"seed", seed},       {"samples", samples},
              {"out_dir", out_dir.string()}, {"version", version},
              {"threshold", threshold}};
}

ExperimentManifest ExperimentManifest::from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("manifest must be a JSON object");
  ExperimentManifest m;
  try {
    m.kind = j.at("kind").get<std::string>();
  } catch (const Json::exception&) {
    throw ConfigError("manifest.kind: missing or not a string");
  }
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), m.kind) == kinds.end())
    throw ConfigError("manifest.kind: unknown experiment kind '" + m.kind + "'");
  if (j.contains("spec")) {
    if (!j.at("spec").is_object()) throw ConfigError("manifest.spec: must be an object");
    m.spec = j.at("spec");
  }
  auto unsigned_field = [&](const char* name, std::uint64_t fallback) {
    if (!j.contains(name)) return fallback;
    const auto& v = j.at(name);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(std::string("manifest.") + name + ": must be a nonnegative integer");
    return v.get<std::uint64_t>();
  };
  // A run is only reproducible from its manifest if the seed is recorded.
  if (!j.contains("seed")) throw ConfigError("manifest.seed: missing");
  m.seed = unsigned_field("seed", 0);
  m.samples = unsigned_field("samples", 1);
  if (m.samples == 0) throw ConfigError("manifest.samples: must be positive");
  if (j.contains("out_dir")) m.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("version")) m.version = j.at("version").get<std::string>();
  if (j.contains("threshold")) {
    if (!j.at("threshold").is_number()) throw ConfigError("manifest.threshold: must be a number");
    m.threshold = j.at("threshold").get<double>();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Experiment plumbing

namespace {

template <typename T>
T param(const Json& spec, const char* name, T fallback) {
  if (!spec.contains(name)) return fallback;
  try {
    return spec.at(name).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("spec.") + name + ": wrong type");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

class Context {
 public:
  Context(const ExperimentManifest& m, int workers) : manifest(m), workers(std::max(1, workers)) {}

  const ExperimentManifest& manifest;
  int workers;

  double threshold(double fallback) const { return manifest.threshold >= 0.0 ? manifest.threshold : fallback; }
  std::uint64_t seed(std::uint64_t i) const { return derive_seed(manifest.seed, i); }
  // Independent seed family for reference ensembles.
  std::uint64_t reference_seed(std::uint64_t i) const {
    return derive_seed(splitmix64(manifest.seed ^ 0x7265666572656e63ULL), i);
  }

  void metric(const std::string& key, double v) { metrics.emplace_back(key, fmt(v)); }
  void metric(const std::string& key, const std::string& v) { metrics.emplace_back(key, v); }
  void sample_record(Json j) { records.push_back(std::move(j)); }
  void observable(std::string kind, std::vector<double> values) {
    observable_kind = std::move(kind);
    observable_values = std::move(values);
  }

  std::vector<std::pair<std::string, std::string>> metrics;
  std::vector<Json> records;
  std::string observable_kind;
  std::vector<double> observable_values;
  bool passes = false;
};

EnsembleSpec ensemble_param(const Json& spec, const char* key, const EnsembleSpec& fallback) {
  if (!spec.contains(key)) return fallback;
  return ensemble_from_json(spec.at(key));
}

bool gaussian_invariant(const EnsembleSpec& e) {
  return e.entry_law.kind() == EntryLaw::Kind::Gaussian && e.profile.kind() == VarianceProfile::Kind::Constant;
}

// Gaussian invariant ensembles go through the tridiagonal model unless the
// payload asks for dense sampling.
SpectrumSample spectrum_of(const EnsembleSpec& e, std::uint64_t seed, bool dense) {
  if (!dense && gaussian_invariant(e)) {
    auto s = gaussian_spectrum(e.symmetry, e.n(), seed);
    s.spec_digest = digest(e);
    return s;
  }
  return eigenvalues(sample_matrix(e, seed), digest(e), seed);
}

std::vector<SpectrumSample> spectra(Context& ctx, const EnsembleSpec& e, std::uint64_t count, bool dense,
                                    bool reference = false) {
  return parallel_map(count, ctx.workers, [&](std::size_t i) {
    return spectrum_of(e, reference ? ctx.reference_seed(i) : ctx.seed(i), dense);
  });
}

// ---------------------------------------------------------------------------
// Kinds

void run_density(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const auto e = ensemble_param(p, "ensemble", EnsembleSpec::goe(1000));
  const bool dense = param(p, "dense", false);
  const double thr = ctx.threshold(0.02);
  auto spectra = parallel_map(ctx.manifest.samples, ctx.workers,
                              [&](std::size_t i) { return spectrum_of(e, ctx.seed(i), dense).eigenvalues; });
  double worst = 0.0;
  std::vector<double> pooled;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const double ks = ks_one_sample(spectra[i], semicircle_cdf);
    ctx.sample_record({{"index", i}, {"seed", ctx.seed(i)}, {"ks", ks}});
    worst = std::max(worst, ks);
    pooled.insert(pooled.end(), spectra[i].begin(), spectra[i].end());
  }
  ctx.metric("n", e.n());
  ctx.metric("ks_max", worst);
  ctx.metric("threshold", thr);
  ctx.observable("spectrum", pooled);
  ctx.passes = worst <= thr;
}

void run_local_law(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const auto e = ensemble_param(p, "ensemble", EnsembleSpec::goe(2000));
  const double energy = param(p, "energy", 0.0);
  const double exponent = param(p, "eta_exponent", 0.9);
  const double required = param(p, "fraction", 0.95);
  const double bound = ctx.threshold(10.0);
  const double eta = std::pow(static_cast<double>(e.n()), -exponent);
  const auto model = semicircle_model();
  auto ratios = parallel_map(ctx.manifest.samples, ctx.workers, [&](std::size_t i) {
    return local_law_deviation(spectrum_of(e, ctx.seed(i), false), energy, eta, model).bound_ratio;
  });
  std::size_t within = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    ctx.sample_record({{"index", i}, {"seed", ctx.seed(i)}, {"bound_ratio", ratios[i]}});
    if (ratios[i] <= bound) ++within;
  }
  const double fraction = static_cast<double>(within) / static_cast<double>(ratios.size());
  ctx.metric("eta", eta);
  ctx.metric("bound", bound);
  ctx.metric("fraction_within", fraction);
  ctx.metric("required_fraction", required);
  ctx.observable("local-law-ratio", ratios);
  ctx.passes = fraction >= required;
}

void run_rigidity(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const auto e = ensemble_param(p, "ensemble", EnsembleSpec::goe(1000));
  const double alpha = param(p, "alpha", 0.1);
  const double bound = ctx.threshold(10.0 * std::log(static_cast<double>(e.n())));
  const auto gamma = classical_locations(semicircle_model(), e.n());
  auto maxima = parallel_map(ctx.manifest.samples, ctx.workers, [&](std::size_t i) {
    return bulk_max(rigidity_profile(spectrum_of(e, ctx.seed(i), false), gamma), alpha);
  });
  double worst = 0.0;
  for (std::size_t i = 0; i < maxima.size(); ++i) {
    ctx.sample_record({{"index", i}, {"seed", ctx.seed(i)}, {"bulk_max", maxima[i]}});
    worst = std::max(worst, maxima[i]);
  }
  ctx.metric("bulk_max", worst);
  ctx.metric("bound", bound);
  ctx.observable("rigidity-bulk-max", maxima);
  ctx.passes = worst <= bound;
}

std::vector<double> gaps_of(const SpectrumSample& s, const std::string& mode, int label, int half_width,
                            const std::vector<double>& gamma, const DensityModel& model) {
  if (mode == "bulk") return bulk_gaps(s, gamma, model);
  if (mode == "fixed") return rescale_bulk_gaps(s, model, label).gaps;
  if (mode == "averaged") return averaged_label_gaps(s, model, label, half_width).gaps;
  throw ConfigError("spec.mode: unknown gap mode '" + mode + "'");
}

std::vector<double> pooled_gaps(Context& ctx, const EnsembleSpec& e, const Json& p, bool reference) {
  const auto mode = param(p, "mode", std::string("bulk"));
  const int n = e.n();
  const int label = param(p, "label", n / 2);
  const int half_width = param(p, "half_width", static_cast<int>(std::floor(std::pow(n, 0.3))));
  const bool dense = param(p, "dense", false);
  const auto model = semicircle_model();
  const auto gamma = classical_locations(model, n);
  const auto count = reference ? param<std::uint64_t>(p, "reference_samples", ctx.manifest.samples)
                               : ctx.manifest.samples;
  auto per_sample = parallel_map(count, ctx.workers, [&](std::size_t i) {
    const auto s = spectrum_of(e, reference ? ctx.reference_seed(i) : ctx.seed(i), dense);
    return gaps_of(s, mode, label, half_width, gamma, model);
  });
  std::vector<double> all;
  for (std::size_t i = 0; i < per_sample.size(); ++i) {
    const auto& g = per_sample[i];
    if (!reference) {
      const double mean = g.empty() ? 0.0 : std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
      ctx.sample_record({{"index", i}, {"seed", ctx.seed(i)}, {"gaps", g.size()}, {"mean_gap", mean}});
    }
    all.insert(all.end(), g.begin(), g.end());
  }
  return all;
}

void run_gaps(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const auto e = ensemble_param(p, "ensemble", EnsembleSpec::goe(1000));
  auto gaps = pooled_gaps(ctx, e, p, false);
  const double l1 = histogram_l1_distance(gaps, wigner_surmise_pdf, 0.0, 4.0, 40);
  const double ks = ks_one_sample(gaps, wigner_surmise_cdf);
  ctx.metric("gap_count", static_cast<double>(gaps.size()));
  ctx.metric("l1_surmise", l1);
  ctx.metric("ks_surmise", ks);
  if (p.contains("reference")) {
    const auto ref = ensemble_from_json(p.at("reference"));
    const auto ref_gaps = pooled_gaps(ctx, ref, p, true);
    const auto report = compare_distributions(gaps, ref_gaps, ctx.threshold(0.02));
    ctx.metric("ks_reference", report.ks_distance);
    ctx.metric("l1_reference", report.l1_density_distance);
    ctx.metric("threshold", report.threshold);
    ctx.passes = report.passes;
  } else {
    const double thr = ctx.threshold(0.05);
    ctx.metric("threshold", thr);
    ctx.passes = l1 <= thr;
  }
  ctx.observable("gaps", std::move(gaps));
}

void run_correlation(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const auto sym = symmetry_from_string(param(p, "symmetry", std::string("complex-hermitian")));
  const int n = param(p, "n", 1000);
  if (n < 2) throw ConfigError("spec.n: must be at least 2");
  const int order = param(p, "order", 2);
  const double e0 = param(p, "energy", 0.0);
  const double b_exponent = param(p, "b_exponent", 0.9);
  const double b_n = b_exponent > 0.0 ? std::pow(static_cast<double>(n), -b_exponent) : 0.0;
  const double bandwidth = param(p, "bandwidth", 0.1);
  const double alpha_max = param(p, "alpha_max", 3.0);
  const int points = param(p, "grid_points", 61);
  if (order != 2) throw ConfigError("spec.order: the correlation experiment supports order 2");
  std::vector<std::vector<double>> grid;
  for (int k = 0; k < points; ++k) grid.push_back({0.0, alpha_max * k / (points - 1)});

  const auto model = semicircle_model();
  const double scale = n * model.pdf(e0);
  const double margin = (b_n * scale + alpha_max + 12.0 * bandwidth) / scale;
  auto samples = parallel_map(ctx.manifest.samples, ctx.workers, [&](std::size_t i) {
    const auto t = sample_hermite_tridiagonal(beta_of(sym), n, ctx.seed(i));
    auto values = tridiagonal_eigenvalues_in(t, e0 - margin, e0 + margin);
    return SpectrumSample{std::move(values), "", ctx.seed(i)};
  });
  const auto est = estimate_correlation(samples, model, 2, e0, b_n, grid, bandwidth, n);
  double l1 = 0.0;
  std::vector<double> errors;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double target = sine_kernel_correlation(grid[k]);
    errors.push_back(est.values[k] - target);
    l1 += std::abs(est.values[k] - target);
    ctx.sample_record({{"alpha", grid[k][1]}, {"estimate", est.values[k]}, {"sine_kernel", target}});
  }
  l1 /= static_cast<double>(grid.size());
  const double thr = ctx.threshold(0.1);
  ctx.metric("b_n", b_n);
  ctx.metric("expected_tuples_per_sample", est.expected_tuples_per_sample);
  ctx.metric("grid_l1_error", l1);
  ctx.metric("threshold", thr);
  for (const auto& w : est.warnings) ctx.metric("warning", w);
  ctx.observable("correlation-estimate", est.values);
  ctx.passes = l1 <= thr;
}

void run_mesoscopic(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const auto e = ensemble_param(p, "ensemble", EnsembleSpec::goe(2000));
  const double eta = param(p, "eta", 0.01);
  const auto separations = param(p, "separations", std::vector<double>{0.05, 0.1, 0.2});
  std::vector<double> anchors = param(p, "anchors", std::vector<double>{});
  if (anchors.empty())
    for (int k = 0; k <= 44; ++k) anchors.push_back(-1.2 + 0.05 * k);
  if (separations.size() < 2) throw ConfigError("spec.separations: need at least two separations");
  const auto samples = spectra(ctx, e, ctx.manifest.samples, false);
  std::vector<MesoscopicCovariance> cov;
  for (double d : separations) cov.push_back(anchored_mesoscopic_covariance(samples, lorentzian_bump, anchors, d, eta));
  bool negative = true, monotone = true;
  std::vector<double> values;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < cov.size(); ++k) {
    values.push_back(cov[k].covariance);
    ctx.sample_record({{"separation", separations[k]},
                       {"covariance", cov[k].covariance},
                       {"standard_error", cov[k].standard_error},
                       {"prediction_scale", cov[k].prediction_scale}});
    negative = negative && cov[k].covariance < 0.0;
    if (k > 0) monotone = monotone && std::abs(cov[k].covariance) < std::abs(cov[k - 1].covariance);
    if (cov[k].covariance < 0.0) {
      const double x = std::log(separations[k]), y = std::log(-cov[k].covariance);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
  }
  const double m = static_cast<double>(cov.size());
  const double slope = negative ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
  const double lo = param(p, "slope_min", -3.0), hi = param(p, "slope_max", -1.0);
  ctx.metric("negative", negative ? "true" : "false");
  ctx.metric("monotone", monotone ? "true" : "false");
  ctx.metric("loglog_slope", slope);
  ctx.observable("mesoscopic-covariance", values);
  ctx.passes = negative && monotone && slope >= lo && slope <= hi;
}

std::vector<double> edge_values(Context& ctx, const EnsembleSpec& e, std::uint64_t count, bool reference,
                                const std::string& side, bool dense) {
  const auto gamma = classical_locations(semicircle_model(), e.n());
  auto per = parallel_map(count, ctx.workers, [&](std::size_t i) {
    const auto s = spectrum_of(e, reference ? ctx.reference_seed(i) : ctx.seed(i), dense);
    std::vector<double> v;
    if (side == "bottom" || side == "both") v.push_back(edge_rescale(s, gamma, {1}).front());
    if (side == "top" || side == "both") v.push_back(edge_rescale_top(s, gamma, {1}).front());
    return v;
  });
  std::vector<double> all;
  for (auto& v : per) all.insert(all.end(), v.begin(), v.end());
  return all;
}

void run_edge(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const auto e = ensemble_param(p, "ensemble", EnsembleSpec::goe(1000));
  const auto side = param(p, "side", std::string("both"));
  if (side != "bottom" && side != "top" && side != "both") throw ConfigError("spec.side: bottom, top or both");
  const bool dense = param(p, "dense", false);
  auto values = edge_values(ctx, e, ctx.manifest.samples, false, side, dense);
  const std::size_t per = side == "both" ? 2 : 1;
  for (std::size_t i = 0; i < ctx.manifest.samples; ++i) {
    Json rec{{"index", i}, {"seed", ctx.seed(i)}};
    if (side != "top") rec["bottom"] = values[i * per];
    if (side != "bottom") rec["top"] = values[i * per + per - 1];
    ctx.sample_record(std::move(rec));
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  ctx.metric("count", static_cast<double>(values.size()));
  ctx.metric("mean", mean);
  if (p.contains("reference")) {
    const auto ref = ensemble_from_json(p.at("reference"));
    const auto ref_values = edge_values(ctx, ref, param<std::uint64_t>(p, "reference_samples", ctx.manifest.samples),
                                        true, side, dense);
    const auto report = compare_distributions(values, ref_values, ctx.threshold(0.05));
    ctx.metric("ks_reference", report.ks_distance);
    ctx.metric("threshold", report.threshold);
    ctx.passes = report.passes;
  } else {
    ctx.passes = true;
  }
  ctx.observable("edge", std::move(values));
}

void run_small_gap(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const auto sym = symmetry_from_string(param(p, "symmetry", std::string("real-symmetric")));
  const auto eps = param(p, "eps", std::vector<double>{0.3, 0.2, 0.1, 0.05, 0.03, 0.02, 0.01});
  const auto r = small_gap_exponent(sym, eps, ctx.manifest.samples, ctx.manifest.seed, ctx.workers);
  const double expected = sym == Symmetry::RealSymmetric ? 2.0 : 3.0;
  const double tol = ctx.threshold(0.1 * expected);
  for (std::size_t k = 0; k < r.eps.size(); ++k)
    ctx.sample_record({{"eps", r.eps[k]}, {"hits", r.hits[k]}, {"probability", r.probability[k]},
                       {"used_in_fit", static_cast<bool>(r.used_in_fit[k])}});
  ctx.metric("slope", r.slope);
  ctx.metric("slope_standard_error", r.slope_standard_error);
  ctx.metric("expected_slope", expected);
  ctx.metric("tolerance", tol);
  ctx.metric("insufficient_tail", r.insufficient_tail ? "true" : "false");
  ctx.observable("small-gap-probability", r.probability);
  ctx.passes = std::abs(r.slope - expected) <= tol;
}

std::vector<double> gaussian_reference_gaps(Context& ctx, double beta, int n, std::uint64_t count) {
  if (beta != 1.0 && beta != 2.0) throw ConfigError("Gaussian reference gaps need beta 1 or 2");
  const auto sym = beta == 1.0 ? Symmetry::RealSymmetric : Symmetry::ComplexHermitian;
  const auto model = semicircle_model();
  const auto gamma = classical_locations(model, n);
  auto per = parallel_map(count, ctx.workers, [&](std::size_t i) {
    return bulk_gaps(gaussian_spectrum(sym, n, ctx.reference_seed(i)), gamma, model);
  });
  std::vector<double> all;
  for (auto& g : per) all.insert(all.end(), g.begin(), g.end());
  return all;
}

void run_loggas(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const auto spec = p.contains("loggas") ? loggas_from_json(p.at("loggas"))
                                         : LogGasSpec{1.0, Potential::quartic(), 200};
  SamplerOptions opt;
  opt.burn_in = param(p, "burn_in", 10000);
  opt.samples = param(p, "configurations", 200);
  opt.thin = param(p, "thin", 10);
  opt.step_size = param(p, "step_size", 0.0);
  const auto model = equilibrium_density(spec.potential);
  const auto gamma = loggas_quantiles(model, spec.n);
  auto chains = parallel_map(ctx.manifest.samples, ctx.workers, [&](std::size_t i) {
    auto chain = sample_loggas(spec, ctx.seed(i), opt);
    std::vector<double> gaps;
    for (const auto& s : chain.samples) {
      auto g = bulk_gaps(s, gamma, model.density);
      gaps.insert(gaps.end(), g.begin(), g.end());
    }
    return std::make_pair(chain.diagnostics, std::move(gaps));
  });
  std::vector<double> gaps;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto& d = chains[i].first;
    ctx.sample_record({{"chain", i},
                       {"seed", ctx.seed(i)},
                       {"acceptance_rate", d.acceptance_rate},
                       {"step_size", d.step_size},
                       {"lag1_autocorrelation", d.lag1_autocorrelation}});
    gaps.insert(gaps.end(), chains[i].second.begin(), chains[i].second.end());
  }
  const auto ref_count = param<std::uint64_t>(p, "reference_samples", 200);
  const auto ref = gaussian_reference_gaps(ctx, spec.beta, spec.n, ref_count);
  const auto report = compare_distributions(gaps, ref, ctx.threshold(0.05));
  ctx.metric("edge_B", model.edge);
  ctx.metric("ks_reference", report.ks_distance);
  ctx.metric("threshold", report.threshold);
  ctx.observable("gaps", std::move(gaps));
  ctx.passes = report.passes;
}

void run_dbm_relax(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const int n = param(p, "n", 500);
  const double beta = param(p, "beta", 1.0);
  const double t_final = param(p, "t_final", 0.1);
  const auto start = param(p, "start", std::string("picket"));
  if (n < 2) throw ConfigError("spec.n: must be at least 2");
  const auto model = semicircle_model();
  const auto gamma = classical_locations(model, n);
  const auto sym = beta == 1.0 ? Symmetry::RealSymmetric : Symmetry::ComplexHermitian;
  auto per = parallel_map(ctx.manifest.samples, ctx.workers, [&](std::size_t i) {
    std::vector<double> init;
    if (start == "picket") init = picket_fence(n);
    else if (start == "gaussian") init = gaussian_spectrum(sym, n, ctx.seed(i)).eigenvalues;
    else throw ConfigError("spec.start: picket or gaussian");
    DbmOptions opt;
    opt.checkpoints = {0.0, t_final};
    const auto traj = run_dbm(init, beta, t_final, ctx.seed(i), opt);
    const auto final_state = SpectrumSample::from_values(traj.checkpoints.back().positions);
    return std::make_pair(traj.refinements, locally_unfolded_gaps(final_state));
  });
  std::vector<double> gaps;
  for (std::size_t i = 0; i < per.size(); ++i) {
    ctx.sample_record({{"index", i}, {"seed", ctx.seed(i)}, {"refinements", per[i].first}});
    gaps.insert(gaps.end(), per[i].second.begin(), per[i].second.end());
  }
  const auto ref_count = param<std::uint64_t>(p, "reference_samples", 40);
  auto ref_per = parallel_map(ref_count, ctx.workers, [&](std::size_t i) {
    return locally_unfolded_gaps(gaussian_spectrum(sym, n, ctx.reference_seed(i)));
  });
  std::vector<double> ref;
  for (auto& g : ref_per) ref.insert(ref.end(), g.begin(), g.end());
  const auto report = compare_distributions(gaps, ref, ctx.threshold(0.05));
  ctx.metric("ks_reference", report.ks_distance);
  ctx.metric("threshold", report.threshold);
  ctx.observable("gaps", std::move(gaps));
  ctx.passes = report.passes;
}

}  // namespace

namespace {

void run_coupled(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const int n = param(p, "n", 500);
  const double beta = param(p, "beta", 1.0);
  const double t_final = param(p, "t_final", 0.5);
  const auto law_b = EntryLaw::from_name(param(p, "law_b", std::string("rademacher")));
  const auto sym = beta == 1.0 ? Symmetry::RealSymmetric : Symmetry::ComplexHermitian;
  const auto spec_b = EnsembleSpec::wigner(sym, law_b, n);
  const auto bulk = bulk_labels(n, 0.25);
  std::vector<int> labels;
  for (int j = bulk.first; j <= bulk.last; ++j) labels.push_back(j);
  auto errors = parallel_map(ctx.manifest.samples, ctx.workers, [&](std::size_t i) {
    const auto a = gaussian_spectrum(sym, n, ctx.seed(i)).eigenvalues;
    const auto b = eigenvalues(sample_matrix(spec_b, ctx.reference_seed(i))).eigenvalues;
    DbmOptions opt;
    opt.checkpoints = {0.0, t_final};
    const auto traj = run_coupled_dbm(a, b, beta, t_final, ctx.seed(i), opt);
    const auto pred = coupled_kernel_prediction(traj.differences.front(), t_final, labels);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      const double d = traj.differences.back()[static_cast<std::size_t>(labels[k] - 1)];
      num += (d - pred[k]) * (d - pred[k]);
      den += d * d;
    }
    return std::make_pair(num, den);
  });
  double num = 0.0, den = 0.0;
  std::vector<double> per_seed;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    per_seed.push_back(std::sqrt(errors[i].first / errors[i].second));
    ctx.sample_record({{"index", i}, {"relative_l2_error", per_seed.back()}});
    num += errors[i].first;
    den += errors[i].second;
  }
  // Pooled over seeds: single paths fluctuate too much for a per-seed bound.
  const double pooled = std::sqrt(num / den);
  const double thr = ctx.threshold(0.25);
  ctx.metric("relative_l2_error", pooled);
  ctx.metric("relative_l2_error_max", *std::max_element(per_seed.begin(), per_seed.end()));
  ctx.metric("threshold", thr);
  ctx.observable("coupled-relative-error", per_seed);
  ctx.passes = pooled <= thr;
}

void run_homog(Context& ctx) {
  const auto& p = ctx.manifest.spec;
  const int k = param(p, "K", 512);
  const double beta = param(p, "beta", 1.0);
  const double t = param(p, "t", 64.0);
  const auto problem = frozen_unit_problem(k, beta);
  const double s = t / poisson_time(beta, 1.0);
  const auto sol = fundamental_solution(problem, {0.0, s});
  const auto& u = sol.u.back();
  const int z = problem.center;
  const int window = static_cast<int>(std::floor(t));
  if (window > k) throw ConfigError("spec.t: window |j - Z| <= t exceeds K");
  double mass_u = 0.0, mass_k = 0.0;
  for (int j = z - window; j <= z + window; ++j) {
    mass_u += u(z, j);
    mass_k += kernel_prediction(z, j, t);
  }
  double worst = 0.0;
  std::vector<double> row;
  for (int j = z - window; j <= z + window; ++j) {
    const double pred = kernel_prediction(z, j, t) * mass_u / mass_k;
    const double rel = std::abs(u(z, j) - pred) / pred;
    worst = std::max(worst, rel);
    row.push_back(u(z, j));
    ctx.sample_record({{"offset", j - z}, {"u", u(z, j)}, {"poisson", pred}, {"relative_error", rel}});
  }
  const double thr = ctx.threshold(0.2);
  ctx.metric("solver_time", s);
  ctx.metric("poisson_time", t);
  ctx.metric("max_relative_error", worst);
  ctx.metric("threshold", thr);
  ctx.observable("homog-center-row", row);
  ctx.passes = worst <= thr;
}

void dispatch(Context& ctx) {
  static const std::map<std::string, void (*)(Context&)> table{
      {"density", run_density},       {"local-law", run_local_law},     {"rigidity", run_rigidity},
      {"gaps", run_gaps},             {"correlation", run_correlation}, {"mesoscopic", run_mesoscopic},
      {"edge", run_edge},             {"small-gap-exponent", run_small_gap}, {"loggas", run_loggas},
      {"dbm-relax", run_dbm_relax},   {"coupled-dbm", run_coupled},     {"homog", run_homog}};
  // Recognized spec keys per kind; anything else is a typo and is refused
  // before work starts.
  static const std::map<std::string, std::set<std::string>> keys{
      {"density", {"ensemble", "dense"}},
      {"local-law", {"ensemble", "energy", "eta_exponent", "fraction"}},
      {"rigidity", {"ensemble", "alpha"}},
      {"gaps", {"ensemble", "reference", "reference_samples", "mode", "label", "half_width", "dense"}},
      {"correlation",
       {"symmetry", "n", "order", "energy", "b_exponent", "bandwidth", "alpha_max", "grid_points"}},
      {"mesoscopic", {"ensemble", "eta", "separations", "anchors", "slope_min", "slope_max"}},
      {"edge", {"ensemble", "reference", "reference_samples", "side", "dense"}},
      {"small-gap-exponent", {"symmetry", "eps"}},
      {"loggas", {"loggas", "burn_in", "configurations", "thin", "step_size", "reference_samples"}},
      {"dbm-relax", {"n", "beta", "t_final", "start", "reference_samples"}},
      {"coupled-dbm", {"n", "beta", "t_final", "law_b"}},
      {"homog", {"K", "beta", "t"}}};
  const auto it = table.find(ctx.manifest.kind);
  if (it == table.end()) throw ConfigError("unknown experiment kind '" + ctx.manifest.kind + "'");
  const auto& known = keys.at(ctx.manifest.kind);
  for (const auto& [key, value] : ctx.manifest.spec.items())
    if (!known.count(key)) throw ConfigError("spec." + key + ": not a parameter of '" + ctx.manifest.kind + "'");
  it->second(ctx);
}

void write_outputs(const Context& ctx) {
  const auto& dir = ctx.manifest.out_dir;
  write_text(dir / "manifest.json", ctx.manifest.to_json().dump(2) + "\n");
  std::string lines;
  for (const auto& r : ctx.records) lines += r.dump() + "\n";
  write_text(dir / "samples.jsonl", lines);
  if (!ctx.observable_kind.empty()) {
    std::ostringstream os;
    os << "# kind=" << ctx.observable_kind << "\nvalue\n" << std::setprecision(17);
    for (double v : ctx.observable_values) os << v << "\n";
    write_text(dir / "observable.csv", os.str());
  }
}

std::string verdict_block(const Context& ctx) {
  std::ostringstream os;
  os << "kind = " << ctx.manifest.kind << "\n"
     << "version = " << ctx.manifest.version << "\n"
     << "seed = " << ctx.manifest.seed << "\n"
     << "samples = " << ctx.manifest.samples << "\n";
  for (const auto& [k, v] : ctx.metrics) os << k << " = " << v << "\n";
  os << "passes = " << (ctx.passes ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentManifest& manifest, int workers) {
  ExperimentOutcome out;
  try {
    std::error_code ec;
    std::filesystem::create_directories(manifest.out_dir, ec);
    if (ec || !std::filesystem::is_directory(manifest.out_dir))
      throw ConfigError("output directory '" + manifest.out_dir.string() + "' is not writable");
    Context ctx(manifest, workers);
    dispatch(ctx);
    write_outputs(ctx);
    out.passes = ctx.passes;
    out.verdict = verdict_block(ctx);
    write_text(manifest.out_dir / "verdict.txt", out.verdict);
    out.exit_code = ctx.passes ? 0 : 1;
  } catch (const ConfigError& e) {
    out.exit_code = 2;
    out.error = std::string("configuration error: ") + e.what();
  } catch (const std::exception& e) {
    out.exit_code = 2;
    out.error = "experiment '" + manifest.kind + "' failed: " + e.what();
  }
  return out;
}

std::vector<double> read_observable(const std::filesystem::path& report, std::string* kind) {
  const auto file = std::filesystem::is_directory(report) ? report / "observable.csv" : report;
  std::istringstream is(read_text(file));
  std::string line, tag;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# kind=", 0) == 0) {
      tag = line.substr(7);
      continue;
    }
    if (line == "value") continue;
    values.push_back(std::stod(line));
  }
  if (kind) *kind = tag;
  return values;
}

ComparisonReport compare_experiments(const std::filesystem::path& report_a, const std::filesystem::path& report_b,
                                     double threshold) {
  std::string kind_a, kind_b;
  const auto a = read_observable(report_a, &kind_a);
  const auto b = read_observable(report_b, &kind_b);
  if (kind_a != kind_b)
    throw ConfigError("cannot compare observables of different kinds ('" + kind_a + "' vs '" + kind_b + "')");
  return compare_distributions(a, b, threshold);
}

}  // namespace rmtlab
