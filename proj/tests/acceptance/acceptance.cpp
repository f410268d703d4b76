// Acceptance checks. `rmtlab_acceptance N` runs criterion N, no argument runs
// all of them. Each criterion prints exactly one line:
//   [PASS] C<n> <title>: <measurements> (<seconds> s, budget <seconds> s)
// The exit status is 0 iff every requested criterion passed. Wall-clock
// budgets (none for C14) are reported next to the measured time but do not
// gate the verdict.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "rmtlab/cli.hpp"
#include "rmtlab/dynamics.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/homogenization.hpp"
#include "rmtlab/loggas.hpp"
#include "rmtlab/parallel.hpp"
#include "rmtlab/random.hpp"
#include "rmtlab/statistics.hpp"

using namespace rmtlab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

int workers() { return default_workers(); }

fs::path out_dir(const std::string& name) {
  const auto dir = fs::current_path() / "acceptance_out" / name;
  fs::remove_all(dir);
  return dir;
}

// key = value lines of a verdict block.
std::map<std::string, std::string> parse_verdict(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

struct Run {
  ExperimentOutcome outcome;
  fs::path dir;
  std::map<std::string, std::string> metrics;
  double number(const std::string& key) const {
    const auto it = metrics.find(key);
    if (it == metrics.end()) throw std::runtime_error("verdict lacks '" + key + "'");
    return std::stod(it->second);
  }
};

Run experiment(const std::string& kind, Json spec, std::uint64_t samples, std::uint64_t seed, const std::string& dir,
               double threshold = -1.0) {
  ExperimentManifest m;
  m.kind = kind;
  m.spec = std::move(spec);
  m.samples = samples;
  m.seed = seed;
  m.out_dir = out_dir(dir);
  m.threshold = threshold;
  Run r;
  r.dir = m.out_dir;
  r.outcome = run_experiment(m, workers());
  if (r.outcome.exit_code == 2) throw std::runtime_error(kind + ": " + r.outcome.error);
  r.metrics = parse_verdict(r.outcome.verdict);
  return r;
}

Json rademacher(int n) { return to_json(EnsembleSpec::wigner(Symmetry::RealSymmetric, EntryLaw::rademacher(), n)); }

// ---------------------------------------------------------------------------

Verdict c1() {
  const auto r = experiment("density", {{"ensemble", to_json(EnsembleSpec::goe(2000))}}, 20, 101, "C1", 0.02);
  return {r.outcome.passes, "GOE N=2000, 20 seeds, max KS " + fmt(r.number("ks_max")) + " <= 0.02"};
}

Verdict c2() {
  const auto r = experiment("local-law",
                            {{"ensemble", to_json(EnsembleSpec::goe(2000))}, {"eta_exponent", 0.9}, {"fraction", 0.95}},
                            100, 102, "C2", 10.0);
  return {r.outcome.passes, "GOE N=2000, eta=N^-0.9, fraction with |m_N-m_sc| N eta <= 10: " +
                                fmt(r.number("fraction_within")) + " >= 0.95"};
}

Verdict c3() {
  const auto r = experiment("rigidity", {{"ensemble", to_json(EnsembleSpec::goe(1000))}}, 50, 103, "C3");
  return {r.outcome.passes, "GOE N=1000, 50 seeds, worst bulk max " + fmt(r.number("bulk_max")) +
                                " <= 10 log N = " + fmt(r.number("bound"))};
}

Verdict c4() {
  const auto r = experiment("gaps", {{"ensemble", to_json(EnsembleSpec::goe(1000))}, {"mode", "bulk"}}, 130, 104, "C4",
                            0.05);
  const double count = r.number("gap_count");
  return {r.outcome.passes && count >= 1e5,
          "GOE N=1000, " + fmt(count) + " bulk gaps, L1 to surmise " + fmt(r.number("l1_surmise")) + " <= 0.05"};
}

Verdict c5() {
  const auto r = experiment("correlation",
                            {{"symmetry", "complex-hermitian"}, {"n", 1000}, {"b_exponent", 0.9}, {"bandwidth", 0.1}},
                            20000, 105, "C5", 0.1);
  return {r.outcome.passes, "GUE N=1000, b_N=N^-0.9, 20000 samples, grid L1 error " + fmt(r.number("grid_l1_error")) +
                                " <= 0.1"};
}

Verdict c6() {
  const int n = 1000;
  const Json spec{{"ensemble", rademacher(n)},
                  {"reference", to_json(EnsembleSpec::goe(n))},
                  {"mode", "averaged"},
                  {"label", n / 2}};
  const std::uint64_t matrices = 6667;  // 15 gaps each
  const auto r = experiment("gaps", spec, matrices, 106, "C6", 0.02);
  const double count = r.number("gap_count");
  return {r.outcome.passes && count >= 1e5, "Rademacher vs GOE, N=1000, averaged label, " + fmt(count) +
                                                " gaps each, KS " + fmt(r.number("ks_reference")) + " <= 0.02"};
}

Verdict c7() {
  const auto real = experiment("small-gap-exponent", {{"symmetry", "real-symmetric"}}, 10000000, 107, "C7r");
  const auto cplx = experiment("small-gap-exponent", {{"symmetry", "complex-hermitian"}}, 10000000, 107, "C7c");
  const double a = real.number("slope"), b = cplx.number("slope");
  return {std::abs(a - 2) <= 0.2 && std::abs(b - 3) <= 0.3,
          "1e7 samples, slopes " + fmt(a) + " (2 +- 0.2) and " + fmt(b) + " (3 +- 0.3)"};
}

Verdict c8() {
  const auto r = experiment("loggas",
                            {{"loggas", to_json(LogGasSpec{1.0, Potential::quartic(), 200})},
                             {"configurations", 200},
                             {"reference_samples", 400}},
                            40, 108, "C8", 0.05);
  const auto quartic = equilibrium_density(Potential::quartic());
  std::vector<double> probes;
  for (int k = 0; k < 101; ++k) probes.push_back(quartic.edge * (-0.995 + 1.99 * (k + 0.5) / 101));
  const double residual = equilibrium_residual(quartic, Potential::quartic(), probes);
  const auto quadratic = equilibrium_density(Potential::quadratic());
  double sup = 0.0;
  for (int k = 0; k <= 4000; ++k) {
    const double x = -2.0 + 4.0 * k / 4000;
    sup = std::max(sup, std::abs(quadratic.density.pdf(x) - semicircle_density(x)));
  }
  return {r.outcome.passes && residual <= 1e-6 && sup <= 1e-6,
          "quartic beta=1 N=200 MCMC vs GOE gaps KS " + fmt(r.number("ks_reference")) +
              " <= 0.05; residual " + fmt(residual) + ", quadratic sup error " + fmt(sup) + " <= 1e-6"};
}

Verdict c9() {
  const auto relax = experiment("dbm-relax",
                                {{"n", 500}, {"beta", 1.0}, {"t_final", 0.1}, {"start", "picket"},
                                 {"reference_samples", 40}},
                                20, 109, "C9", 0.05);
  // Stationarity from GOE initial data.
  const int n = 500, paths = 16;
  const auto model = semicircle_model();
  const auto gamma = classical_locations(model, n);
  const auto master = derive_seed(109, 1);
  const auto per = parallel_map(paths, workers(), [&](std::size_t i) {
    const auto seed = derive_seed(master, i);
    const auto start = gaussian_spectrum(Symmetry::RealSymmetric, n, seed);
    DbmOptions opt;
    opt.checkpoints = {0.0, 1.0};
    const auto traj = run_dbm(start.eigenvalues, 1.0, 1.0, seed, opt);
    return std::make_pair(bulk_gaps(start, gamma, model),
                          bulk_gaps(SpectrumSample::from_values(traj.checkpoints.back().positions), gamma, model));
  });
  std::vector<double> g0, g1;
  for (const auto& [a, b] : per) {
    g0.insert(g0.end(), a.begin(), a.end());
    g1.insert(g1.end(), b.begin(), b.end());
  }
  const double ks = ks_two_sample(g0, g1);
  return {relax.outcome.passes && ks <= 0.03, "picket start N=500 t=0.1 vs GOE KS " +
                                                  fmt(relax.number("ks_reference")) + " <= 0.05; GOE start KS(t=0,t=1) " +
                                                  fmt(ks) + " <= 0.03 over " + std::to_string(g0.size()) + " gaps"};
}

Verdict c10() {
  const int n = 1000;
  const auto r = experiment("edge",
                            {{"ensemble", rademacher(n)}, {"reference", to_json(EnsembleSpec::goe(n))},
                             {"side", "both"}, {"reference_samples", 2000}},
                            2000, 110, "C10", 0.05);
  return {r.outcome.passes, "N=1000, 2000 seeds each, both edges pooled, KS " + fmt(r.number("ks_reference")) +
                                " <= 0.05"};
}

Verdict c11() {
  const auto r = experiment("mesoscopic", {{"ensemble", to_json(EnsembleSpec::goe(2000))}, {"eta", 0.01}}, 5000, 111,
                            "C11");
  const auto values = read_observable(r.dir);
  std::string cov;
  for (double v : values) cov += (cov.empty() ? "" : ", ") + fmt(v);
  return {r.outcome.passes, "GOE N=2000, 5000 seeds, eta=0.01, covariances [" + cov + "], log-log slope " +
                                fmt(r.number("loglog_slope")) + " in [-3, -1]"};
}

Verdict c12() {
  const auto r = experiment("homog", {{"K", 512}, {"beta", 1.0}, {"t", 64.0}}, 1, 112, "C12", 0.2);
  const auto problem = frozen_unit_problem(32, 1.0);
  const Eigen::MatrixXd a = generator(problem.coefficients);
  const auto sol = fundamental_solution(problem, {1.0, 4.0, 16.0});
  double oracle = 0.0;
  for (std::size_t k = 0; k < sol.times.size(); ++k)
    oracle = std::max(oracle, (sol.u[k] - Eigen::MatrixXd((-sol.times[k] * a).exp())).cwiseAbs().maxCoeff());
  return {r.outcome.passes && oracle <= 1e-6, "K=512 t=64 center row max relative error " +
                                                  fmt(r.number("max_relative_error")) + " <= 0.2; oracle error " +
                                                  fmt(oracle) + " <= 1e-6 at |I|=" + std::to_string(problem.size())};
}

// U(sigma) for the window coefficients of a DBM path: piecewise-constant
// coefficients between checkpoints, exact symmetric exponentials.
std::vector<Eigen::MatrixXd> path_solution(const std::vector<std::vector<double>>& x, double ds, int center, int k,
                                           double beta, double curvature, const std::vector<double>& sigmas) {
  const int size = 2 * k + 1;
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(size, size);
  std::vector<Eigen::MatrixXd> out;
  std::size_t next = 0;
  for (std::size_t step = 0; step + 1 < x.size() && next < sigmas.size(); ++step) {
    const auto p = window_problem(x[step], center, k, beta, Potential::quadratic(), curvature);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(generator(p.coefficients));
    const Eigen::VectorXd decay = (-ds * es.eigenvalues().array()).exp();
    u = (u * es.eigenvectors()) * decay.asDiagonal() * es.eigenvectors().transpose();
    const double s = ds * static_cast<double>(step + 1);
    if (std::abs(s - sigmas[next]) < 1e-9) out.push_back(u), ++next;
  }
  return out;
}

Verdict c13() {
  const std::vector<double> sigmas{16.0, 32.0, 64.0};
  const double alpha = 0.25;
  // Unit lattice with the exterior held fixed, the same linearization the
  // path windows below use.
  const auto frozen = frozen_unit_problem(256, 1.0, true);
  const auto sol = fundamental_solution(frozen, sigmas);
  const auto frozen_report = holder_diagnostic(sol, frozen.center, sigmas, alpha);

  // Equilibrated paths: GUE spectra evolved by DBM, which leaves the law
  // invariant. Unit spacing at the center: x = N rho(0) lambda; the window
  // time s relates to DBM time through beta ds = N rho(0)^2 dt.
  const int n = 512, k = 128, paths = 20;
  const double beta = 2.0, rho = semicircle_density(0.0), ds = 0.25;
  const double dt_per_ds = beta / (n * rho * rho);
  const int steps = static_cast<int>(std::lround(sigmas.back() / ds));
  const auto master = derive_seed(113, 0);
  const auto decreasing = parallel_map(paths, workers(), [&](std::size_t i) {
    const auto seed = derive_seed(master, i);
    const auto start = gaussian_spectrum(Symmetry::ComplexHermitian, n, seed);
    DbmOptions opt;
    for (int s = 0; s <= steps; ++s) opt.checkpoints.push_back(s * ds * dt_per_ds);
    const auto traj = run_dbm(start.eigenvalues, beta, opt.checkpoints.back(), seed, opt);
    std::vector<std::vector<double>> x;
    for (const auto& c : traj.checkpoints) {
      std::vector<double> scaled(c.positions.size());
      for (std::size_t j = 0; j < scaled.size(); ++j) scaled[j] = n * rho * c.positions[j];
      x.push_back(std::move(scaled));
    }
    const auto u = path_solution(x, ds, n / 2, k, beta, 1.0 / (n * rho * rho), sigmas);
    FundamentalSolution fs{sigmas, u};
    return holder_diagnostic(fs, k, sigmas, alpha).strictly_decreasing ? 1 : 0;
  });
  int good = 0;
  for (int d : decreasing) good += d;
  std::string ladder;
  for (const auto& p : frozen_report.points) ladder += (ladder.empty() ? "" : ", ") + fmt(p.osc_sigma);
  return {frozen_report.strictly_decreasing && good >= 18,
          "frozen K=256 lattice osc*sigma [" + ladder + "] strictly decreasing: " +
              (frozen_report.strictly_decreasing ? "yes" : "no") + "; DBM paths (beta=2, N=512, K=128) decreasing in " +
              std::to_string(good) + "/20 >= 18"};
}

Verdict c14() {
  std::vector<std::string> failures;
  // loggas: gradient against central differences.
  {
    CounterStream rng(114, Domain::MatrixEntries, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const LogGasSpec spec{trial % 2 ? 1.0 : 2.0, trial % 3 ? Potential::quartic() : Potential::quadratic(), 8};
      // Jittered grid with gaps above 0.2; fourth-order central differences.
      std::vector<double> x(8);
      for (int i = 0; i < 8; ++i) x[i] = -2.0 + 4.0 * (i + 0.5) / 8 + 0.15 * (2 * rng.uniform() - 1);
      const auto g = loggas_gradient(x, spec);
      const double h = 1e-4;
      for (int j = 0; j < 8; ++j) {
        auto e = [&](double d) {
          auto y = x;
          y[j] += d;
          return loggas_energy(y, spec);
        };
        const double fd = (8 * (e(h) - e(-h)) - (e(2 * h) - e(-2 * h))) / (12 * h);
        worst = std::max(worst, std::abs(fd - g[j]));
      }
    }
    if (!(worst <= 1e-6)) failures.push_back("gradient " + fmt(worst));
  }
  // homogenization: conservation and positivity.
  {
    const auto p = frozen_unit_problem(40, 1.0);
    const auto sol = fundamental_solution(p, {0.1, 1.0, 10.0, 50.0});
    double row = 0.0, low = 0.0;
    for (const auto& u : sol.u) {
      row = std::max(row, (u.rowwise().sum().array() - 1.0).abs().maxCoeff());
      low = std::min(low, u.minCoeff());
    }
    // Moving coefficients with W = 0 conserve mass; a frozen exterior adds W
    // and makes the rows sub-stochastic.
    std::vector<double> x;
    for (int i = 0; i < 61; ++i) x.push_back(i + 0.4 * std::cos(0.7 * i * i));
    auto moved = [&](double s) {
      auto y = x;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.02 * std::sin(s + static_cast<double>(i));
      return y;
    };
    const auto free = fundamental_solution(
        [&](double s) { return generator(hessian_coefficients(moved(s), 1.0, Potential::quadratic(), {}, 0.0)); },
        {0.5, 2.0});
    for (const auto& u : free.u) {
      row = std::max(row, (u.rowwise().sum().array() - 1.0).abs().maxCoeff());
      low = std::min(low, u.minCoeff());
    }
    const auto bounded = fundamental_solution(
        [&](double s) {
          return generator(window_problem(moved(s), 30, 20, 1.0, Potential::quadratic(), 0.0).coefficients);
        },
        {0.5, 2.0});
    double excess = 0.0;
    for (const auto& u : bounded.u) {
      excess = std::max(excess, u.rowwise().sum().maxCoeff() - 1.0);
      low = std::min(low, u.minCoeff());
    }
    if (excess > 1e-12) failures.push_back("row sum above one " + fmt(excess));
    if (!(row <= 1e-8)) failures.push_back("row sums " + fmt(row));
    if (low < 0.0) failures.push_back("negative entry " + fmt(low));
  }
  // spectral: Herglotz property and quantile round trips.
  {
    const auto s = gaussian_spectrum(Symmetry::RealSymmetric, 500, 114);
    bool herglotz = true;
    for (double re = -5; re <= 5; re += 0.1)
      for (double im : {1e-8, 1e-4, 1e-2, 1.0, 100.0}) {
        herglotz &= empirical_stieltjes(s, {re, im}).imag() > 0;
        herglotz &= semicircle_stieltjes({re, im}).imag() > 0;
      }
    if (!herglotz) failures.push_back("Herglotz");
    double round = 0.0;
    for (const auto& m : {semicircle_model(), equilibrium_density(Potential::quartic()).density})
      for (int k = 1; k <= 100; ++k) {
        const double x = m.lower() + (m.upper() - m.lower()) * k / 101.0;
        round = std::max(round, std::abs(m.quantile(m.cdf(x)) - x));
      }
    if (!(round <= 1e-6)) failures.push_back("quantile round trip " + fmt(round));
  }
  // cli: determinism and worker-count invariance.
  {
    auto run = [&](int w, const std::string& dir) {
      ExperimentManifest m;
      m.kind = "gaps";
      m.spec = {{"ensemble", rademacher(120)}, {"reference", to_json(EnsembleSpec::goe(120))}};
      m.samples = 16;
      m.seed = 114;
      m.out_dir = out_dir(dir);
      run_experiment(m, w);
      std::string all;
      for (const char* f : {"manifest.json", "samples.jsonl", "observable.csv", "verdict.txt"})
        all += read_text(m.out_dir / f);
      return all;
    };
    // Same output directory each time: the manifest records it.
    const auto a = run(1, "C14"), b = run(1, "C14"), c = run(8, "C14");
    if (a != b) failures.push_back("repeat runs differ");
    if (a != c) failures.push_back("1 vs 8 workers differ");
  }
  std::string detail = "gradient FD, row sums/positivity, Herglotz/quantiles, determinism/workers";
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty(), detail};
}

struct Criterion {
  const char* title;
  double budget_s;
  Verdict (*run)();
};

const std::vector<Criterion> kCriteria{
    {"semicircle law", 120, c1},          {"local law", 300, c2},
    {"rigidity", 180, c3},                {"Wigner surmise", 300, c4},
    {"sine-kernel 2-point law", 900, c5}, {"gap universality", 1200, c6},
    {"2x2 gap exponents", 120, c7},       {"log-gas universality", 1800, c8},
    {"DBM relaxation", 1200, c9},         {"edge universality", 1200, c10},
    {"mesoscopic covariance", 1800, c11}, {"homogenization", 300, c12},
    {"Holder diagnostic", 900, c13},      {"property suites", 0, c14}};

bool run_one(int id) {
  const auto& c = kCriteria[static_cast<std::size_t>(id - 1)];
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = c.run();
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string timing = std::to_string(static_cast<int>(std::lround(secs))) + " s";
  if (c.budget_s > 0)
    timing += ", budget " + std::to_string(static_cast<int>(c.budget_s)) + " s" + (secs > c.budget_s ? ", over budget" : "");
  std::printf("[%s] C%d %s: %s (%s)\n", v.pass ? "PASS" : "FAIL", id, c.title, v.detail.c_str(), timing.c_str());
  std::fflush(stdout);
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > static_cast<int>(kCriteria.size())) {
      std::fprintf(stderr, "usage: %s [criterion 1..%zu]...\n", argv[0], kCriteria.size());
      return 2;
    }
    ids.push_back(id);
  }
  if (ids.empty())
    for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) ids.push_back(i);
  bool ok = true;
  for (int id : ids) ok = run_one(id) && ok;
  return ok ? 0 : 1;
}
