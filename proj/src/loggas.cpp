#include "rmtlab/loggas.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include "rmtlab/errors.hpp"

namespace rmtlab {

Potential::Potential(std::vector<double> coefficients) : c_(std::move(coefficients)) {
  while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
  const int d = degree();
  if (d < 2 || d > 8 || d % 2 != 0) throw ConfigError("potential must be an even polynomial of degree 2..8");
  if (!(c_.back() > 0.0)) throw ConfigError("potential needs a positive leading coefficient");
  for (std::size_t k = 1; k < c_.size(); k += 2)
    if (c_[k] != 0.0) throw ConfigError("potential must be even (odd coefficient " + std::to_string(k) + " nonzero)");
}

double Potential::value(double x) const {
  double v = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * x + *it;
  return v;
}

double Potential::derivative(double x) const {
  double v = 0.0;
  for (std::size_t k = c_.size() - 1; k >= 1; --k) v = v * x + static_cast<double>(k) * c_[k];
  return v;
}

double Potential::second_derivative(double x) const {
  double v = 0.0;
  for (std::size_t k = c_.size() - 1; k >= 2; --k) v = v * x + static_cast<double>(k * (k - 1)) * c_[k];
  return v;
}

std::string Potential::describe() const {
  std::ostringstream os;
  os << std::setprecision(17);
  bool first = true;
  for (std::size_t k = 0; k < c_.size(); ++k) {
    if (c_[k] == 0.0) continue;
    if (!first) os << " + ";
    os << c_[k] << "*x^" << k;
    first = false;
  }
  return os.str();
}

void LogGasSpec::validate() const {
  if (!(beta > 0.0)) throw ConfigError("log-gas beta must be positive");
  if (n < 1) throw ConfigError("log-gas N must be >= 1");
}

namespace {

void require_ordered(const std::vector<double>& lambda) {
  for (std::size_t k = 1; k < lambda.size(); ++k) {
    if (!(lambda[k] > lambda[k - 1]))
      throw SingularConfiguration("configuration not strictly increasing at index " + std::to_string(k));
  }
}

}  // namespace

double loggas_energy(const std::vector<double>& lambda, const LogGasSpec& spec) {
  require_ordered(lambda);
  const double n = static_cast<double>(lambda.size());
  double confinement = 0.0, interaction = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    confinement += 0.5 * spec.potential.value(lambda[i]);
    for (std::size_t j = i + 1; j < lambda.size(); ++j) interaction += std::log(lambda[j] - lambda[i]);
  }
  return confinement - interaction / n;
}

std::vector<double> loggas_gradient(const std::vector<double>& lambda, const LogGasSpec& spec) {
  require_ordered(lambda);
  const std::size_t n = lambda.size();
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) {
    double repulsion = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) repulsion += 1.0 / (lambda[j] - lambda[k]);
    g[j] = 0.5 * spec.potential.derivative(lambda[j]) - repulsion / static_cast<double>(n);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Equilibrium measure

namespace {

// Chebyshev coefficients a_k of (1/2) V'(B s) in T_k(s).
std::vector<double> chebyshev_coefficients(const Potential& v, double b) {
  const auto& c = v.coefficients();
  const int top = v.degree() - 1;
  std::vector<double> a(static_cast<std::size_t>(top + 1), 0.0);
  for (int m = 1; m <= top; m += 2) {
    const double p = 0.5 * (m + 1) * c[static_cast<std::size_t>(m + 1)] * std::pow(b, m);
    if (p == 0.0) continue;
    // s^m = 2^{1-m} sum_{k odd} binom(m, (m-k)/2) T_k(s)
    for (int k = 1; k <= m; k += 2) {
      a[static_cast<std::size_t>(k)] +=
          p * std::ldexp(boost::math::binomial_coefficient<double>(static_cast<unsigned>(m),
                                                                   static_cast<unsigned>((m - k) / 2)),
                         1 - m);
    }
  }
  return a;
}

double normalization_defect(const Potential& v, double b) { return chebyshev_coefficients(v, b)[1] * b - 2.0; }

class EquilibriumDensity final : public DensityModel::Impl {
 public:
  EquilibriumDensity(double b, std::vector<double> a) : b_(b), a_(std::move(a)) {}
  double lower() const override { return -b_; }
  double upper() const override { return b_; }

  // t = -B cos(theta); rho = (1/pi) sum_k a_k (-1)^{k-1} sin(k theta).
  double pdf(double t) const override {
    if (t <= -b_ || t >= b_) return 0.0;
    const double theta = angle(t);
    double s = 0.0;
    for (std::size_t k = 1; k < a_.size(); ++k)
      s += a_[k] * ((k % 2 == 1) ? 1.0 : -1.0) * std::sin(static_cast<double>(k) * theta);
    return s / M_PI;
  }

  double cdf(double t) const override {
    if (t <= -b_) return 0.0;
    if (t >= b_) return 1.0;
    const double theta = angle(t);
    auto integral_cos = [theta](std::size_t m) {
      return m == 0 ? theta : std::sin(static_cast<double>(m) * theta) / static_cast<double>(m);
    };
    double s = 0.0;
    for (std::size_t k = 1; k < a_.size(); ++k) {
      const double sign = (k % 2 == 1) ? 1.0 : -1.0;
      s += a_[k] * sign * 0.5 * (integral_cos(k - 1) - integral_cos(k + 1));
    }
    return std::clamp(b_ * s / M_PI, 0.0, 1.0);
  }

 private:
  double angle(double t) const { return std::acos(std::clamp(-t / b_, -1.0, 1.0)); }

  double b_;
  std::vector<double> a_;
};

// sum_k a_k U_{k-1}(s)
double chebyshev_u_series(const std::vector<double>& a, double s) {
  double u_prev = 0.0, u = 1.0, total = 0.0;  // U_{-1}, U_0
  for (std::size_t k = 1; k < a.size(); ++k) {
    total += a[k] * u;
    const double next = 2.0 * s * u - u_prev;
    u_prev = u;
    u = next;
  }
  return total;
}

}  // namespace

EquilibriumModel equilibrium_density(const Potential& potential) {
  // Smallest positive root of a_1(B) B = 2, bracketed by a geometric scan.
  double lo = 1e-3;
  if (normalization_defect(potential, lo) >= 0.0) throw NumericalError("equilibrium endpoint below scan range");
  double hi = lo;
  while (normalization_defect(potential, hi) < 0.0) {
    lo = hi;
    hi *= 1.1;
    if (hi > 1e6) throw NumericalError("equilibrium endpoint equation has no root");
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (normalization_defect(potential, mid) < 0.0) lo = mid;
    else hi = mid;
  }
  const double b = 0.5 * (lo + hi);
  auto a = chebyshev_coefficients(potential, b);

  constexpr int kMesh = 4001;
  for (int i = 0; i < kMesh; ++i) {
    const double s = -1.0 + 2.0 * i / (kMesh - 1);
    if (!(chebyshev_u_series(a, s) > 0.0))
      throw UnsupportedPotential("equilibrium density is not positive on a single interval for V = " +
                                 potential.describe());
  }

  double upper = 0.0, lower = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    upper += static_cast<double>(k) * a[k];
    lower += ((k % 2 == 1) ? 1.0 : -1.0) * static_cast<double>(k) * a[k];
  }
  const double scale = std::sqrt(2.0 / b) / M_PI;

  EquilibriumModel model{DensityModel(std::make_shared<const EquilibriumDensity>(b, a)), b, a, scale * lower,
                         scale * upper};
  return model;
}

double equilibrium_residual(const EquilibriumModel& model, const Potential& potential,
                            const std::vector<double>& probes) {
  using boost::math::quadrature::gauss_kronrod;
  const double b = model.edge;
  const auto& rho = model.density;
  double worst = 0.0;
  for (double t : probes) {
    if (!(t > -b && t < b)) throw ConfigError("equilibrium_residual: probe outside the support");
    const double rt = rho.pdf(t);
    // s = -B cos(theta), ds = B sin(theta) d theta
    auto integrand = [&](double theta) {
      const double s = -b * std::cos(theta);
      const double diff = t - s;
      if (diff == 0.0) return 0.0;
      return (rho.pdf(s) - rt) / diff * b * std::sin(theta);
    };
    const double split = std::acos(std::clamp(-t / b, -1.0, 1.0));
    double err = 0.0;
    const double smooth = gauss_kronrod<double, 61>::integrate(integrand, 0.0, split, 15, 1e-14, &err) +
                          gauss_kronrod<double, 61>::integrate(integrand, split, M_PI, 15, 1e-14, &err);
    const double pv = smooth + rt * std::log((t + b) / (b - t));
    worst = std::max(worst, std::abs(pv - 0.5 * potential.derivative(t)));
  }
  return worst;
}

std::vector<double> loggas_quantiles(const EquilibriumModel& model, int n) {
  return classical_locations(model.density, n);
}

// ---------------------------------------------------------------------------
// MCMC

double mala_log_proposal(const std::vector<double>& lambda, int j, double y, const LogGasSpec& spec, double h) {
  const auto g = loggas_gradient(lambda, spec);
  const double mean = lambda[static_cast<std::size_t>(j)] - h * g[static_cast<std::size_t>(j)];
  const double var = 2.0 * h / (spec.beta * static_cast<double>(lambda.size()));
  return -0.5 * (y - mean) * (y - mean) / var - 0.5 * std::log(2.0 * M_PI * var);
}

double metropolis_hastings_acceptance(double log_target_x, double log_target_y, double log_q_xy, double log_q_yx) {
  const double r = log_target_y - log_target_x + log_q_yx - log_q_xy;
  return r >= 0.0 ? 1.0 : std::exp(r);
}

namespace {

std::vector<double> initial_configuration(const LogGasSpec& spec) {
  const int n = spec.n;
  std::vector<double> x(static_cast<std::size_t>(n));
  try {
    const auto model = equilibrium_density(spec.potential);
    for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = model.density.quantile((j + 0.5) / n);
  } catch (const std::domain_error&) {
    for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = -2.0 + 4.0 * (j + 0.5) / n;
  }
  return x;
}

class Chain {
 public:
  Chain(const LogGasSpec& spec, std::uint64_t seed)
      : spec_(spec),
        x_(initial_configuration(spec)),
        noise_(seed, Domain::LogGasChain, 0),
        coins_(seed, Domain::LogGasChain, 1) {}

  // One sweep; returns the number of accepted moves.
  int sweep(double h) {
    const int n = spec_.n;
    const double nd = static_cast<double>(n);
    const double sd = std::sqrt(2.0 * h / (spec_.beta * nd));
    int accepted = 0;
    for (int j = 0; j < n; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const double xj = x_[uj];
      const double gx = partial(j, xj);
      const double mean_x = xj - h * gx;
      const double y = mean_x + sd * noise_.normal();
      const double u = coins_.uniform();
      ++proposals_;
      const bool ordered = (j == 0 || y > x_[uj - 1]) && (j == n - 1 || y < x_[uj + 1]);
      if (!ordered) {
        ++ordering_rejections_;
        continue;
      }
      // Energy difference and gradient at y in one pass.
      double log_ratio = 0.0, ratio = 1.0, repulsion_y = 0.0;
      int chunk = 0;
      for (int k = 0; k < n; ++k) {
        if (k == j) continue;
        const double xk = x_[static_cast<std::size_t>(k)];
        ratio *= (y - xk) / (xj - xk);
        repulsion_y += 1.0 / (y - xk);
        if (++chunk == 32) {
          log_ratio += std::log(ratio);
          ratio = 1.0;
          chunk = 0;
        }
      }
      log_ratio += std::log(ratio);
      const double dh = 0.5 * (spec_.potential.value(y) - spec_.potential.value(xj)) - log_ratio / nd;
      const double gy = 0.5 * spec_.potential.derivative(y) - repulsion_y / nd;
      const double mean_y = y - h * gy;
      const double log_q_xy = -0.5 * (y - mean_x) * (y - mean_x) / (sd * sd);
      const double log_q_yx = -0.5 * (xj - mean_y) * (xj - mean_y) / (sd * sd);
      const double a = metropolis_hastings_acceptance(0.0, -spec_.beta * nd * dh, log_q_xy, log_q_yx);
      if (u < a) {
        x_[uj] = y;
        ++accepted;
      }
    }
    return accepted;
  }

  const std::vector<double>& state() const { return x_; }
  long proposals() const { return proposals_; }
  long ordering_rejections() const { return ordering_rejections_; }

 private:
  double partial(int j, double xj) const {
    double repulsion = 0.0;
    for (int k = 0; k < spec_.n; ++k)
      if (k != j) repulsion += 1.0 / (xj - x_[static_cast<std::size_t>(k)]);
    return 0.5 * spec_.potential.derivative(xj) - repulsion / spec_.n;
  }

  const LogGasSpec& spec_;
  std::vector<double> x_;
  CounterStream noise_;
  CounterStream coins_;
  long proposals_ = 0;
  long ordering_rejections_ = 0;
};

}  // namespace

LogGasChain sample_loggas(const LogGasSpec& spec, std::uint64_t seed, const SamplerOptions& options) {
  spec.validate();
  if (options.burn_in < 0 || options.samples < 1 || options.thin < 1)
    throw ConfigError("sample_loggas: burn_in >= 0, samples >= 1 and thin >= 1 required");
  if (options.step_size < 0.0) throw ConfigError("sample_loggas: step size must be positive");

  const bool tune = options.step_size == 0.0;
  double h = tune ? 1.0 / static_cast<double>(spec.n) : options.step_size;
  Chain chain(spec, seed);

  constexpr int kTuneWindow = 50;
  int window_accepted = 0, window_sweeps = 0;
  for (int s = 0; s < options.burn_in; ++s) {
    window_accepted += chain.sweep(h);
    if (tune && ++window_sweeps == kTuneWindow) {
      const double rate = static_cast<double>(window_accepted) / (kTuneWindow * spec.n);
      h *= std::exp(2.0 * (rate - options.target_acceptance));
      window_accepted = 0;
      window_sweeps = 0;
    }
  }

  const std::string tag = digest(spec);
  LogGasChain out;
  const long proposals_before = chain.proposals();
  long accepted = 0;
  std::vector<double> second_moment;
  for (int m = 0; m < options.samples; ++m) {
    for (int s = 0; s < options.thin; ++s) accepted += chain.sweep(h);
    out.samples.push_back(SpectrumSample{chain.state(), tag, seed});
    double m2 = 0.0;
    for (double x : chain.state()) m2 += x * x;
    second_moment.push_back(m2 / spec.n);
  }

  auto& d = out.diagnostics;
  d.proposals = chain.proposals() - proposals_before;
  d.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(d.proposals);
  d.step_size = h;
  d.ordering_rejections = chain.ordering_rejections();
  if (second_moment.size() > 2) {
    double mean = 0.0;
    for (double v : second_moment) mean += v;
    mean /= static_cast<double>(second_moment.size());
    double c0 = 0.0, c1 = 0.0;
    for (std::size_t i = 0; i < second_moment.size(); ++i) {
      c0 += (second_moment[i] - mean) * (second_moment[i] - mean);
      if (i > 0) c1 += (second_moment[i] - mean) * (second_moment[i - 1] - mean);
    }
    d.lag1_autocorrelation = c0 > 0.0 ? c1 / c0 : 0.0;
  }
  if (d.acceptance_rate < 0.1 || d.acceptance_rate > 0.95) {
    std::ostringstream msg;
    msg << "log-gas chain acceptance rate " << d.acceptance_rate << " outside [0.1, 0.95] (h = " << h << ")";
    throw DiagnosticsError(msg.str());
  }
  return out;
}

std::string to_record(const ChainDiagnostics& d) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "acceptance_rate = " << d.acceptance_rate << "\n"
     << "step_size = " << d.step_size << "\n"
     << "lag1_autocorrelation = " << d.lag1_autocorrelation << "\n"
     << "proposals = " << d.proposals << "\n"
     << "ordering_rejections = " << d.ordering_rejections << "\n";
  return os.str();
}

}  // namespace rmtlab
