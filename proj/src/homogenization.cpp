#include "rmtlab/homogenization.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/trigamma.hpp>

#include "rmtlab/errors.hpp"
#include "rmtlab/spectral.hpp"

namespace rmtlab {

HessianCoefficients hessian_coefficients(const std::vector<double>& x, double beta, const Potential& potential,
                                         const std::vector<double>& boundary, double curvature_scale) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 1) throw ConfigError("hessian_coefficients needs a nonempty window");
  HessianCoefficients c{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
      if (d == 0.0) throw SingularConfiguration("coincident points in the Hessian window");
      c.b(i, j) = c.b(j, i) = beta / (d * d);
    }
    double w = 0.5 * beta * potential.second_derivative(x[static_cast<std::size_t>(i)]) * curvature_scale;
    for (double p : boundary) {
      const double d = x[static_cast<std::size_t>(i)] - p;
      if (d == 0.0) throw SingularConfiguration("window point coincides with a frozen exterior point");
      w += beta / (d * d);
    }
    c.w[i] = w;
  }
  return c;
}

Eigen::MatrixXd regularize_coefficients(const Eigen::MatrixXd& b, double beta, double delta) {
  if (!(delta > 0.0)) throw ConfigError("regularization scale delta must be positive");
  return b.cwiseMin(beta / (delta * delta));
}

Eigen::MatrixXd generator(const HessianCoefficients& c) {
  Eigen::MatrixXd a = -c.b;
  a.diagonal() = c.b.rowwise().sum() + c.w;
  return a;
}

ParabolicProblem frozen_unit_problem(int half_width, double beta, bool frozen_exterior) {
  if (half_width < 2) throw ConfigError("parabolic window needs K >= 2");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  const int n = 2 * half_width + 1;
  ParabolicProblem p;
  p.center = half_width;
  p.half_width = half_width;
  p.beta = beta;
  p.coefficients.b = Eigen::MatrixXd::Zero(n, n);
  p.coefficients.w = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) p.coefficients.b(i, j) = beta / static_cast<double>((i - j) * (i - j));
  // sum_{m > K - r} 1/m^2 = trigamma(K + 1 - r) on each side of offset r.
  if (frozen_exterior)
    for (int i = 0; i < n; ++i) {
      const int r = i - half_width;
      p.coefficients.w(i) = beta * (boost::math::trigamma(static_cast<double>(half_width + 1 - r)) +
                                    boost::math::trigamma(static_cast<double>(half_width + 1 + r)));
    }
  return p;
}

ParabolicProblem window_problem(const std::vector<double>& x, int center, int half_width, double beta,
                                const Potential& potential, double curvature_scale, double delta_fraction) {
  const int n = static_cast<int>(x.size());
  if (half_width < 2) throw ConfigError("parabolic window needs K >= 2");
  if (center - half_width < 0 || center + half_width >= n) throw ConfigError("parabolic window exceeds the configuration");
  for (int k = 1; k < n; ++k)
    if (!(x[static_cast<std::size_t>(k)] > x[static_cast<std::size_t>(k - 1)]))
      throw SingularConfiguration("configuration not strictly increasing");
  const auto first = x.begin() + (center - half_width);
  const auto last = x.begin() + (center + half_width + 1);
  const std::vector<double> window(first, last);
  const double spacing = (window.back() - window.front()) / (window.size() - 1);
  const double delta = delta_fraction * spacing;

  std::vector<double> boundary(x.begin(), first);
  boundary.insert(boundary.end(), last, x.end());

  ParabolicProblem p;
  p.center = half_width;
  p.half_width = half_width;
  p.beta = beta;
  p.delta = delta;
  p.coefficients = hessian_coefficients(window, beta, potential, {}, curvature_scale);
  p.coefficients.b = regularize_coefficients(p.coefficients.b, beta, delta);
  for (std::size_t i = 0; i < window.size(); ++i) {
    for (double q : boundary) {
      const double d = std::max(std::abs(window[i] - q), delta);
      p.coefficients.w[static_cast<Eigen::Index>(i)] += beta / (d * d);
    }
  }
  return p;
}

std::size_t FundamentalSolution::index_of(double t) const {
  for (std::size_t k = 0; k < times.size(); ++k)
    if (std::abs(times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return k;
  throw ConfigError("time " + std::to_string(t) + " is not on the solved grid");
}

Eigen::MatrixXd heat_semigroup(const Eigen::MatrixXd& a, double t) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw ConfigError("heat_semigroup needs a square generator");
  if (t < 0.0) throw ConfigError("heat_semigroup needs t >= 0");
  const double q = a.diagonal().maxCoeff();
  if (t == 0.0 || q <= 0.0) return Eigen::MatrixXd::Identity(n, n);

  // exp(-tA) = exp(-qt) exp(qt P) with P = I - A/q entrywise nonnegative.
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) - a / q;
  int squarings = 0;
  double tau = q * t;
  while (tau > 0.5) {
    tau *= 0.5;
    ++squarings;
  }
  constexpr int kTerms = 16;  // tau^17 / 17! < 1e-19 for tau <= 0.5
  Eigen::MatrixXd e = Eigen::MatrixXd::Identity(n, n);
  for (int k = kTerms; k >= 1; --k) {
    Eigen::MatrixXd next = (tau / k) * (p * e);
    next.diagonal().array() += 1.0;
    e.swap(next);
  }
  e *= std::exp(-tau);
  for (int s = 0; s < squarings; ++s) e = (e * e).eval();
  return e;
}

namespace {

void check_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty() || !(t_grid.front() >= 0.0)) throw ConfigError("time grid must be nonnegative");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] > t_grid[k - 1])) throw ConfigError("time grid must be increasing");
}

Eigen::MatrixXd symmetric_exponential(const Eigen::MatrixXd& a, double h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("generator eigendecomposition failed");
  const Eigen::VectorXd decay = (-h * es.eigenvalues().array()).exp();
  return es.eigenvectors() * decay.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

FundamentalSolution fundamental_solution(const ParabolicProblem& problem, const std::vector<double>& t_grid) {
  check_grid(t_grid);
  if (!problem.coefficients.b.allFinite() || !problem.coefficients.w.allFinite())
    throw ConfigError("parabolic coefficients must be finite");
  const Eigen::MatrixXd a = generator(problem.coefficients);
  FundamentalSolution sol;
  sol.times = t_grid;
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  double prev = 0.0;
  for (double t : t_grid) {
    if (t > prev) u = (u * heat_semigroup(a, t - prev)).eval();
    prev = t;
    sol.u.push_back(u);
  }
  return sol;
}

FundamentalSolution fundamental_solution(const std::function<Eigen::MatrixXd(double)>& a_of_s,
                                         const std::vector<double>& t_grid, const StepControl& control) {
  check_grid(t_grid);
  const Eigen::MatrixXd a0 = a_of_s(0.0);
  FundamentalSolution sol;
  sol.times = t_grid;
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(a0.rows(), a0.cols());

  double s = 0.0;
  double h = control.initial_step;
  for (const double target : t_grid) {
    while (s < target) {
      const bool last = s + h >= target;
      const double step = last ? target - s : h;
      const Eigen::MatrixXd full = symmetric_exponential(a_of_s(s + 0.5 * step), step);
      const Eigen::MatrixXd half = symmetric_exponential(a_of_s(s + 0.25 * step), 0.5 * step) *
                                   symmetric_exponential(a_of_s(s + 0.75 * step), 0.5 * step);
      const double err = (full - half).cwiseAbs().maxCoeff() / 3.0;
      const double factor = err > 0.0 ? std::clamp(0.9 * std::cbrt(control.tolerance / err), 0.2, 5.0) : 5.0;
      if (err <= control.tolerance) {
        u = (u * half).eval();
        s = last ? target : s + step;
        h = std::max(h, step) * factor;
      } else {
        h = step * factor;
        if (h < control.min_step) throw NumericalError("fundamental solution step size underflow");
      }
    }
    sol.u.push_back(u);
  }
  return sol;
}

double kernel_prediction(int i, int j, double t) {
  if (!(t > 0.0)) throw ConfigError("kernel_prediction needs t > 0");
  const double d = static_cast<double>(i - j);
  return t / (M_PI * (t * t + d * d));
}

double poisson_time(double beta, double s) { return M_PI * beta * s; }

double holder_oscillation(const Eigen::MatrixXd& u, int center, double sigma, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0 / 3.0)) throw ConfigError("holder alpha must lie in [0, 1/3]");
  if (!(sigma > 0.0)) throw ConfigError("holder sigma must be positive");
  const int radius = static_cast<int>(std::floor(std::pow(sigma, 1.0 - alpha)));
  const int n = static_cast<int>(u.cols());
  if (center - radius < 0 || center + radius >= n) throw ConfigError("holder window exceeds the index interval");
  double osc = 0.0;
  for (int j = center - radius; j <= center + radius; ++j) {
    const int budget = radius - std::abs(j - center);
    for (int jp = std::max(center - budget, j + 1); jp <= center + budget; ++jp)
      osc = std::max(osc, (u.col(j) - u.col(jp)).cwiseAbs().maxCoeff());
  }
  return osc;
}

HolderReport holder_diagnostic(const FundamentalSolution& solution, int center, const std::vector<double>& sigmas,
                               double alpha) {
  if (sigmas.empty()) throw ConfigError("holder_diagnostic needs at least one sigma");
  HolderReport r;
  for (double sigma : sigmas) {
    const auto& u = solution.u[solution.index_of(sigma)];
    const double osc = holder_oscillation(u, center, sigma, alpha);
    r.points.push_back(HolderPoint{sigma, osc, osc * sigma});
  }
  r.strictly_decreasing = true;
  for (std::size_t k = 1; k < r.points.size(); ++k)
    if (!(r.points[k].osc_sigma < r.points[k - 1].osc_sigma)) r.strictly_decreasing = false;
  if (r.points.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (const auto& p : r.points) {
      mx += std::log(p.sigma);
      my += std::log(p.osc_sigma);
    }
    mx /= static_cast<double>(r.points.size());
    my /= static_cast<double>(r.points.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : r.points) {
      sxx += (std::log(p.sigma) - mx) * (std::log(p.sigma) - mx);
      sxy += (std::log(p.sigma) - mx) * (std::log(p.osc_sigma) - my);
    }
    r.decay_exponent = sxy / sxx;
  }
  return r;
}

double averaged_coefficient_bound(const CoefficientPath& path, int center, double sigma, int half_width) {
  if (path.times.size() != path.positions.size()) throw ConfigError("coefficient path: times/positions mismatch");
  if (path.times.empty() || path.times.front() != 0.0) throw ConfigError("coefficient path must start at s = 0");
  const auto covered = std::count_if(path.times.begin(), path.times.end(), [&](double s) { return s <= sigma; });
  if (covered < 8) throw ConfigError("averaged_coefficient_bound needs at least 8 checkpoints in [0, sigma]");
  const double cap = path.beta / (path.delta * path.delta);

  std::vector<int> levels;
  for (int m = 1; m <= half_width; m *= 2) levels.push_back(m);

  double sup = 0.0;
  for (int m : levels) {
    auto mean_coefficient = [&](std::size_t k) {
      const auto& x = path.positions[k];
      if (center - m < 0 || center + m >= static_cast<int>(x.size()))
        throw ConfigError("averaged_coefficient_bound: level exceeds the window");
      double sum = 0.0;
      for (int i = center - m; i < center + m; ++i) {
        const double gap = x[static_cast<std::size_t>(i + 1)] - x[static_cast<std::size_t>(i)];
        sum += std::min(path.beta / (gap * gap), cap);
      }
      return sum / (2.0 * m);
    };
    double integral = 0.0;
    double previous = mean_coefficient(0);
    for (std::size_t k = 1; k < path.times.size() && path.times[k] <= sigma; ++k) {
      const double current = mean_coefficient(k);
      integral += 0.5 * (previous + current) * (path.times[k] - path.times[k - 1]);
      previous = current;
      sup = std::max(sup, integral / path.times[k]);
    }
  }
  return sup;
}

std::vector<double> coupled_kernel_prediction(const std::vector<double>& initial_difference, double t,
                                              const std::vector<int>& labels) {
  const int n = static_cast<int>(initial_difference.size());
  const auto model = semicircle_model();
  std::vector<double> out;
  for (int i : labels) {
    const double rho = model.pdf(model.quantile((i - 0.5) / n));
    const double tp = M_PI * n * rho * rho * t;
    double sum = 0.0, mass = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double k = kernel_prediction(i, j, tp);
      sum += k * initial_difference[static_cast<std::size_t>(j - 1)];
      mass += k;
    }
    out.push_back(std::exp(-0.5 * t) * sum / mass);
  }
  return out;
}

double smallest_hessian_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Hessian eigensolve failed");
  return es.eigenvalues().minCoeff();
}

}  // namespace rmtlab
