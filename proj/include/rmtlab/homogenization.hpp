#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rmtlab/loggas.hpp"

namespace rmtlab {

// Linearized DBM on an index window I = [Z - K, Z + K]:
//   d/ds U(s) = -U(s) A(s),  U(0) = Id,  A = L_B + diag(W),
// where (L_B u)_i = sum_j B_ij (u_i - u_j) and B_ij = beta / (x_i - x_j)^2.

struct HessianCoefficients {
  Eigen::MatrixXd b;  // zero diagonal
  Eigen::VectorXd w;
};

/// B_ij = beta/(x_i - x_j)^2 on the window and
/// W_i = (beta/2) V''(x_i) * curvature_scale + sum_b beta/(x_i - b)^2 over the
/// frozen exterior points. Pass curvature_scale = 0 to drop the confinement.
/// Throws SingularConfiguration on coincident points.
HessianCoefficients hessian_coefficients(const std::vector<double>& x, double beta, const Potential& potential,
                                         const std::vector<double>& boundary, double curvature_scale = 1.0);

/// min(B_ij, beta / delta^2) entrywise.
Eigen::MatrixXd regularize_coefficients(const Eigen::MatrixXd& b, double beta, double delta);

/// A = L_B + diag(W).
Eigen::MatrixXd generator(const HessianCoefficients& c);

struct ParabolicProblem {
  int center = 0;  // Z, as a row index into the window
  int half_width = 0;  // K
  double beta = 1.0;
  double delta = 1e-4;
  HessianCoefficients coefficients;  // regularized

  int size() const { return 2 * half_width + 1; }
};

/// Window of 2K+1 unit-spaced points x_i = i, B_ij = beta/(i-j)^2. W = 0, or
/// with `frozen_exterior` the interaction with the rest of the integer
/// lattice held fixed: W_i = beta sum_{|b| > K} 1/(i - b)^2.
ParabolicProblem frozen_unit_problem(int half_width, double beta, bool frozen_exterior = false);

/// Window of configuration x (already in unit-spacing coordinates) centered at
/// label `center` (0-based) with half width K; particles outside the window
/// act as a frozen exterior through W. Gaps are clamped at delta times the
/// mean spacing of the window.
ParabolicProblem window_problem(const std::vector<double>& x, int center, int half_width, double beta,
                                const Potential& potential, double curvature_scale, double delta_fraction = 1e-4);

struct FundamentalSolution {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> u;

  /// Index of `t` in `times` (relative tolerance 1e-12); throws ConfigError.
  std::size_t index_of(double t) const;
};

/// exp(-t A) for symmetric A with nonpositive off-diagonal entries, by the
/// uniformized Taylor series with scaling and squaring. Entries stay
/// nonnegative and row sums stay at most one.
Eigen::MatrixXd heat_semigroup(const Eigen::MatrixXd& a, double t);

/// Frozen coefficients: U(t_k) = U(t_{k-1}) exp(-(t_k - t_{k-1}) A).
FundamentalSolution fundamental_solution(const ParabolicProblem& problem, const std::vector<double>& t_grid);

struct StepControl {
  double tolerance = 1e-8;  // max-norm local error per step
  double initial_step = 0.1;
  double min_step = 1e-10;
};

/// Time-dependent coefficients: exponential midpoint steps
/// U <- U exp(-h A(s + h/2)) with Richardson step control (one full step
/// against two half steps). Throws NumericalError on step underflow.
FundamentalSolution fundamental_solution(const std::function<Eigen::MatrixXd(double)>& a_of_s,
                                         const std::vector<double>& t_grid, const StepControl& control = {});

/// (1/pi) t / (t^2 + (i - j)^2).
double kernel_prediction(int i, int j, double t);

/// For B_ij = beta/(i - j)^2 the generator has symbol beta (pi |p| - p^2/2), so
/// U(s) approaches the Poisson kernel at time pi beta s.
double poisson_time(double beta, double s);

struct HolderPoint {
  double sigma = 0.0;
  double osc = 0.0;
  double osc_sigma = 0.0;
};

struct HolderReport {
  std::vector<HolderPoint> points;
  double decay_exponent = 0.0;  // log-log slope of osc * sigma in sigma
  bool strictly_decreasing = false;
};

/// max_i max_{|j-Z| + |j'-Z| <= sigma^{1-alpha}} |U_ij(sigma) - U_ij'(sigma)|.
double holder_oscillation(const Eigen::MatrixXd& u, int center, double sigma, double alpha);

HolderReport holder_diagnostic(const FundamentalSolution& solution, int center, const std::vector<double>& sigmas,
                               double alpha);

/// Coefficient path: window configurations at increasing times.
struct CoefficientPath {
  std::vector<double> times;
  std::vector<std::vector<double>> positions;  // unit-spacing coordinates
  double beta = 1.0;
  double delta = 1e-4;
};

/// sup over checkpoints 0 < s <= sigma and dyadic M <= K of
///   (1/s) int_0^s mean_{Z-M <= i < Z+M} B^reg_{i,i+1}(s') ds'
/// (trapezoid rule on the checkpoints). Needs at least 8 checkpoints in
/// [0, sigma].
double averaged_coefficient_bound(const CoefficientPath& path, int center, double sigma, int half_width);

/// Prediction for the difference of two coupled DBM copies: the index-space
/// Poisson kernel at time pi N rho(gamma_i)^2 t, normalized over the N labels,
/// applied to the initial difference and damped by exp(-t/2). Semicircle
/// density; `labels` are 1-based.
std::vector<double> coupled_kernel_prediction(const std::vector<double>& initial_difference, double t,
                                              const std::vector<int>& labels);

/// Smallest eigenvalue of A.
double smallest_hessian_eigenvalue(const Eigen::MatrixXd& a);

}  // namespace rmtlab
