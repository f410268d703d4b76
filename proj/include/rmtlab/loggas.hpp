#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmtlab/spectral.hpp"

namespace rmtlab {

// Beta-ensembles at the eigenvalue level:
//   mu(d lambda) = C exp(-beta N H(lambda)),
//   H(lambda) = sum_k V(lambda_k)/2 - (1/N) sum_{i<j} log(lambda_j - lambda_i).

/// Even polynomial V(x) = sum_k c_k x^k of degree 2..8 with positive leading
/// coefficient. Odd coefficients must vanish.
class Potential {
 public:
  /// Coefficients c_0, c_1, ..., c_d by ascending power.
  explicit Potential(std::vector<double> coefficients);

  static Potential quadratic() { return Potential({0.0, 0.0, 0.5}); }
  static Potential quartic() { return Potential({0.0, 0.0, 0.0, 0.0, 0.25}); }

  const std::vector<double>& coefficients() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  std::string describe() const;

 private:
  std::vector<double> c_;
};

struct LogGasSpec {
  double beta = 1.0;
  Potential potential = Potential::quadratic();
  int n = 2;

  /// Throws ConfigError on beta <= 0 or n < 1.
  void validate() const;
};

/// Throws SingularConfiguration unless lambda is strictly increasing.
double loggas_energy(const std::vector<double>& lambda, const LogGasSpec& spec);
std::vector<double> loggas_gradient(const std::vector<double>& lambda, const LogGasSpec& spec);

/// Equilibrium measure of an even potential on a single interval [-B, B].
/// With t = B s and (1/2) V'(B s) = sum_k a_k T_k(s),
///   rho(B s) = (1/pi) sqrt(1 - s^2) sum_k a_k U_{k-1}(s),   a_1 B = 2.
struct EquilibriumModel {
  DensityModel density;
  double edge = 0.0;  // B
  std::vector<double> chebyshev;  // a_k, index k
  double s_lower = 0.0;  // lim rho(t) / sqrt(t + B)
  double s_upper = 0.0;  // lim rho(t) / sqrt(B - t)

  double lower() const { return -edge; }
  double upper() const { return edge; }
};

/// Throws UnsupportedPotential if the single-interval ansatz yields a density
/// that is not strictly positive inside (a multi-interval potential), and
/// NumericalError if the endpoint equation has no root.
EquilibriumModel equilibrium_density(const Potential& potential);

/// Largest |PV int rho(s)/(t - s) ds - V'(t)/2| over the probe points, with the
/// principal value computed by direct quadrature (singularity subtraction).
double equilibrium_residual(const EquilibriumModel& model, const Potential& potential,
                            const std::vector<double>& probes);

/// gamma_{j,V} for j = 1..N.
std::vector<double> loggas_quantiles(const EquilibriumModel& model, int n);

// ---------------------------------------------------------------------------
// MCMC

/// log of the single-particle MALA proposal density for moving particle j
/// from lambda_j to y:
///   y ~ Normal(lambda_j - h dH/dlambda_j, 2h / (beta N)).
double mala_log_proposal(const std::vector<double>& lambda, int j, double y, const LogGasSpec& spec, double h);

/// min(1, exp(log_target_y - log_target_x + log_q_yx - log_q_xy)).
double metropolis_hastings_acceptance(double log_target_x, double log_target_y, double log_q_xy, double log_q_yx);

struct SamplerOptions {
  int burn_in = 10000;  // sweeps before recording
  int samples = 100;    // recorded configurations
  int thin = 10;        // sweeps between recorded configurations
  double step_size = 0.0;  // h; 0 selects auto-tuning during burn-in
  double target_acceptance = 0.6;
};

struct ChainDiagnostics {
  double acceptance_rate = 0.0;  // post burn-in
  double step_size = 0.0;
  double lag1_autocorrelation = 0.0;  // of the recorded second moment
  long proposals = 0;
  long ordering_rejections = 0;
};

struct LogGasChain {
  std::vector<SpectrumSample> samples;
  ChainDiagnostics diagnostics;
};

/// Single-particle Metropolis-adjusted Langevin sweeps. A sweep proposes a
/// move for every particle in order; proposals that would break the strict
/// ordering are rejected in place. The chain starts at the equilibrium
/// quantiles (or an equispaced configuration when no equilibrium model is
/// available) and, if step_size == 0, tunes h during burn-in toward the target
/// acceptance and then freezes it. Throws DiagnosticsError when the final
/// acceptance rate is outside [0.1, 0.95].
LogGasChain sample_loggas(const LogGasSpec& spec, std::uint64_t seed, const SamplerOptions& options = {});

/// Structured text record of the diagnostics.
std::string to_record(const ChainDiagnostics& d);

std::string digest(const LogGasSpec& spec);

}  // namespace rmtlab
