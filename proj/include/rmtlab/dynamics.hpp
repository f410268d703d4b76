#pragma once

#include <cstdint>
#include <vector>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/loggas.hpp"

namespace rmtlab {

/// One Euler-Maruyama step of dH = N^{-1/2} dB - H dt / 2. The increment
/// N^{-1/2} dB is sqrt(dt) times a GOE/GUE-normalized matrix drawn from the
/// streams keyed by (noise_seed, step), so the flow leaves that Gaussian law
/// invariant. For N = 1 the increment is a standard scalar Brownian step.
HermitianMatrix ou_matrix_step(const HermitianMatrix& h, double dt, std::uint64_t noise_seed,
                               std::uint64_t step = 0);

struct DbmState {
  double time = 0.0;
  std::vector<double> positions;  // strictly increasing
  double beta = 1.0;
  Potential potential = Potential::quadratic();
};

/// Time-step schedule: dt_k = min(cap, initial * growth^k).
struct DtPolicy {
  double initial = 0.0;  // 0 selects 1e-3 / N
  double cap = 0.0;      // 0 selects 5e-2 / N
  double growth = 1.01;

  static DtPolicy constant(double dt) { return DtPolicy{dt, dt, 1.0}; }
  DtPolicy resolved(int n) const;
};

/// Drift of particle j: -V'(lambda_j)/2 + (1/N) sum_{k != j} 1/(lambda_j - lambda_k).
std::vector<double> dbm_drift(const std::vector<double>& lambda, const Potential& potential);

/// One DBM step with Brownian increments `increments` (variance dt each):
///   lambda_j += sqrt(2/(beta N)) dB_j + drift_j dt.
/// If the result is not strictly ordered the step is split in two halves,
/// with the midpoint of the Brownian path drawn from the bridge stream keyed
/// by (bridge_seed, bridge_id); splitting recurses up to 20 times before a
/// StepFailure naming the colliding indices is thrown.
DbmState dbm_step(const DbmState& state, double dt, const std::vector<double>& increments,
                  std::uint64_t bridge_seed = 0, std::uint64_t bridge_id = 0);

struct DbmTrajectory {
  std::vector<DbmState> checkpoints;
  long steps = 0;
  long refinements = 0;  // bridge splits taken
};

/// `t_final * 2^-k` for k = levels-1..0, preceded by 0.
std::vector<double> geometric_checkpoints(double t_final, int levels = 10);

struct DbmOptions {
  DtPolicy dt;
  std::vector<double> checkpoints;  // empty selects geometric_checkpoints(t_final)
  Potential potential = Potential::quadratic();
};

/// Integrates from t = 0 to t_final. The noise of step k comes from the stream
/// (seed, k), so a trajectory is a pure function of its inputs.
DbmTrajectory run_dbm(const std::vector<double>& initial, double beta, double t_final, std::uint64_t seed,
                      const DbmOptions& options = {});

struct CoupledDbmTrajectory {
  std::vector<DbmState> a;
  std::vector<DbmState> b;
  std::vector<std::vector<double>> differences;  // a - b per checkpoint
  long steps = 0;
  long refinements = 0;
};

/// Both copies see identical Brownian increments and identical step
/// refinements.
CoupledDbmTrajectory run_coupled_dbm(const std::vector<double>& initial_a, const std::vector<double>& initial_b,
                                     double beta, double t_final, std::uint64_t seed, const DbmOptions& options = {});

/// Picket-fence start: N equally spaced points on [lo, hi] at the cell centers.
std::vector<double> picket_fence(int n, double lo = -2.0, double hi = 2.0);

}  // namespace rmtlab
