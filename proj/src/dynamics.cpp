#include "rmtlab/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "rmtlab/errors.hpp"

namespace rmtlab {

HermitianMatrix ou_matrix_step(const HermitianMatrix& h, double dt, std::uint64_t noise_seed, std::uint64_t step) {
  if (!(dt > 0.0)) throw ConfigError("ou_matrix_step needs dt > 0");
  const int n = dimension(h);
  const double sd = std::sqrt(dt / n);
  const double decay = 1.0 - 0.5 * dt;
  auto stream = [&](int i, int j) {
    return CounterStream(derive_seed(noise_seed, step), Domain::OuNoise,
                         (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j));
  };
  if (std::holds_alternative<Eigen::MatrixXd>(h)) {
    const auto& m = std::get<Eigen::MatrixXd>(h);
    Eigen::MatrixXd out(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i <= j; ++i) {
        auto rng = stream(i, j);
        double x = sd * rng.normal();
        if (i == j && n > 1) x *= M_SQRT2;
        out(i, j) = out(j, i) = decay * m(i, j) + x;
      }
    }
    return out;
  }
  const auto& m = std::get<Eigen::MatrixXcd>(h);
  Eigen::MatrixXcd out(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      auto rng = stream(i, j);
      if (i == j) {
        out(i, i) = decay * std::real(m(i, i)) + sd * rng.normal();
      } else {
        const double re = rng.normal();
        const double im = rng.normal();
        const std::complex<double> z = decay * m(i, j) + sd * M_SQRT1_2 * std::complex<double>(re, im);
        out(i, j) = z;
        out(j, i) = std::conj(z);
      }
    }
  }
  return out;
}

DtPolicy DtPolicy::resolved(int n) const {
  DtPolicy p = *this;
  if (p.initial == 0.0) p.initial = 1e-3 / n;
  if (p.cap == 0.0) p.cap = 5e-2 / n;
  if (!(p.initial > 0.0) || !(p.cap > 0.0) || !(p.growth >= 1.0)) throw ConfigError("invalid DBM time-step policy");
  p.initial = std::min(p.initial, p.cap);
  return p;
}

std::vector<double> dbm_drift(const std::vector<double>& lambda, const Potential& potential) {
  const std::size_t n = lambda.size();
  std::vector<double> drift(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const double r = 1.0 / (lambda[i] - lambda[k]);
      drift[i] += r;
      drift[k] -= r;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) drift[i] = drift[i] * inv_n - 0.5 * potential.derivative(lambda[i]);
  return drift;
}

namespace {

constexpr int kMaxRefinements = 20;
constexpr int kMaxDepth = 60;

std::vector<int> disorder(const std::vector<double>& x) {
  std::vector<int> bad;
  for (std::size_t k = 1; k < x.size(); ++k)
    if (!(x[k] > x[k - 1])) bad.push_back(static_cast<int>(k - 1));
  return bad;
}

// Euler step of every copy with the shared increment; refines all copies
// together through the Brownian bridge when any of them loses ordering.
class Stepper {
 public:
  Stepper(double beta, const Potential& potential, std::uint64_t bridge_seed, std::uint64_t bridge_id)
      : beta_(beta), potential_(potential), bridge_(bridge_seed, Domain::DbmBridge, bridge_id) {}

  // `failures` counts consecutive halvings without an accepted substep. Once
  // the first half is integrated the second starts a fresh count; the total
  // depth is capped separately.
  void advance(std::vector<std::vector<double>*>& copies, double dt, const std::vector<double>& dw, int failures,
               int depth = 0) {
    std::vector<std::vector<double>> proposals;
    proposals.reserve(copies.size());
    bool ordered = true;
    std::vector<int> bad;
    for (auto* x : copies) {
      proposals.push_back(euler(*x, dt, dw));
      auto d = disorder(proposals.back());
      if (!d.empty()) {
        ordered = false;
        bad = std::move(d);
      }
    }
    if (ordered) {
      for (std::size_t c = 0; c < copies.size(); ++c) *copies[c] = std::move(proposals[c]);
      return;
    }
    if (failures == kMaxRefinements || depth == kMaxDepth)
      throw StepFailure("DBM step failed to preserve ordering after " + std::to_string(failures) + " refinements",
                        bad);
    ++refinements;
    // W(dt/2) given W(dt) = dw: mean dw/2, variance dt/4.
    std::vector<double> first(dw.size()), second(dw.size());
    const double sd = 0.5 * std::sqrt(dt);
    for (std::size_t k = 0; k < dw.size(); ++k) {
      first[k] = 0.5 * dw[k] + sd * bridge_.normal();
      second[k] = dw[k] - first[k];
    }
    advance(copies, 0.5 * dt, first, failures + 1, depth + 1);
    advance(copies, 0.5 * dt, second, 1, depth + 1);
  }

  long refinements = 0;

 private:
  std::vector<double> euler(const std::vector<double>& x, double dt, const std::vector<double>& dw) const {
    const double noise = std::sqrt(2.0 / (beta_ * static_cast<double>(x.size())));
    auto out = dbm_drift(x, potential_);
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] + noise * dw[k] + out[k] * dt;
    return out;
  }

  double beta_;
  const Potential& potential_;
  CounterStream bridge_;
};

void check_initial(const std::vector<double>& x) {
  if (x.empty()) throw ConfigError("DBM needs at least one particle");
  if (!disorder(x).empty()) throw ConfigError("DBM initial condition must be strictly increasing");
}

std::vector<double> increments(std::uint64_t seed, long step, std::size_t n, double dt) {
  CounterStream rng(seed, Domain::DbmNoise, static_cast<std::uint64_t>(step));
  std::vector<double> dw(n);
  const double sd = std::sqrt(dt);
  for (auto& v : dw) v = sd * rng.normal();
  return dw;
}

// Shared driver for single and coupled runs.
template <typename Record>
long integrate(std::vector<std::vector<double>*> copies, double beta, double t_final, std::uint64_t seed,
               const DbmOptions& options, Record record, long& refinements) {
  if (!(beta > 0.0)) throw ConfigError("DBM beta must be positive");
  if (!(t_final > 0.0)) throw ConfigError("DBM t_final must be positive");
  const std::size_t n = copies.front()->size();
  const DtPolicy policy = options.dt.resolved(static_cast<int>(n));
  auto checkpoints = options.checkpoints.empty() ? geometric_checkpoints(t_final) : options.checkpoints;
  for (std::size_t k = 1; k < checkpoints.size(); ++k)
    if (!(checkpoints[k] > checkpoints[k - 1])) throw ConfigError("DBM checkpoints must be increasing");
  if (checkpoints.front() < 0.0 || checkpoints.back() > t_final * (1.0 + 1e-12))
    throw ConfigError("DBM checkpoints must lie in [0, t_final]");

  double t = 0.0;
  double dt = policy.initial;
  long step = 0;
  std::size_t next = 0;
  if (checkpoints[next] == 0.0) record(0.0), ++next;
  while (next < checkpoints.size()) {
    const double target = checkpoints[next];
    double h = std::min(dt, target - t);
    bool lands = false;
    if (target - t <= dt * (1.0 + 1e-9)) {
      h = target - t;
      lands = true;
    }
    const auto dw = increments(seed, step, n, h);
    Stepper stepper(beta, options.potential, seed, static_cast<std::uint64_t>(step));
    stepper.advance(copies, h, dw, 0);
    refinements += stepper.refinements;
    ++step;
    t = lands ? target : t + h;
    dt = std::min(policy.cap, dt * policy.growth);
    if (lands) record(t), ++next;
  }
  return step;
}

}  // namespace

DbmState dbm_step(const DbmState& state, double dt, const std::vector<double>& increments, std::uint64_t bridge_seed,
                  std::uint64_t bridge_id) {
  if (!(dt > 0.0)) throw ConfigError("dbm_step needs dt > 0");
  if (increments.size() != state.positions.size()) throw ConfigError("dbm_step: noise length mismatch");
  check_initial(state.positions);
  DbmState out = state;
  std::vector<std::vector<double>*> copies{&out.positions};
  Stepper stepper(state.beta, state.potential, bridge_seed, bridge_id);
  stepper.advance(copies, dt, increments, 0);
  out.time += dt;
  return out;
}

std::vector<double> geometric_checkpoints(double t_final, int levels) {
  if (!(t_final > 0.0) || levels < 1) throw ConfigError("geometric_checkpoints needs t_final > 0 and levels >= 1");
  std::vector<double> t{0.0};
  for (int k = levels - 1; k >= 0; --k) t.push_back(std::ldexp(t_final, -k));
  return t;
}

DbmTrajectory run_dbm(const std::vector<double>& initial, double beta, double t_final, std::uint64_t seed,
                      const DbmOptions& options) {
  check_initial(initial);
  DbmTrajectory out;
  std::vector<double> x = initial;
  auto record = [&](double t) { out.checkpoints.push_back(DbmState{t, x, beta, options.potential}); };
  out.steps = integrate({&x}, beta, t_final, seed, options, record, out.refinements);
  return out;
}

CoupledDbmTrajectory run_coupled_dbm(const std::vector<double>& initial_a, const std::vector<double>& initial_b,
                                     double beta, double t_final, std::uint64_t seed, const DbmOptions& options) {
  check_initial(initial_a);
  check_initial(initial_b);
  if (initial_a.size() != initial_b.size()) throw ConfigError("coupled DBM copies must have the same N");
  CoupledDbmTrajectory out;
  std::vector<double> a = initial_a, b = initial_b;
  auto record = [&](double t) {
    out.a.push_back(DbmState{t, a, beta, options.potential});
    out.b.push_back(DbmState{t, b, beta, options.potential});
    std::vector<double> d(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
    out.differences.push_back(std::move(d));
  };
  out.steps = integrate({&a, &b}, beta, t_final, seed, options, record, out.refinements);
  return out;
}

std::vector<double> picket_fence(int n, double lo, double hi) {
  if (n < 1 || !(hi > lo)) throw ConfigError("picket_fence needs N >= 1 and hi > lo");
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = lo + (hi - lo) * (j + 0.5) / n;
  return x;
}

}  // namespace rmtlab
