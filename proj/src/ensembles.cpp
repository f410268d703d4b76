#include "rmtlab/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "rmtlab/errors.hpp"

namespace rmtlab {

int beta_of(Symmetry s) { return s == Symmetry::RealSymmetric ? 1 : 2; }

std::string to_string(Symmetry s) {
  return s == Symmetry::RealSymmetric ? "real-symmetric" : "complex-hermitian";
}

Symmetry symmetry_from_string(std::string_view name) {
  if (name == "real-symmetric" || name == "goe" || name == "real") return Symmetry::RealSymmetric;
  if (name == "complex-hermitian" || name == "gue" || name == "complex") return Symmetry::ComplexHermitian;
  throw ConfigError("unknown symmetry class '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// EntryLaw

EntryLaw EntryLaw::discrete(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ConfigError("discrete entry law needs at least one atom");
  double total = 0.0, mean = 0.0, second = 0.0;
  for (const auto& a : atoms) {
    if (!(a.probability >= 0.0)) throw ConfigError("discrete entry law has a negative probability");
    total += a.probability;
    mean += a.probability * a.value;
    second += a.probability * a.value * a.value;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("discrete entry law probabilities do not sum to 1");
  if (std::abs(mean) > 1e-12) throw ConfigError("discrete entry law is not centered");
  if (std::abs(second - mean * mean - 1.0) > 1e-12) throw ConfigError("discrete entry law variance is not 1");
  EntryLaw law(Kind::Discrete, std::move(atoms));
  law.cumulative_.reserve(law.atoms_.size());
  double acc = 0.0;
  for (const auto& a : law.atoms_) law.cumulative_.push_back(acc += a.probability);
  law.cumulative_.back() = 1.0;
  return law;
}

std::string EntryLaw::name() const {
  switch (kind_) {
    case Kind::Gaussian: return "gaussian";
    case Kind::Rademacher: return "rademacher";
    case Kind::UniformCentered: return "uniform-centered";
    case Kind::Discrete: return "custom-discrete";
  }
  return "unknown";
}

EntryLaw EntryLaw::from_name(std::string_view name) {
  if (name == "gaussian") return gaussian();
  if (name == "rademacher") return rademacher();
  if (name == "uniform-centered" || name == "uniform") return uniform_centered();
  throw ConfigError("unknown entry law '" + std::string(name) + "'");
}

double EntryLaw::draw(CounterStream& rng) const {
  switch (kind_) {
    case Kind::Gaussian: return rng.normal();
    case Kind::Rademacher: return (rng() >> 63) ? 1.0 : -1.0;
    case Kind::UniformCentered: return std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
    case Kind::Discrete: {
      const double u = rng.uniform();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto k = std::min<std::size_t>(it - cumulative_.begin(), atoms_.size() - 1);
      return atoms_[k].value;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// VarianceProfile

namespace {

// Symmetric Sinkhorn balancing: finds d > 0 with diag(d) S diag(d) having unit
// row sums. Converges for symmetric nonnegative S with positive diagonal.
Eigen::MatrixXd balance_rows(const Eigen::MatrixXd& s) {
  const auto n = s.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  for (int iter = 0; iter < 100000; ++iter) {
    const Eigen::VectorXd row = s * d;
    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) err = std::max(err, std::abs(d[i] * row[i] - 1.0));
    if (err < 1e-15) break;
    for (Eigen::Index i = 0; i < n; ++i) d[i] = std::sqrt(d[i] / row[i]);
  }
  Eigen::MatrixXd out = d.asDiagonal() * s * d.asDiagonal();
  // Exact symmetry after the floating-point products.
  out = 0.5 * (out + out.transpose()).eval();
  return out;
}

}  // namespace

VarianceProfile VarianceProfile::constant(int n) {
  if (n < 1) throw ConfigError("profile dimension N must be positive");
  VarianceProfile p;
  p.kind_ = Kind::Constant;
  p.n_ = n;
  p.label_ = "constant";
  return p;
}

VarianceProfile VarianceProfile::macroscopic(int n, const std::function<double(double, double)>& shape,
                                             std::string label, double parameter) {
  if (n < 1) throw ConfigError("profile dimension N must be positive");
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = shape(static_cast<double>(i + 1) / n, static_cast<double>(j + 1) / n);
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("macroscopic profile must be positive and finite");
      s(i, j) = s(j, i) = v / n;
    }
  }
  VarianceProfile p;
  p.kind_ = Kind::Macroscopic;
  p.n_ = n;
  p.label_ = std::move(label);
  p.parameter_ = parameter;
  p.sigma2_ = std::make_shared<const Eigen::MatrixXd>(balance_rows(s));
  return p;
}

VarianceProfile VarianceProfile::cosine_modulated(int n, double amplitude) {
  if (!(std::abs(amplitude) < 1.0)) throw ConfigError("cosine profile amplitude must satisfy |a| < 1");
  return macroscopic(
      n, [amplitude](double x, double y) { return 1.0 + amplitude * std::cos(2.0 * M_PI * (x - y)); },
      "cosine", amplitude);
}

double VarianceProfile::variance(int i, int j) const {
  if (kind_ == Kind::Constant) return 1.0 / n_;
  return (*sigma2_)(i, j);
}

Eigen::MatrixXd VarianceProfile::matrix() const {
  if (kind_ == Kind::Constant) return Eigen::MatrixXd::Constant(n_, n_, 1.0 / n_);
  return *sigma2_;
}

int periodic_distance(int i, int j, int n) {
  const int d = std::abs(i - j) % n;
  return std::min(d, n - d);
}

VarianceProfile build_band_profile(int n, int width, const std::function<double(double)>& f) {
  if (n < 2) throw ConfigError("band profile needs N >= 2");
  if (width < 1 || width > n / 2) throw ConfigError("band width W must satisfy 1 <= W <= N/2");
  const bool wraps = width == n / 2;
  // Circulant: one row determines the profile.
  std::vector<double> by_distance(n / 2 + 1, 0.0);
  for (int d = 0; d <= n / 2; ++d) {
    if (d >= width && !wraps) continue;
    const double v = f(static_cast<double>(d) / width);
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("band profile function must be nonnegative");
    by_distance[d] = v / width;
  }
  double row = 0.0;
  for (int j = 0; j < n; ++j) row += by_distance[periodic_distance(0, j, n)];
  if (!(row > 0.0)) throw ConfigError("band profile function has zero integral on the band");
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = by_distance[periodic_distance(i, j, n)] / row;

  VarianceProfile p;
  p.kind_ = VarianceProfile::Kind::Band;
  p.n_ = n;
  p.bandwidth_ = width;
  p.band_shape_ = VarianceProfile::BandShape::Custom;
  p.label_ = "band";
  p.sigma2_ = std::make_shared<const Eigen::MatrixXd>(std::move(s));
  return p;
}

VarianceProfile build_band_profile(int n, int width, VarianceProfile::BandShape shape) {
  std::function<double(double)> f;
  switch (shape) {
    case VarianceProfile::BandShape::Flat:
      f = [](double x) { return std::abs(x) <= 1.0 ? 0.5 : 0.0; };
      break;
    case VarianceProfile::BandShape::Triangle:
      f = [](double x) { return std::max(0.0, 1.0 - std::abs(x)); };
      break;
    case VarianceProfile::BandShape::Custom:
      throw ConfigError("custom band shapes need an explicit profile function");
  }
  auto p = build_band_profile(n, width, f);
  p.band_shape_ = shape;
  return p;
}

GeneralizedWignerReport validate_generalized_wigner(const VarianceProfile& profile) {
  GeneralizedWignerReport r;
  const int n = profile.n();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int j = 0; j < n; ++j) {
    double col = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = profile.variance(i, j);
      col += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    r.row_sum_max_error = std::max(r.row_sum_max_error, std::abs(col - 1.0));
  }
  r.c1_estimate = n * lo;
  r.c2_estimate = n * hi;
  r.passes = r.row_sum_max_error <= 1e-9 && r.c1_estimate > 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// EnsembleSpec and sampling

EnsembleSpec EnsembleSpec::goe(int n) { return wigner(Symmetry::RealSymmetric, EntryLaw::gaussian(), n); }
EnsembleSpec EnsembleSpec::gue(int n) { return wigner(Symmetry::ComplexHermitian, EntryLaw::gaussian(), n); }

EnsembleSpec EnsembleSpec::wigner(Symmetry symmetry, EntryLaw law, int n) {
  return EnsembleSpec{symmetry, std::move(law), VarianceProfile::constant(n)};
}

double entry_variance(const EnsembleSpec& spec, int i, int j) {
  const double v = spec.profile.variance(i, j);
  if (i == j && spec.symmetry == Symmetry::RealSymmetric) return 2.0 * v;
  return v;
}

namespace {

std::uint64_t entry_stream_id(int i, int j) {
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j);
}

}  // namespace

HermitianMatrix sample_matrix(const EnsembleSpec& spec, std::uint64_t seed) {
  const int n = spec.n();
  if (n < 2) throw ConfigError("matrix dimension N must be at least 2");
  const bool constant = spec.profile.kind() == VarianceProfile::Kind::Constant;
  const double flat_sigma = std::sqrt(1.0 / n);

  if (spec.symmetry == Symmetry::RealSymmetric) {
    Eigen::MatrixXd h(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i <= j; ++i) {
        const double sigma = constant ? flat_sigma : std::sqrt(spec.profile.variance(i, j));
        CounterStream rng(seed, Domain::MatrixEntries, entry_stream_id(i, j));
        double x = sigma * spec.entry_law.draw(rng);
        if (i == j) x *= std::sqrt(2.0);
        h(i, j) = x;
        h(j, i) = x;
      }
    }
    return h;
  }

  Eigen::MatrixXcd h(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double sigma = constant ? flat_sigma : std::sqrt(spec.profile.variance(i, j));
      CounterStream rng(seed, Domain::MatrixEntries, entry_stream_id(i, j));
      if (i == j) {
        h(i, i) = sigma * spec.entry_law.draw(rng);
      } else {
        const double re = spec.entry_law.draw(rng);
        const double im = spec.entry_law.draw(rng);
        const std::complex<double> z = sigma * M_SQRT1_2 * std::complex<double>(re, im);
        h(i, j) = z;
        h(j, i) = std::conj(z);
      }
    }
  }
  return h;
}

int dimension(const HermitianMatrix& h) {
  return std::visit([](const auto& m) { return static_cast<int>(m.rows()); }, h);
}

Symmetry symmetry_of(const HermitianMatrix& h) {
  return std::holds_alternative<Eigen::MatrixXd>(h) ? Symmetry::RealSymmetric : Symmetry::ComplexHermitian;
}

Tridiagonal sample_hermite_tridiagonal(double beta, int n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("matrix dimension N must be at least 2");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  const double scale = std::sqrt(2.0 / (beta * n));
  Tridiagonal t{Eigen::VectorXd(n), Eigen::VectorXd(n - 1)};
  for (int i = 0; i < n; ++i) {
    CounterStream rng(seed, Domain::Tridiagonal, static_cast<std::uint64_t>(i));
    // Diagonal N(0, 2)/sqrt(2); off-diagonal chi_{beta (n - i - 1)}/sqrt(2).
    t.diagonal[i] = scale * rng.normal();
    if (i + 1 < n) t.off_diagonal[i] = scale * M_SQRT1_2 * chi(rng, beta * (n - i - 1));
  }
  return t;
}

}  // namespace rmtlab
