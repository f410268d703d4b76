#include "rmtlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <lapacke.h>

#include "rmtlab/errors.hpp"

namespace rmtlab {

SpectrumSample SpectrumSample::from_values(std::vector<double> values, std::string digest, std::uint64_t seed) {
  if (values.empty()) throw ConfigError("spectrum must be nonempty");
  if (!std::is_sorted(values.begin(), values.end())) throw ConfigError("spectrum must be sorted nondecreasing");
  return SpectrumSample{std::move(values), std::move(digest), seed};
}

LabelRange bulk_labels(int n, double alpha) {
  return LabelRange{static_cast<int>(std::ceil(alpha * n)), static_cast<int>(std::floor((1.0 - alpha) * n))};
}

// ---------------------------------------------------------------------------
// Eigensolves

namespace {

template <typename Matrix>
double asymmetry(const Matrix& h) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i) worst = std::max(worst, std::abs(h(i, j) - std::conj(h(j, i))));
  return worst;
}

}  // namespace

SpectrumSample eigenvalues(const HermitianMatrix& h, std::string digest, std::uint64_t seed) {
  std::vector<double> values = std::visit(
      [](const auto& m) {
        if (m.rows() != m.cols()) throw ConfigError("eigenvalues: matrix is not square");
        if (asymmetry(m) > 1e-12) throw ConfigError("eigenvalues: matrix is not hermitian");
        using M = std::decay_t<decltype(m)>;
        Eigen::SelfAdjointEigenSolver<M> solver(m, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) throw NumericalError("eigenvalues: solver did not converge");
        const auto& ev = solver.eigenvalues();
        return std::vector<double>(ev.data(), ev.data() + ev.size());
      },
      h);
  std::sort(values.begin(), values.end());
  return SpectrumSample{std::move(values), std::move(digest), seed};
}

std::vector<double> tridiagonal_eigenvalues(const Tridiagonal& t) {
  const auto n = static_cast<lapack_int>(t.diagonal.size());
  std::vector<double> d(t.diagonal.data(), t.diagonal.data() + n);
  std::vector<double> e(t.off_diagonal.data(), t.off_diagonal.data() + std::max<lapack_int>(n - 1, 0));
  e.push_back(0.0);
  // Root-free QL/QR; eigenvalues come back in ascending order.
  const lapack_int info = LAPACKE_dsterf(n, d.data(), e.data());
  if (info != 0) throw NumericalError("tridiagonal eigensolve did not converge (dsterf info " + std::to_string(info) + ")");
  return d;
}

std::vector<double> tridiagonal_eigenvalues_in(const Tridiagonal& t, double lo, double hi) {
  const auto n = static_cast<lapack_int>(t.diagonal.size());
  if (!(hi > lo)) return {};
  std::vector<double> d(t.diagonal.data(), t.diagonal.data() + n);
  std::vector<double> e(t.off_diagonal.data(), t.off_diagonal.data() + std::max<lapack_int>(n - 1, 0));
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<lapack_int> iblock(static_cast<std::size_t>(n)), isplit(static_cast<std::size_t>(n));
  lapack_int found = 0, nsplit = 0;
  const lapack_int info = LAPACKE_dstebz('V', 'E', n, lo, hi, 0, 0, 0.0, d.data(), e.data(), &found, &nsplit,
                                         w.data(), iblock.data(), isplit.data());
  if (info != 0) throw NumericalError("tridiagonal bisection failed (dstebz info " + std::to_string(info) + ")");
  w.resize(static_cast<std::size_t>(found));
  std::sort(w.begin(), w.end());
  return w;
}

SpectrumSample gaussian_spectrum(Symmetry symmetry, int n, std::uint64_t seed) {
  const auto t = sample_hermite_tridiagonal(beta_of(symmetry), n, seed);
  return SpectrumSample{tridiagonal_eigenvalues(t), digest(EnsembleSpec::wigner(symmetry, EntryLaw::gaussian(), n)),
                        seed};
}

// ---------------------------------------------------------------------------
// Densities

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kQuadTol = 1e-12;

// Map t in [0, pi] onto [a, b] with dx = (b - a)/2 sin t dt.
struct AngleMap {
  double a, b;
  double x(double t) const { return a + 0.5 * (b - a) * (1.0 - std::cos(t)); }
  double jac(double t) const { return 0.5 * (b - a) * std::sin(t); }
  double angle(double x) const {
    const double c = 1.0 - 2.0 * (x - a) / (b - a);
    return std::acos(std::clamp(c, -1.0, 1.0));
  }
};

class GenericDensity final : public DensityModel::Impl {
 public:
  GenericDensity(double a, double b, std::function<double(double)> pdf) : map_{a, b}, pdf_(std::move(pdf)) {}
  double lower() const override { return map_.a; }
  double upper() const override { return map_.b; }
  double pdf(double x) const override { return (x <= map_.a || x >= map_.b) ? 0.0 : pdf_(x); }
  double cdf(double x) const override {
    if (x <= map_.a) return 0.0;
    if (x >= map_.b) return 1.0;
    const double t = map_.angle(x);
    double err = 0.0;
    return gauss_kronrod<double, 31>::integrate([this](double s) { return pdf_(map_.x(s)) * map_.jac(s); }, 0.0,
                                                t, 20, kQuadTol, &err);
  }

 private:
  AngleMap map_;
  std::function<double(double)> pdf_;
};

class Semicircle final : public DensityModel::Impl {
 public:
  double lower() const override { return -2.0; }
  double upper() const override { return 2.0; }
  double pdf(double x) const override { return semicircle_density(x); }
  double cdf(double x) const override { return semicircle_cdf(x); }
  std::complex<double> stieltjes(std::complex<double> z) const override { return semicircle_stieltjes(z); }
};

}  // namespace

std::complex<double> DensityModel::Impl::stieltjes(std::complex<double> z) const {
  const AngleMap map{lower(), upper()};
  auto part = [&](bool imag, double t0, double t1) {
    double err = 0.0;
    return gauss_kronrod<double, 61>::integrate(
        [&](double t) {
          const std::complex<double> v = pdf(map.x(t)) * map.jac(t) / (map.x(t) - z);
          return imag ? v.imag() : v.real();
        },
        t0, t1, 25, kQuadTol, &err);
  };
  // Split at the angle of Re z so the near-singular peak sits on a breakpoint.
  const double split = map.angle(std::clamp(z.real(), map.a, map.b));
  std::complex<double> total;
  for (auto [t0, t1] : {std::pair{0.0, split}, std::pair{split, M_PI}}) {
    if (t1 > t0) total += std::complex<double>(part(false, t0, t1), part(true, t0, t1));
  }
  return total;
}

DensityModel DensityModel::from_pdf(double a, double b, std::function<double(double)> pdf) {
  if (!(b > a)) throw ConfigError("density support must satisfy A < B");
  return DensityModel(std::make_shared<GenericDensity>(a, b, std::move(pdf)));
}

double DensityModel::quantile(double p) const {
  const double a = lower(), b = upper();
  if (p <= 0.0) return a;
  if (p >= 1.0) return b;
  double lo = a, hi = b;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double c = cdf(mid);
    if (c < p) lo = mid;
    else hi = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(mid))) break;
  }
  const double x = 0.5 * (lo + hi);
  if (std::abs(cdf(x) - p) > 1e-10 && hi - lo > 1e-12)
    throw NumericalError("quantile inversion did not reach 1e-10 at p = " + std::to_string(p));
  return x;
}

std::complex<double> DensityModel::stieltjes(std::complex<double> z) const {
  if (!(z.imag() > 0.0)) throw ConfigError("Stieltjes transform needs Im z > 0");
  return impl_->stieltjes(z);
}

double semicircle_density(double x) {
  const double r = 4.0 - x * x;
  return r > 0.0 ? std::sqrt(r) / (2.0 * M_PI) : 0.0;
}

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * M_PI) + std::asin(x / 2.0) / M_PI;
}

std::complex<double> semicircle_stieltjes(std::complex<double> z) {
  if (!(z.imag() > 0.0)) throw ConfigError("semicircle_stieltjes needs Im z > 0");
  // Roots of m^2 + z m + 1 multiply to 1; the Herglotz root is the smaller
  // one, taken as the reciprocal of the larger to avoid cancellation.
  const std::complex<double> s = std::sqrt(z * z - 4.0);
  const std::complex<double> r1 = 0.5 * (-z + s);
  const std::complex<double> r2 = 0.5 * (-z - s);
  const std::complex<double> big = std::abs(r1) >= std::abs(r2) ? r1 : r2;
  return 1.0 / big;
}

DensityModel semicircle_model() {
  static const auto impl = std::make_shared<const Semicircle>();
  return DensityModel(impl);
}

std::complex<double> empirical_stieltjes(const SpectrumSample& spectrum, std::complex<double> z) {
  if (!(z.imag() > 0.0)) throw ConfigError("empirical_stieltjes needs Im z > 0");
  std::complex<double> sum = 0.0;
  for (double x : spectrum.eigenvalues) sum += 1.0 / (x - z);
  return sum / static_cast<double>(spectrum.n());
}

std::vector<double> classical_locations(const DensityModel& model, int n) {
  if (n < 1) throw ConfigError("classical_locations needs N >= 1");
  std::vector<double> gamma(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) gamma[static_cast<std::size_t>(j - 1)] = model.quantile(static_cast<double>(j) / n);
  gamma.back() = model.upper();
  return gamma;
}

LocalLawResult local_law_deviation(const SpectrumSample& spectrum, double energy, double eta,
                                   const DensityModel& model) {
  if (!(eta > 0.0)) throw ConfigError("local_law_deviation needs eta > 0");
  const std::complex<double> z(energy, eta);
  const double dev = std::abs(empirical_stieltjes(spectrum, z) - model.stieltjes(z));
  return LocalLawResult{dev, dev * spectrum.n() * eta};
}

std::vector<double> rigidity_profile(const SpectrumSample& spectrum, const std::vector<double>& gamma) {
  const auto n = gamma.size();
  if (n != spectrum.eigenvalues.size()) throw ConfigError("rigidity_profile: length mismatch");
  if (n < 2) throw ConfigError("rigidity_profile needs N >= 2");
  for (std::size_t j = 1; j < n; ++j)
    if (!(gamma[j] > gamma[j - 1])) throw ConfigError("rigidity_profile: gamma must be strictly increasing");
  std::vector<double> r(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double spacing = j + 1 < n ? gamma[j + 1] - gamma[j] : gamma[n - 1] - gamma[n - 2];
    r[j] = std::abs(spectrum.eigenvalues[j] - gamma[j]) / spacing;
  }
  return r;
}

double bulk_max(const std::vector<double>& r, double alpha) {
  const auto range = bulk_labels(static_cast<int>(r.size()), alpha);
  double m = 0.0;
  for (int j = range.first; j <= range.last; ++j) m = std::max(m, r[static_cast<std::size_t>(j - 1)]);
  return m;
}

}  // namespace rmtlab
