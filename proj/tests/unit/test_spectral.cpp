#include <doctest.h>

#include <cmath>
#include <complex>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/loggas.hpp"
#include "rmtlab/spectral.hpp"

using namespace rmtlab;
using cd = std::complex<double>;

namespace {

// Roots of det(A - xI) by scanning for sign changes and bisecting.
std::vector<double> charpoly_roots(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  auto det = [&](double x) { return (a - x * Eigen::MatrixXd::Identity(n, n)).determinant(); };
  const double r = a.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  std::vector<double> roots;
  const double h = 1e-3;
  double x0 = -r, f0 = det(x0);
  for (double x1 = -r + h; x1 <= r; x1 += h) {
    const double f1 = det(x1);
    if ((f0 < 0) != (f1 < 0)) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi), fm = det(mid);
        if ((fm < 0) == (flo < 0)) lo = mid, flo = fm;
        else hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("small eigenvalue examples") {
    Eigen::MatrixXd d(2, 2);
    d << 1, 0, 0, 0;
    const auto s = eigenvalues(d);
    CHECK(s.label(1) == 0.0);
    CHECK(s.label(2) == 1.0);
    Eigen::MatrixXd b(2, 2);
    b << 1, 1, 1, 0;
    const auto t = eigenvalues(b);
    CHECK(t.label(2) - t.label(1) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  }

  TEST_CASE("6x6 GOE against a characteristic polynomial oracle") {
    const auto h = std::get<Eigen::MatrixXd>(sample_matrix(EnsembleSpec::goe(6), 2024));
    const auto s = eigenvalues(h);
    const auto roots = charpoly_roots(h);
    REQUIRE(roots.size() == 6);
    for (int j = 1; j <= 6; ++j) CHECK(std::abs(s.label(j) - roots[static_cast<std::size_t>(j - 1)]) < 1e-8);
  }

  TEST_CASE("tridiagonal eigenvalues agree with the windowed solver") {
    const auto t = sample_hermite_tridiagonal(2.0, 300, 9);
    const auto all = tridiagonal_eigenvalues(t);
    const auto window = tridiagonal_eigenvalues_in(t, -0.3, 0.4);
    std::vector<double> expected;
    for (double x : all)
      if (x > -0.3 && x <= 0.4) expected.push_back(x);
    REQUIRE(window.size() == expected.size());
    for (std::size_t k = 0; k < window.size(); ++k) CHECK(window[k] == doctest::Approx(expected[k]).epsilon(1e-12));
  }

  TEST_CASE("tridiagonal model has the GOE second moment") {
    // E tr H^2 / N = (N + 1) / N for GOE with off-diagonal variance 1/N.
    const int n = 40, seeds = 4000;
    double m2 = 0;
    for (int k = 0; k < seeds; ++k)
      for (double x : gaussian_spectrum(Symmetry::RealSymmetric, n, k).eigenvalues) m2 += x * x;
    CHECK(m2 / (seeds * n) == doctest::Approx((n + 1.0) / n).epsilon(0.01));
  }

  TEST_CASE("semicircle density values") {
    CHECK(semicircle_density(0.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
    CHECK(semicircle_density(2.0) == 0.0);
    CHECK(semicircle_density(-2.0) == 0.0);
    const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(semicircle_density, -2.0, 2.0,
                                                                                      15, 1e-13);
    CHECK(std::abs(mass - 1.0) < 1e-10);
  }

  TEST_CASE("semicircle Stieltjes transform") {
    CHECK(std::abs(semicircle_stieltjes(cd(0, 1)) - cd(0, (std::sqrt(5.0) - 1) / 2)) < 1e-12);
    CHECK(std::abs(semicircle_stieltjes(cd(0, 2)) - cd(0, std::sqrt(2.0) - 1)) < 1e-12);
    for (cd z : {cd(0.3, 0.01), cd(-1.9, 1e-4), cd(5, 0.2), cd(0, 1e-6), cd(-30, 4)}) {
      const cd m = semicircle_stieltjes(z);
      CHECK(std::abs(m * m + z * m + 1.0) <= 1e-12);
      CHECK(m.imag() > 0);
    }
  }

  TEST_CASE("empirical Stieltjes transform") {
    CHECK(std::abs(empirical_stieltjes(SpectrumSample::from_values({0.0}), cd(0, 1)) - cd(0, 1)) < 1e-15);
    CHECK(std::abs(empirical_stieltjes(SpectrumSample::from_values({-1.0, 1.0}), cd(0, 1)) - cd(0, 0.5)) < 1e-15);
    const auto s = gaussian_spectrum(Symmetry::RealSymmetric, 2000, 3);
    const cd z(0.3, 0.05);
    CHECK(std::abs(empirical_stieltjes(s, z) - semicircle_stieltjes(z)) < 0.1);
  }

  TEST_CASE("Herglotz property and large-z asymptotics") {
    const auto s = gaussian_spectrum(Symmetry::ComplexHermitian, 300, 8);
    double max_abs = 0;
    for (double x : s.eigenvalues) max_abs = std::max(max_abs, std::abs(x));
    for (double re = -4; re <= 4; re += 0.25)
      for (double im : {1e-6, 1e-3, 0.1, 2.0}) {
        CHECK(empirical_stieltjes(s, cd(re, im)).imag() > 0);
        CHECK(semicircle_stieltjes(cd(re, im)).imag() > 0);
      }
    for (double angle = 0.1; angle < M_PI; angle += 0.3) {
      const cd z = std::polar(1e3, angle);
      CHECK(std::abs(z * empirical_stieltjes(s, z) + 1.0) <= 2 * max_abs / std::abs(z));
    }
  }

  TEST_CASE("cdf and quantile round trip for every density model") {
    const auto quartic = equilibrium_density(Potential::quartic()).density;
    const auto generic = DensityModel::from_pdf(-1, 1, [](double x) { return 0.75 * (1 - x * x); });
    for (const auto& m : {semicircle_model(), quartic, generic}) {
      CHECK(std::abs(m.cdf(m.lower())) < 1e-8);
      CHECK(std::abs(m.cdf(m.upper()) - 1.0) < 1e-8);
      for (int k = 1; k <= 100; ++k) {
        const double x = m.lower() + (m.upper() - m.lower()) * k / 101.0;
        CHECK(m.pdf(x) >= 0.0);
        CHECK(std::abs(m.quantile(m.cdf(x)) - x) < 1e-6);
      }
    }
  }

  TEST_CASE("classical locations") {
    const auto model = semicircle_model();
    const auto g = classical_locations(model, 1000);
    CHECK(std::abs(g[499]) < 1e-9);
    CHECK(g.back() == 2.0);
    for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] > g[k - 1]);
    // Re-quadrature of the defining integral.
    for (int j : {1, 10, 250, 777, 999}) {
      const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          semicircle_density, -2.0, g[static_cast<std::size_t>(j - 1)], 15, 1e-13);
      CHECK(std::abs(mass - j / 1000.0) < 1e-8);
    }
    CHECK(model.quantile(0.5 + std::sqrt(3.0) / (4 * M_PI) + 1.0 / 6) == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("local law on the quantile configuration") {
    const int n = 1000;
    const auto s = SpectrumSample::from_values(classical_locations(semicircle_model(), n));
    CHECK(local_law_deviation(s, 0.0, 10.0 / n, semicircle_model()).bound_ratio < 5.0);
    const auto far = local_law_deviation(s, 0.0, 10.0, semicircle_model());
    CHECK(far.deviation <= 1.0 / (n * 10.0));
    CHECK_THROWS_AS(local_law_deviation(s, 0.0, 0.0, semicircle_model()), ConfigError);
  }

  TEST_CASE("rigidity profile examples") {
    const int n = 500;
    const auto g = classical_locations(semicircle_model(), n);
    const auto exact = rigidity_profile(SpectrumSample::from_values(g), g);
    for (double r : exact) CHECK(r == 0.0);
    // Shift every point by its local spacing.
    std::vector<double> shifted(g.size());
    for (std::size_t j = 0; j + 1 < g.size(); ++j) shifted[j] = g[j] + (g[j + 1] - g[j]);
    shifted.back() = g.back() + (g.back() - g[g.size() - 2]);
    const auto r = rigidity_profile(SpectrumSample::from_values(shifted), g);
    const auto bulk = bulk_labels(n);
    for (int j = bulk.first; j <= bulk.last; ++j) CHECK(r[static_cast<std::size_t>(j - 1)] == doctest::Approx(1.0));
  }

  TEST_CASE("spectrum validation") {
    CHECK_THROWS_AS(SpectrumSample::from_values({}), ConfigError);
    CHECK_THROWS_AS(SpectrumSample::from_values({1.0, 0.0}), ConfigError);
  }
}
