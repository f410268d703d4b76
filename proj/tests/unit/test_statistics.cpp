#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/random.hpp"
#include "rmtlab/statistics.hpp"

using namespace rmtlab;

TEST_SUITE("statistics") {
  TEST_CASE("Wigner surmise values and normalization") {
    CHECK(wigner_surmise_pdf(0.0) == 0.0);
    CHECK(wigner_surmise_pdf(1.0) == doctest::Approx(M_PI / 2 * std::exp(-M_PI / 4)).epsilon(1e-14));
    const double mode = std::sqrt(2 / M_PI);
    CHECK(wigner_surmise_pdf(mode) > wigner_surmise_pdf(mode - 1e-4));
    CHECK(wigner_surmise_pdf(mode) > wigner_surmise_pdf(mode + 1e-4));
    boost::math::quadrature::exp_sinh<double> q;
    CHECK(std::abs(q.integrate(wigner_surmise_pdf) - 1.0) < 1e-8);
    CHECK(std::abs(q.integrate([](double s) { return s * wigner_surmise_pdf(s); }) - 1.0) < 1e-6);
    CHECK(wigner_surmise_cdf(1.3) == doctest::Approx(1 - std::exp(-M_PI * 1.69 / 4)).epsilon(1e-14));
    CHECK_THROWS_AS(wigner_surmise_pdf(-0.1), ConfigError);
  }

  TEST_CASE("sine kernel") {
    CHECK(sine_kernel(0.3, 0.3) == 1.0);
    CHECK(sine_kernel(0.5, 0.0) == doctest::Approx(2 / M_PI).epsilon(1e-14));
    CHECK(std::abs(sine_kernel(3.0, 1.0)) < 1e-15);
    CHECK(sine_kernel_correlation({0.7}) == 1.0);
    CHECK(std::abs(sine_kernel_correlation({0.2, 0.2})) < 1e-15);
    CHECK(sine_kernel_correlation({0.0, 0.5}) == doctest::Approx(1 - 4 / (M_PI * M_PI)).epsilon(1e-14));
    // Permutation symmetry and coincidence.
    const double a = sine_kernel_correlation({0.1, 0.9, 1.7});
    CHECK(sine_kernel_correlation({1.7, 0.1, 0.9}) == doctest::Approx(a).epsilon(1e-12));
    CHECK(sine_kernel_correlation({0.9, 1.7, 0.1}) == doctest::Approx(a).epsilon(1e-12));
    CHECK(std::abs(sine_kernel_correlation({0.1, 0.9, 0.9})) < 1e-12);
  }

  TEST_CASE("quantile gaps on classical locations") {
    const int n = 1000;
    const auto model = semicircle_model();
    const auto s = SpectrumSample::from_values(classical_locations(model, n));
    const auto g = rescale_bulk_gaps(s, model, n / 2, 20);
    for (double x : g.gaps) CHECK(std::abs(x - 1.0) < 2.0 / n);
    const auto degenerate = SpectrumSample::from_values({-1.0, 0.0, 0.0, 1.0});
    CHECK(std::abs(rescale_bulk_gaps(degenerate, DensityModel::from_pdf(-1.5, 1.5, [](double) { return 1 / 3.0; }),
                                     2, 1)
                       .gaps.front()) == 0.0);
  }

  TEST_CASE("GOE gap mean at the middle label") {
    const int n = 1000;
    const auto model = semicircle_model();
    double sum = 0;
    const int seeds = 3000;
    for (int k = 0; k < seeds; ++k)
      sum += rescale_bulk_gaps(gaussian_spectrum(Symmetry::RealSymmetric, n, k), model, n / 2).gaps.front();
    CHECK(std::abs(sum / seeds - 1.0) < 0.02);
  }

  TEST_CASE("one-point function is one in the bulk") {
    const int n = 1000;
    std::vector<SpectrumSample> samples;
    for (int k = 0; k < 100; ++k) samples.push_back(gaussian_spectrum(Symmetry::ComplexHermitian, n, k));
    std::vector<std::vector<double>> grid;
    for (double a = -2; a <= 2; a += 0.5) grid.push_back({a});
    const auto est = estimate_correlation(samples, semicircle_model(), 1, 0.0, std::pow(n, -0.9), grid, 0.2);
    double integral = 0;
    for (double v : est.values) {
      CHECK(v >= 0);
      CHECK(std::abs(v - 1.0) < 0.1);
      integral += 0.5 * v;
    }
    CHECK(integral / 4.5 == doctest::Approx(1.0).epsilon(0.1));
  }

  TEST_CASE("two-point estimate is small at coincidence") {
    const int n = 1000;
    std::vector<SpectrumSample> samples;
    for (int k = 0; k < 200; ++k) samples.push_back(gaussian_spectrum(Symmetry::ComplexHermitian, n, k));
    const auto wide = estimate_correlation(samples, semicircle_model(), 2, 0.0, 0.05, {{0.0, 0.0}}, 0.2);
    const auto narrow = estimate_correlation(samples, semicircle_model(), 2, 0.0, 0.05, {{0.0, 0.0}}, 0.05);
    CHECK(narrow.values.front() < wide.values.front());
    CHECK(narrow.values.front() < 0.05);
  }

  TEST_CASE("correlation estimator warns on sparse windows") {
    std::vector<SpectrumSample> samples{gaussian_spectrum(Symmetry::RealSymmetric, 50, 1)};
    const auto est = estimate_correlation(samples, semicircle_model(), 2, 0.0, 1e-4, {{0.0, 1.0}}, 0.1);
    CHECK_FALSE(est.warnings.empty());
    CHECK_THROWS_AS(estimate_correlation({}, semicircle_model(), 2, 0.0, 0.01, {{0.0, 1.0}}, 0.1), ConfigError);
  }

  TEST_CASE("mesoscopic covariance preconditions and self covariance") {
    std::vector<SpectrumSample> samples;
    for (int k = 0; k < 50; ++k) samples.push_back(gaussian_spectrum(Symmetry::RealSymmetric, 400, k));
    CHECK(mesoscopic_covariance(samples, lorentzian_bump, 0.1, 0.1, 0.05).covariance >= 0);
    CHECK_THROWS_AS(mesoscopic_covariance(samples, lorentzian_bump, 0.0, 0.1, 0.001), ConfigError);
    CHECK_THROWS_AS(mesoscopic_covariance(samples, lorentzian_bump, 0.0, 0.1, 0.05), ConfigError);
    const auto ok = mesoscopic_covariance(samples, lorentzian_bump, 0.0, 0.25, 0.05);
    CHECK(ok.prediction_scale == doctest::Approx(-1.0 / (100.0 * 100.0)));
  }

  TEST_CASE("smoothed statistic with the Lorentzian is Im m_N") {
    const auto s = gaussian_spectrum(Symmetry::RealSymmetric, 300, 4);
    const double eta = 0.03, e = 0.4;
    CHECK(smoothed_linear_statistic(s, lorentzian_bump, e, eta) ==
          doctest::Approx(empirical_stieltjes(s, {e, eta}).imag()).epsilon(1e-12));
  }

  TEST_CASE("edge statistics") {
    const int n = 1000;
    const auto gamma = classical_locations(semicircle_model(), n);
    const auto exact = SpectrumSample::from_values(gamma);
    CHECK(edge_rescale(exact, gamma, {1, 2, 5}) == std::vector<double>{0.0, 0.0, 0.0});
    CHECK_THROWS_AS(edge_rescale(exact, gamma, {6}), ConfigError);
    double s = 0, s2 = 0;
    const int seeds = 300;
    for (int k = 0; k < seeds; ++k) {
      const auto spec = gaussian_spectrum(Symmetry::RealSymmetric, n, k);
      const double x = edge_rescale(spec, gamma, {1}).front();
      s += x;
      s2 += x * x;
      // Reflecting the spectrum swaps the two edge statistics.
      std::vector<double> reflected;
      for (auto it = spec.eigenvalues.rbegin(); it != spec.eigenvalues.rend(); ++it) reflected.push_back(-*it);
      const auto r = SpectrumSample::from_values(reflected);
      CHECK(edge_rescale_top(r, gamma, {1}).front() == doctest::Approx(edge_rescale(spec, gamma, {1}).front()));
    }
    const double sd = std::sqrt(s2 / seeds - (s / seeds) * (s / seeds));
    CHECK(sd >= 0.5);
    CHECK(sd <= 3.0);
  }

  TEST_CASE("small gap probability saturates for large eps") {
    const auto r = small_gap_exponent(Symmetry::RealSymmetric, {10.0, 0.5, 0.2, 0.1}, 100000, 3);
    CHECK(r.probability.front() > 0.999);
    CHECK_FALSE(r.used_in_fit.front());
    CHECK(r.used_in_fit.back());
    CHECK_THROWS_AS(small_gap_exponent(Symmetry::RealSymmetric, {0.1, 0.2}, 1000, 3), ConfigError);
  }

  TEST_CASE("two-sample comparisons") {
    CounterStream rng(1, Domain::MatrixEntries, 0);
    std::vector<double> a(100000), b(100000);
    for (auto& x : a) x = rng.uniform();
    for (auto& x : b) x = 0.5 + rng.uniform();
    CHECK(compare_distributions(a, a, 0.01).ks_distance == 0.0);
    CHECK(ks_two_sample(a, b) == doctest::Approx(0.5).epsilon(0.02));
    CHECK(ks_two_sample(a, b) == ks_two_sample(b, a));
    const auto rep = compare_distributions(a, b, 0.1);
    CHECK_FALSE(rep.passes);
    CHECK(rep.n_a == a.size());
    CHECK(to_record(rep).find("passes") != std::string::npos);
    CHECK(ks_one_sample(a, [](double x) { return std::clamp(x, 0.0, 1.0); }) < 0.01);
  }

  TEST_CASE("histogram distance to the surmise") {
    // Inverse-CDF draws from the surmise itself.
    CounterStream rng(2, Domain::MatrixEntries, 0);
    std::vector<double> s(200000);
    for (auto& x : s) x = std::sqrt(-4 / M_PI * std::log(1 - rng.uniform()));
    CHECK(histogram_l1_distance(s, wigner_surmise_pdf, 0, 4, 40) < 0.01);
  }
}
