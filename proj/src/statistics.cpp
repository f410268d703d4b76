#include "rmtlab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>

#include "rmtlab/errors.hpp"

namespace rmtlab {

double wigner_surmise_pdf(double s) {
  if (s < 0.0) throw ConfigError("wigner_surmise_pdf needs s >= 0");
  return 0.5 * M_PI * s * std::exp(-0.25 * M_PI * s * s);
}

double wigner_surmise_cdf(double s) { return s <= 0.0 ? 0.0 : 1.0 - std::exp(-0.25 * M_PI * s * s); }

double sine_kernel(double x, double y) {
  const double d = M_PI * (x - y);
  if (std::abs(d) < 1e-8) return 1.0 - d * d / 6.0;
  return std::sin(d) / d;
}

double sine_kernel_correlation(const std::vector<double>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n == 0) return 1.0;
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = sine_kernel(points[i], points[j]);
  return k.determinant();
}

// ---------------------------------------------------------------------------
// Gaps

GapSample rescale_bulk_gaps(const SpectrumSample& spectrum, const DensityModel& model, int j, int n) {
  const int size = spectrum.n();
  const auto bulk = bulk_labels(size);
  if (n < 1) throw ConfigError("rescale_bulk_gaps needs n >= 1");
  if (!bulk.contains(j) || !bulk.contains(j + n))
    throw ConfigError("rescale_bulk_gaps: labels " + std::to_string(j) + ".." + std::to_string(j + n) +
                      " leave the bulk window");
  const double gamma = model.quantile(static_cast<double>(j) / size);
  const double scale = size * model.pdf(gamma);
  GapSample out;
  out.mode = GapSample::Mode::FixedLabel;
  out.label_range = LabelRange{j, j + n};
  for (int m = 1; m <= n; ++m) out.gaps.push_back(scale * (spectrum.label(j + m) - spectrum.label(j + m - 1)));
  return out;
}

GapSample averaged_label_gaps(const SpectrumSample& spectrum, const DensityModel& model, int j0, int half_width) {
  const int size = spectrum.n();
  const auto bulk = bulk_labels(size);
  if (half_width < 0) throw ConfigError("averaged_label_gaps needs half_width >= 0");
  if (!bulk.contains(j0 - half_width) || !bulk.contains(j0 + half_width + 1))
    throw ConfigError("averaged_label_gaps: label window leaves the bulk");
  GapSample out;
  out.mode = GapSample::Mode::AveragedLabel;
  out.label_range = LabelRange{j0 - half_width, j0 + half_width};
  for (int k = j0 - half_width; k <= j0 + half_width; ++k) {
    const double scale = size * model.pdf(model.quantile(static_cast<double>(k) / size));
    out.gaps.push_back(scale * (spectrum.label(k + 1) - spectrum.label(k)));
  }
  return out;
}

std::vector<double> bulk_gaps(const SpectrumSample& spectrum, const std::vector<double>& gamma,
                              const DensityModel& model, double alpha) {
  const int size = spectrum.n();
  if (static_cast<int>(gamma.size()) != size) throw ConfigError("bulk_gaps: gamma length mismatch");
  const auto bulk = bulk_labels(size, alpha);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(0, bulk.last - bulk.first)));
  for (int k = bulk.first; k < bulk.last; ++k) {
    const double scale = size * model.pdf(gamma[static_cast<std::size_t>(k - 1)]);
    out.push_back(scale * (spectrum.label(k + 1) - spectrum.label(k)));
  }
  return out;
}

std::vector<double> locally_unfolded_gaps(const SpectrumSample& spectrum, double alpha, int window) {
  if (window < 1) throw ConfigError("locally_unfolded_gaps: window must be positive");
  const int size = spectrum.n();
  const auto bulk = bulk_labels(size, alpha);
  std::vector<double> out;
  for (int k = std::max(bulk.first, window + 1); k < std::min(bulk.last, size - window); ++k) {
    const double span = spectrum.label(k + window + 1) - spectrum.label(k - window);
    out.push_back((2 * window + 1) * (spectrum.label(k + 1) - spectrum.label(k)) / span);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Correlation functions

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }

void enumerate_tuples(int n, int m, std::vector<int>& current, std::vector<bool>& used,
                      const std::function<void(const std::vector<int>&)>& visit) {
  if (static_cast<int>(current.size()) == n) {
    visit(current);
    return;
  }
  for (int i = 0; i < m; ++i) {
    if (used[static_cast<std::size_t>(i)]) continue;
    used[static_cast<std::size_t>(i)] = true;
    current.push_back(i);
    enumerate_tuples(n, m, current, used, visit);
    current.pop_back();
    used[static_cast<std::size_t>(i)] = false;
  }
}

}  // namespace

CorrelationEstimate estimate_correlation(const std::vector<SpectrumSample>& samples, const DensityModel& model,
                                         int n, double e0, double b_n, const std::vector<std::vector<double>>& grid,
                                         double bandwidth, int dimension) {
  if (samples.empty()) throw ConfigError("estimate_correlation: empty sample list");
  if (n < 1) throw ConfigError("estimate_correlation: n must be >= 1");
  if (!(bandwidth > 0.0)) throw ConfigError("estimate_correlation: bandwidth must be positive");
  if (!(b_n >= 0.0)) throw ConfigError("estimate_correlation: b_N must be nonnegative");
  if (!(e0 > model.lower() && e0 < model.upper())) throw ConfigError("estimate_correlation: E0 outside the bulk");
  for (const auto& g : grid)
    if (static_cast<int>(g.size()) != n) throw ConfigError("estimate_correlation: grid point of wrong order");

  const double rho = model.pdf(e0);
  const double h = bandwidth;

  CorrelationEstimate est;
  est.n = n;
  est.e0 = e0;
  est.b_n = b_n;
  est.grid = grid;
  est.bandwidth = bandwidth;
  est.sample_count = samples.size();
  est.values.assign(grid.size(), 0.0);

  double alpha_min = 0.0, alpha_max = 0.0;
  for (const auto& g : grid) {
    for (double a : g) {
      alpha_min = std::min(alpha_min, a);
      alpha_max = std::max(alpha_max, a);
    }
  }

  double anchors = 0.0;
  const double norm = std::pow(2.0 * M_PI * h * h, -0.5 * n);
  const double reach = 9.0 * h;
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  for (const auto& s : samples) {
    const double scale = (dimension > 0 ? dimension : s.n()) * rho;
    // Half-width of the energy window in rescaled units.
    const double w = b_n > 0.0 ? b_n * scale : 0.5 * h;
    const double lo = e0 + (alpha_min - w - reach) / scale;
    const double hi = e0 + (alpha_max + w + reach) / scale;
    const auto first = std::lower_bound(s.eigenvalues.begin(), s.eigenvalues.end(), lo);
    const auto last = std::upper_bound(s.eigenvalues.begin(), s.eigenvalues.end(), hi);
    std::vector<double> a;
    for (auto it = first; it != last; ++it) {
      const double x = (*it - e0) * scale;
      a.push_back(x);
      if (std::abs(x) <= w) anchors += 1.0;
    }
    const int m = static_cast<int>(a.size());
    if (m < n) continue;

    std::vector<int> current;
    std::vector<bool> used(static_cast<std::size_t>(m), false);
    std::vector<double> c(static_cast<std::size_t>(n));
    enumerate_tuples(n, m, current, used, [&](const std::vector<int>& tuple) {
      for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const auto& alpha = grid[gi];
        double mean = 0.0;
        for (int k = 0; k < n; ++k) {
          c[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(tuple[static_cast<std::size_t>(k)])] - alpha[static_cast<std::size_t>(k)];
          mean += c[static_cast<std::size_t>(k)];
        }
        mean /= n;
        if (mean < -w - reach || mean > w + reach) continue;
        double spread = 0.0;
        for (double ck : c) spread += (ck - mean) * (ck - mean);
        if (spread > 2.0 * reach * reach) continue;
        // int_{-w}^{w} prod_k phi_h(v - c_k) dv / (2w)
        const double window = std_normal_cdf((w - mean) * sqrt_n / h) - std_normal_cdf((-w - mean) * sqrt_n / h);
        const double integral =
            norm * std::exp(-spread / (2.0 * h * h)) * std::sqrt(2.0 * M_PI * h * h / n) * window;
        est.values[gi] += integral / (2.0 * w);
      }
    });
  }
  for (double& v : est.values) v /= static_cast<double>(samples.size());
  est.expected_tuples_per_sample = anchors / static_cast<double>(samples.size());
  if (est.expected_tuples_per_sample < 1.0) {
    std::ostringstream msg;
    msg << "expected tuple count per sample " << est.expected_tuples_per_sample << " is below 1";
    est.warnings.push_back(msg.str());
  }
  return est;
}

// ---------------------------------------------------------------------------
// Mesoscopic statistics

double lorentzian_bump(double x) { return 1.0 / (1.0 + x * x); }

double smoothed_linear_statistic(const SpectrumSample& spectrum, const std::function<double(double)>& observable,
                                 double energy, double eta) {
  double sum = 0.0;
  for (double x : spectrum.eigenvalues) sum += observable((x - energy) / eta);
  return sum / (spectrum.n() * eta);
}

namespace {

void check_mesoscopic_scales(const std::vector<SpectrumSample>& samples, double e1, double e2, double eta) {
  if (samples.size() < 2) throw ConfigError("mesoscopic covariance needs at least two samples");
  const int n = samples.front().n();
  if (!(eta >= 5.0 / n)) throw ConfigError("mesoscopic covariance needs eta >= 5/N");
  if (e2 != e1 && !(std::abs(e2 - e1) >= 5.0 * eta * (1.0 - 1e-9))) throw ConfigError("mesoscopic covariance needs E2 - E1 >= 5 eta");
}

MesoscopicCovariance covariance_from_products(const std::vector<double>& products, std::size_t count, int n,
                                              double separation) {
  MesoscopicCovariance out;
  const double k = static_cast<double>(count);
  const double mean = std::accumulate(products.begin(), products.end(), 0.0) / k;
  double var = 0.0;
  for (double p : products) var += (p - mean) * (p - mean);
  var /= (k - 1.0);
  out.covariance = mean * k / (k - 1.0);
  out.standard_error = std::sqrt(var / k);
  out.prediction_scale = separation > 0.0 ? -1.0 / std::pow(n * separation, 2) : 0.0;
  out.sample_count = count;
  return out;
}

}  // namespace

MesoscopicCovariance mesoscopic_covariance(const std::vector<SpectrumSample>& samples,
                                           const std::function<double(double)>& observable, double e1, double e2,
                                           double eta) {
  check_mesoscopic_scales(samples, e1, e2, eta);
  const std::size_t k = samples.size();
  std::vector<double> x(k), y(k);
  for (std::size_t s = 0; s < k; ++s) {
    x[s] = smoothed_linear_statistic(samples[s], observable, e1, eta);
    y[s] = smoothed_linear_statistic(samples[s], observable, e2, eta);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
  std::vector<double> products(k);
  for (std::size_t s = 0; s < k; ++s) products[s] = (x[s] - mx) * (y[s] - my);
  return covariance_from_products(products, k, samples.front().n(), e2 - e1);
}

MesoscopicCovariance anchored_mesoscopic_covariance(const std::vector<SpectrumSample>& samples,
                                                    const std::function<double(double)>& observable,
                                                    const std::vector<double>& anchors, double separation,
                                                    double eta) {
  if (anchors.empty()) throw ConfigError("anchored covariance needs at least one anchor");
  for (double e : anchors) check_mesoscopic_scales(samples, e, e + separation, eta);
  const std::size_t k = samples.size();
  const std::size_t m = anchors.size();
  std::vector<double> x(k * m), y(k * m);
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t a = 0; a < m; ++a) {
      x[s * m + a] = smoothed_linear_statistic(samples[s], observable, anchors[a], eta);
      y[s * m + a] = smoothed_linear_statistic(samples[s], observable, anchors[a] + separation, eta);
    }
  }
  std::vector<double> mx(m, 0.0), my(m, 0.0);
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t a = 0; a < m; ++a) {
      mx[a] += x[s * m + a] / k;
      my[a] += y[s * m + a] / k;
    }
  }
  std::vector<double> products(k, 0.0);
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t a = 0; a < m; ++a) products[s] += (x[s * m + a] - mx[a]) * (y[s * m + a] - my[a]);
    products[s] /= static_cast<double>(m);
  }
  return covariance_from_products(products, k, samples.front().n(), separation);
}

// ---------------------------------------------------------------------------
// Edge statistics

namespace {

void check_edge_labels(int n, const std::vector<double>& gamma, const std::vector<int>& labels) {
  if (static_cast<int>(gamma.size()) != n) throw ConfigError("edge_rescale: gamma length mismatch");
  const double limit = std::pow(static_cast<double>(n), 0.25);
  for (int j : labels) {
    if (j < 1 || j > limit) throw ConfigError("edge_rescale: label " + std::to_string(j) + " exceeds N^(1/4)");
  }
}

}  // namespace

std::vector<double> edge_rescale(const SpectrumSample& spectrum, const std::vector<double>& gamma,
                                 const std::vector<int>& labels) {
  const int n = spectrum.n();
  check_edge_labels(n, gamma, labels);
  std::vector<double> out;
  out.reserve(labels.size());
  for (int j : labels) {
    out.push_back(std::pow(n, 2.0 / 3.0) * std::cbrt(static_cast<double>(j)) *
                  (spectrum.label(j) - gamma[static_cast<std::size_t>(j - 1)]));
  }
  return out;
}

std::vector<double> edge_rescale_top(const SpectrumSample& spectrum, const std::vector<double>& gamma,
                                     const std::vector<int>& labels) {
  const int n = spectrum.n();
  check_edge_labels(n, gamma, labels);
  // Reflected configuration: lambda'_j = -lambda_{N+1-j}, gamma'_j = -gamma_{N-j}.
  std::vector<double> out;
  out.reserve(labels.size());
  for (int j : labels) {
    const double reflected = -spectrum.label(n + 1 - j);
    const double reflected_gamma = -gamma[static_cast<std::size_t>(n - j - 1)];
    out.push_back(std::pow(n, 2.0 / 3.0) * std::cbrt(static_cast<double>(j)) * (reflected - reflected_gamma));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Small gaps

double two_by_two_gap(Symmetry symmetry, std::uint64_t seed) {
  static const EnsembleSpec real = EnsembleSpec::goe(2);
  static const EnsembleSpec complex = EnsembleSpec::gue(2);
  const auto h = sample_matrix(symmetry == Symmetry::RealSymmetric ? real : complex, seed);
  return std::visit(
      [](const auto& m) {
        const double a = std::real(m(0, 0));
        const double d = std::real(m(1, 1));
        return std::sqrt((a - d) * (a - d) + 4.0 * std::norm(m(0, 1)));
      },
      h);
}

SmallGapResult small_gap_exponent(Symmetry symmetry, const std::vector<double>& eps_grid, std::uint64_t samples,
                                  std::uint64_t seed, int workers) {
  if (eps_grid.size() < 2) throw ConfigError("small_gap_exponent needs at least two eps values");
  for (std::size_t i = 1; i < eps_grid.size(); ++i)
    if (!(eps_grid[i] < eps_grid[i - 1])) throw ConfigError("small_gap_exponent: eps grid must be decreasing");
  if (!(eps_grid.back() > 0.0)) throw ConfigError("small_gap_exponent: eps must be positive");
  if (!(eps_grid.front() / eps_grid.back() >= 10.0 - 1e-12))
    throw ConfigError("small_gap_exponent: eps grid must span at least one decade");
  if (samples == 0) throw ConfigError("small_gap_exponent needs samples > 0");

  const std::size_t g = eps_grid.size();
  workers = std::max(1, workers);
  std::vector<std::vector<std::uint64_t>> partial(static_cast<std::size_t>(workers),
                                                  std::vector<std::uint64_t>(g, 0));
  auto run = [&](int w) {
    auto& counts = partial[static_cast<std::size_t>(w)];
    for (std::uint64_t i = static_cast<std::uint64_t>(w); i < samples; i += static_cast<std::uint64_t>(workers)) {
      const double gap = two_by_two_gap(symmetry, derive_seed(seed, i));
      for (std::size_t k = 0; k < g; ++k) {
        if (gap <= eps_grid[k]) ++counts[k];
        else break;  // grid is decreasing
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(run, w);
    run(0);
  }

  SmallGapResult r;
  r.eps = eps_grid;
  r.hits.assign(g, 0);
  for (const auto& counts : partial)
    for (std::size_t k = 0; k < g; ++k) r.hits[k] += counts[k];
  r.probability.resize(g);
  r.used_in_fit.resize(g);
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < g; ++k) {
    r.probability[k] = static_cast<double>(r.hits[k]) / static_cast<double>(samples);
    r.used_in_fit[k] = r.hits[k] > 0 && r.probability[k] <= 0.5;
    if (!r.used_in_fit[k]) continue;
    const double w = static_cast<double>(r.hits[k]);
    sw += w;
    sx += w * std::log(eps_grid[k]);
    sy += w * std::log(r.probability[k]);
  }
  r.insufficient_tail = r.hits.back() < 100;
  if (sw <= 0.0) throw NumericalError("small_gap_exponent: no usable grid points");
  const double xm = sx / sw, ym = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < g; ++k) {
    if (!r.used_in_fit[k]) continue;
    const double w = static_cast<double>(r.hits[k]);
    const double dx = std::log(eps_grid[k]) - xm;
    sxx += w * dx * dx;
    sxy += w * dx * (std::log(r.probability[k]) - ym);
  }
  if (!(sxx > 0.0)) throw NumericalError("small_gap_exponent: fewer than two usable grid points");
  r.slope = sxy / sxx;
  r.slope_standard_error = std::sqrt(1.0 / sxx);
  return r;
}

// ---------------------------------------------------------------------------
// Comparison

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("ks_two_sample needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw ConfigError("ks_one_sample needs a nonempty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

ComparisonReport compare_distributions(const std::vector<double>& a, const std::vector<double>& b, double threshold) {
  if (a.empty() || b.empty()) throw ConfigError("compare_distributions needs nonempty samples");
  ComparisonReport r;
  r.n_a = a.size();
  r.n_b = b.size();
  r.threshold = threshold;
  r.ks_distance = ks_two_sample(a, b);

  constexpr int kBins = 40;
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*amin, *bmin);
  const double hi = std::max(*amax, *bmax);
  if (hi > lo) {
    std::vector<double> ha(kBins, 0.0), hb(kBins, 0.0);
    auto bin = [&](double x) { return std::min(kBins - 1, static_cast<int>((x - lo) / (hi - lo) * kBins)); };
    for (double x : a) ha[static_cast<std::size_t>(bin(x))] += 1.0 / static_cast<double>(a.size());
    for (double x : b) hb[static_cast<std::size_t>(bin(x))] += 1.0 / static_cast<double>(b.size());
    for (int k = 0; k < kBins; ++k) r.l1_density_distance += std::abs(ha[static_cast<std::size_t>(k)] - hb[static_cast<std::size_t>(k)]);
  }
  r.passes = r.ks_distance <= threshold;
  return r;
}

double histogram_l1_distance(const std::vector<double>& sample, const std::function<double(double)>& pdf, double lo,
                             double hi, int bins) {
  if (sample.empty()) throw ConfigError("histogram_l1_distance needs a nonempty sample");
  if (!(hi > lo) || bins < 1) throw ConfigError("histogram_l1_distance: bad binning");
  const double width = (hi - lo) / bins;
  std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
  for (double x : sample) {
    if (x < lo || x >= hi) continue;
    const int k = std::min(bins - 1, static_cast<int>((x - lo) / width));
    h[static_cast<std::size_t>(k)] += 1.0;
  }
  double total = 0.0;
  for (int k = 0; k < bins; ++k) {
    const double height = h[static_cast<std::size_t>(k)] / (static_cast<double>(sample.size()) * width);
    const double a = lo + k * width;
    const double expected = boost::math::quadrature::gauss<double, 30>::integrate(pdf, a, a + width) / width;
    total += std::abs(height - expected) * width;
  }
  return total;
}

std::string to_record(const ComparisonReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "ks = " << r.ks_distance << "\n"
     << "l1 = " << r.l1_density_distance << "\n"
     << "n_a = " << r.n_a << "\n"
     << "n_b = " << r.n_b << "\n"
     << "threshold = " << r.threshold << "\n"
     << "passes = " << (r.passes ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace rmtlab
