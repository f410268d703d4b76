#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rmtlab/spectral.hpp"

namespace rmtlab {

// ---------------------------------------------------------------------------
// Reference laws

/// (pi s / 2) exp(-pi s^2 / 4); rejects s < 0.
double wigner_surmise_pdf(double s);
double wigner_surmise_cdf(double s);

/// sin(pi (x - y)) / (pi (x - y)), equal to 1 on the diagonal.
double sine_kernel(double x, double y);

/// det[K(x_i, x_j)] for the given points.
double sine_kernel_correlation(const std::vector<double>& points);

// ---------------------------------------------------------------------------
// Gaps

struct GapSample {
  enum class Mode { FixedLabel, AveragedLabel };
  std::vector<double> gaps;
  LabelRange label_range;
  Mode mode = Mode::FixedLabel;
};

/// g_m = N rho(gamma_j) (lambda_{j+m} - lambda_{j+m-1}) for m = 1..n. Both j
/// and j + n must lie in the bulk window with alpha = 0.1.
GapSample rescale_bulk_gaps(const SpectrumSample& spectrum, const DensityModel& model, int j, int n = 1);

/// Single gaps N rho(gamma_k)(lambda_{k+1} - lambda_k) for every label k with
/// |k - j0| <= half_width, each rescaled by its own quantile density.
GapSample averaged_label_gaps(const SpectrumSample& spectrum, const DensityModel& model, int j0, int half_width);

/// All single gaps with both endpoints in the bulk window, each unfolded by
/// the density at its left label's classical location.
std::vector<double> bulk_gaps(const SpectrumSample& spectrum, const std::vector<double>& gamma,
                              const DensityModel& model, double alpha = 0.1);

/// Bulk gaps divided by the mean of the 2 * window + 1 surrounding gaps. Needs
/// no density model, so it also unfolds non-equilibrium configurations.
std::vector<double> locally_unfolded_gaps(const SpectrumSample& spectrum, double alpha = 0.1, int window = 10);

// ---------------------------------------------------------------------------
// Correlation functions

struct CorrelationEstimate {
  int n = 1;
  double e0 = 0.0;
  double b_n = 0.0;
  std::vector<std::vector<double>> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
  std::size_t sample_count = 0;
  double expected_tuples_per_sample = 0.0;
  std::vector<std::string> warnings;
};

/// Gaussian-kernel estimate of the rescaled n-point function
///   int dE/(2 b_N) R_n(E + alpha / (N rho)) / (N rho)^n,
/// with R_n the density of ordered n-tuples of distinct eigenvalues and rho
/// evaluated at E0 (b_N << 1). The E integral of the product kernel is done in
/// closed form. b_N = 0 selects fixed energy, realized as a window of width
/// `bandwidth` (in rescaled units) around E0. `bandwidth` is the kernel width
/// in rescaled units. In the bulk the limit is det[K(alpha_i, alpha_j)].
/// `dimension` is the matrix size N; 0 takes it from each sample, and a
/// positive value allows samples holding only the eigenvalues near E0.
CorrelationEstimate estimate_correlation(const std::vector<SpectrumSample>& samples, const DensityModel& model,
                                         int n, double e0, double b_n, const std::vector<std::vector<double>>& grid,
                                         double bandwidth, int dimension = 0);

// ---------------------------------------------------------------------------
// Mesoscopic statistics

/// Default observable (1 + x^2)^-1; with it the smoothed statistic at E is
/// Im m_N(E + i eta).
double lorentzian_bump(double x);

/// (1/(N eta)) sum_i O((lambda_i - E)/eta).
double smoothed_linear_statistic(const SpectrumSample& spectrum, const std::function<double(double)>& observable,
                                 double energy, double eta);

struct MesoscopicCovariance {
  double covariance = 0.0;
  double standard_error = 0.0;
  double prediction_scale = 0.0;  // -[N (E2 - E1)]^-2, 0 when E1 == E2
  std::size_t sample_count = 0;
};

/// Sample covariance of the smoothed statistics at E1 and E2. Requires
/// eta >= 5/N and either E2 == E1 or E2 - E1 >= 5 eta.
MesoscopicCovariance mesoscopic_covariance(const std::vector<SpectrumSample>& samples,
                                           const std::function<double(double)>& observable, double e1, double e2,
                                           double eta);

/// Covariance at separation d averaged over anchor energies E (pairs E, E + d),
/// using the approximate translation invariance of the bulk covariance.
/// The standard error accounts for the correlation between anchors.
MesoscopicCovariance anchored_mesoscopic_covariance(const std::vector<SpectrumSample>& samples,
                                                    const std::function<double(double)>& observable,
                                                    const std::vector<double>& anchors, double separation,
                                                    double eta);

// ---------------------------------------------------------------------------
// Edge statistics

/// N^{2/3} j^{1/3} (lambda_j - gamma_j) for each 1-based label j in
/// `labels`; rejects labels above N^{1/4}.
std::vector<double> edge_rescale(const SpectrumSample& spectrum, const std::vector<double>& gamma,
                                 const std::vector<int>& labels);

/// The same statistic at the upper edge, through the reflection x -> -x.
std::vector<double> edge_rescale_top(const SpectrumSample& spectrum, const std::vector<double>& gamma,
                                     const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Small-gap exponent of 2x2 matrices

struct SmallGapResult {
  std::vector<double> eps;
  std::vector<double> probability;
  std::vector<std::uint64_t> hits;
  std::vector<bool> used_in_fit;
  double slope = 0.0;
  double slope_standard_error = 0.0;
  bool insufficient_tail = false;  // < 100 hits at the smallest eps
};

/// Gap of the 2x2 matrix sample_matrix(wigner(symmetry, gaussian, 2), seed).
double two_by_two_gap(Symmetry symmetry, std::uint64_t seed);

/// Monte Carlo estimate of P(lambda_2 - lambda_1 <= eps) over the grid and the
/// count-weighted log-log slope. Saturated points (P > 0.5) and points
/// without hits are excluded from the fit.
SmallGapResult small_gap_exponent(Symmetry symmetry, const std::vector<double>& eps_grid, std::uint64_t samples,
                                  std::uint64_t seed, int workers = 1);

// ---------------------------------------------------------------------------
// Distribution comparison

struct ComparisonReport {
  double ks_distance = 0.0;
  double l1_density_distance = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double threshold = 0.0;
  bool passes = false;
};

/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// One-sample distance sup |F_n - F|.
double ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

/// KS distance plus the binned L1 distance between the two empirical
/// densities (40 equal bins over the pooled range). Passes iff ks <= threshold.
ComparisonReport compare_distributions(const std::vector<double>& a, const std::vector<double>& b, double threshold);

/// sum_b |h_b - f_b| * width over equal bins of [lo, hi], with h_b the
/// histogram density of `sample` (normalized by the full sample size) and f_b
/// the bin average of `pdf`. Binning both sides keeps the discretization out
/// of the distance.
double histogram_l1_distance(const std::vector<double>& sample, const std::function<double(double)>& pdf, double lo,
                             double hi, int bins);

/// Structured text record {ks, l1, n_a, n_b, threshold, passes}.
std::string to_record(const ComparisonReport& report);

}  // namespace rmtlab
