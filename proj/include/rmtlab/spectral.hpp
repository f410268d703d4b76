#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rmtlab/ensembles.hpp"

namespace rmtlab {

/// One ordered eigenvalue (or particle) configuration with its provenance.
struct SpectrumSample {
  std::vector<double> eigenvalues;  // nondecreasing
  std::string spec_digest;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(eigenvalues.size()); }
  /// 1-based label access, lambda_1 <= ... <= lambda_N.
  double label(int j) const { return eigenvalues[static_cast<std::size_t>(j - 1)]; }

  /// Throws ConfigError when empty or not sorted.
  static SpectrumSample from_values(std::vector<double> values, std::string digest = {}, std::uint64_t seed = 0);
};

/// Inclusive 1-based label window.
struct LabelRange {
  int first = 1;
  int last = 0;
  bool contains(int j) const { return j >= first && j <= last; }
};

/// Bulk labels [[ceil(alpha N), floor((1 - alpha) N)]].
LabelRange bulk_labels(int n, double alpha = 0.1);

// ---------------------------------------------------------------------------
// Eigensolves

/// All eigenvalues of a hermitian matrix, sorted. Rejects matrices whose
/// asymmetry max |h_ij - conj(h_ji)| exceeds 1e-12.
SpectrumSample eigenvalues(const HermitianMatrix& h, std::string digest = {}, std::uint64_t seed = 0);

std::vector<double> tridiagonal_eigenvalues(const Tridiagonal& t);
/// Eigenvalues in the half-open interval (lo, hi] by Sturm bisection.
std::vector<double> tridiagonal_eigenvalues_in(const Tridiagonal& t, double lo, double hi);

/// GOE (beta = 1) or GUE (beta = 2) spectrum drawn through the tridiagonal
/// model; same law as eigenvalues(sample_matrix(goe/gue)) at O(N^2) cost.
SpectrumSample gaussian_spectrum(Symmetry symmetry, int n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Limiting densities

/// Probability density on a single interval [A, B] with CDF, quantile map and
/// Stieltjes transform.
class DensityModel {
 public:
  class Impl {
   public:
    virtual ~Impl() = default;
    virtual double lower() const = 0;
    virtual double upper() const = 0;
    virtual double pdf(double x) const = 0;
    virtual double cdf(double x) const = 0;
    virtual std::complex<double> stieltjes(std::complex<double> z) const;
  };

  explicit DensityModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  /// Generic model from a pdf on [A, B]; the CDF is integrated adaptively in
  /// the angle variable x = A + (B - A)(1 - cos t)/2, which absorbs
  /// square-root edges.
  static DensityModel from_pdf(double a, double b, std::function<double(double)> pdf);

  double lower() const { return impl_->lower(); }
  double upper() const { return impl_->upper(); }
  double pdf(double x) const { return impl_->pdf(x); }
  double cdf(double x) const { return impl_->cdf(x); }
  /// Inverse CDF by bisection to 1e-10 in probability and 1e-13 in x.
  double quantile(double p) const;
  /// m(z) = int rho(x) / (x - z) dx for Im z > 0.
  std::complex<double> stieltjes(std::complex<double> z) const;

 private:
  std::shared_ptr<const Impl> impl_;
};

double semicircle_density(double x);
double semicircle_cdf(double x);
/// Root of m^2 + z m + 1 = 0 with Im m > 0. Rejects Im z <= 0.
std::complex<double> semicircle_stieltjes(std::complex<double> z);
DensityModel semicircle_model();

/// (1/N) sum_j 1/(lambda_j - z). Rejects Im z <= 0.
std::complex<double> empirical_stieltjes(const SpectrumSample& spectrum, std::complex<double> z);

/// gamma_j = quantile(j / N) for j = 1..N (element j - 1); gamma_N = B.
std::vector<double> classical_locations(const DensityModel& model, int n);

struct LocalLawResult {
  double deviation = 0.0;    // |m_N(E + i eta) - m(E + i eta)|
  double bound_ratio = 0.0;  // deviation * N * eta
};

LocalLawResult local_law_deviation(const SpectrumSample& spectrum, double energy, double eta,
                                   const DensityModel& model);

/// r_j = |lambda_j - gamma_j| / |gamma_{j+1} - gamma_j|, with the last entry
/// normalized by |gamma_N - gamma_{N-1}|. Requires strictly increasing gamma
/// of the spectrum's length.
std::vector<double> rigidity_profile(const SpectrumSample& spectrum, const std::vector<double>& gamma);

/// max of r over the bulk labels.
double bulk_max(const std::vector<double>& r, double alpha = 0.1);

}  // namespace rmtlab
