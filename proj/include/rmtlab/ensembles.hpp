#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rmtlab/random.hpp"

namespace rmtlab {

enum class Symmetry { RealSymmetric, ComplexHermitian };

/// Dyson index: 1 for real symmetric, 2 for complex hermitian.
int beta_of(Symmetry s);
std::string to_string(Symmetry s);
Symmetry symmetry_from_string(std::string_view name);

/// Centered, unit-variance law for a single real matrix coordinate. Complex
/// off-diagonal entries use two independent draws, one per component.
class EntryLaw {
 public:
  enum class Kind { Gaussian, Rademacher, UniformCentered, Discrete };
  struct Atom {
    double value;
    double probability;
  };

  static EntryLaw gaussian() { return EntryLaw(Kind::Gaussian, {}); }
  static EntryLaw rademacher() { return EntryLaw(Kind::Rademacher, {}); }
  /// Uniform on [-sqrt(3), sqrt(3)].
  static EntryLaw uniform_centered() { return EntryLaw(Kind::UniformCentered, {}); }
  /// Throws ConfigError unless probabilities sum to 1, the mean is 0 and the
  /// variance is 1, each to 1e-12.
  static EntryLaw discrete(std::vector<Atom> atoms);

  Kind kind() const { return kind_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::string name() const;
  static EntryLaw from_name(std::string_view name);

  double draw(CounterStream& rng) const;

 private:
  EntryLaw(Kind kind, std::vector<Atom> atoms) : kind_(kind), atoms_(std::move(atoms)) {}

  Kind kind_;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
};

/// Variances sigma_ij^2 of a hermitian ensemble. Non-constant profiles are
/// materialized as a dense symmetric matrix shared between copies.
class VarianceProfile {
 public:
  enum class Kind { Constant, Macroscopic, Band };
  /// Named band shapes on [-1, 1]; `Flat` is the indicator, `Triangle` is
  /// (1 - |x|)_+.
  enum class BandShape { Flat, Triangle, Custom };

  static VarianceProfile constant(int n);

  /// sigma_ij^2 proportional to S(i/N, j/N), scaled symmetrically (Sinkhorn
  /// balancing) so that every row sums to 1.
  static VarianceProfile macroscopic(int n, const std::function<double(double, double)>& shape,
                                     std::string label = "custom", double parameter = 0.0);
  /// S(x, y) = 1 + amplitude * cos(2 pi (x - y)).
  static VarianceProfile cosine_modulated(int n, double amplitude);

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  int bandwidth() const { return bandwidth_; }
  BandShape band_shape() const { return band_shape_; }
  const std::string& label() const { return label_; }
  double parameter() const { return parameter_; }

  double variance(int i, int j) const;
  Eigen::MatrixXd matrix() const;

 private:
  friend VarianceProfile build_band_profile(int, int, const std::function<double(double)>&);
  friend VarianceProfile build_band_profile(int, int, BandShape);
  VarianceProfile() = default;

  Kind kind_ = Kind::Constant;
  int n_ = 0;
  int bandwidth_ = 0;
  BandShape band_shape_ = BandShape::Flat;
  std::string label_;
  double parameter_ = 0.0;
  std::shared_ptr<const Eigen::MatrixXd> sigma2_;
};

/// Periodic band profile sigma_ij^2 = W^-1 f(d(i, j) / W) with d the periodic
/// distance, zero for d >= W, rows renormalized to sum to exactly 1. At the
/// maximal width W = N/2 the band wraps the whole torus and every entry is
/// kept. Requires 1 <= W <= N/2 and f >= 0 with a nonzero sum on the band.
VarianceProfile build_band_profile(int n, int width, const std::function<double(double)>& f);
VarianceProfile build_band_profile(int n, int width, VarianceProfile::BandShape shape);

/// Periodic distance between labels on the torus of size n.
int periodic_distance(int i, int j, int n);

struct GeneralizedWignerReport {
  double row_sum_max_error = 0.0;
  double c1_estimate = 0.0;
  double c2_estimate = 0.0;
  bool passes = false;
};

GeneralizedWignerReport validate_generalized_wigner(const VarianceProfile& profile);

struct EnsembleSpec {
  Symmetry symmetry = Symmetry::RealSymmetric;
  EntryLaw entry_law = EntryLaw::gaussian();
  VarianceProfile profile = VarianceProfile::constant(2);

  int n() const { return profile.n(); }
  int beta() const { return beta_of(symmetry); }

  static EnsembleSpec goe(int n);
  static EnsembleSpec gue(int n);
  static EnsembleSpec wigner(Symmetry symmetry, EntryLaw law, int n);
};

/// E|h_ij|^2 under the sampling convention: sigma_ij^2 off the diagonal,
/// 2 sigma_ii^2 on the diagonal of real symmetric matrices and sigma_ii^2 for
/// complex hermitian ones. This matches the invariant Gaussian laws.
double entry_variance(const EnsembleSpec& spec, int i, int j);

using HermitianMatrix = std::variant<Eigen::MatrixXd, Eigen::MatrixXcd>;

/// Samples the upper triangle entry by entry from the stream keyed by
/// (seed, row, column) and mirrors it; the result is a pure function of
/// (spec, seed). Rejects N < 2.
HermitianMatrix sample_matrix(const EnsembleSpec& spec, std::uint64_t seed);

int dimension(const HermitianMatrix& h);
Symmetry symmetry_of(const HermitianMatrix& h);

/// Symmetric tridiagonal matrix (diagonal and first off-diagonal).
struct Tridiagonal {
  Eigen::VectorXd diagonal;
  Eigen::VectorXd off_diagonal;
};

/// Dumitriu-Edelman tridiagonal model of the Gaussian beta-ensemble, scaled so
/// that its eigenvalues follow C exp(-beta N sum x^2 / 4) prod |x_i - x_j|^beta.
/// For beta = 1, 2 this is exactly the GOE/GUE eigenvalue law of
/// sample_matrix under EnsembleSpec::goe / gue.
Tridiagonal sample_hermite_tridiagonal(double beta, int n, std::uint64_t seed);

/// Stable hex digest of the serialized spec.
std::string digest(const EnsembleSpec& spec);

}  // namespace rmtlab
