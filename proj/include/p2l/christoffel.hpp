#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace p2l::reach {

using Point = std::vector<double>;

/// Monomials of total degree <= d in n_x variables. Degrees ascend; within a
/// degree, larger maximal exponent first, then descending lexicographic order,
/// so n_x = 3, d = 2 lists 1, x1, x2, x3, x1^2, x2^2, x3^2, x1x2, x1x3, x2x3.
class MonomialBasis {
 public:
  MonomialBasis(std::size_t n_x, std::size_t degree);

  std::size_t n_x() const { return n_x_; }
  std::size_t degree() const { return degree_; }
  std::size_t size() const { return exponents_.size(); }
  const std::vector<std::vector<unsigned>>& exponent_table() const { return exponents_; }

 private:
  std::size_t n_x_;
  std::size_t degree_;
  std::vector<std::vector<unsigned>> exponents_;
};

/// C(n_x + d, d).
std::size_t basis_size(std::size_t n_x, std::size_t degree);

/// Entry j is prod_i x_i^{e_{j,i}}.
Eigen::VectorXd monomial_vector(std::span<const double> x, const MonomialBasis& basis);

class SingularMomentMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Empirical inverse Christoffel function k(x) = v(x)^T M^{-1} v(x) with
/// M = (1/n) sum v(z_i) v(z_i)^T, and the sublevel set {k <= alpha}.
///
/// Internally v is replaced by products of Chebyshev polynomials in affinely
/// rescaled coordinates. They span the same polynomial space as the
/// monomials, so k is unchanged, but the moment matrix is far better
/// conditioned at d = 10. M is never inverted: with the design matrix
/// V = QR, k(x) = n * |R^{-T} v(x)|^2.
class ChristoffelModel {
 public:
  /// Level of a single point.
  double level(std::span<const double> x) const;
  /// Levels of many points (rows of a column-major n_points x n_x matrix).
  Eigen::VectorXd levels(const Eigen::MatrixXd& points) const;

  bool contains(std::span<const double> x) const { return level(x) <= alpha_; }

  const MonomialBasis& basis() const { return basis_; }
  double alpha() const { return alpha_; }
  double condition_estimate() const { return condition_; }
  std::size_t n_fit() const { return n_fit_; }
  double ridge() const { return ridge_; }

  /// Same fit, different threshold. Used by split-conformal sets.
  ChristoffelModel with_alpha(double alpha) const;

 private:
  friend ChristoffelModel fit_christoffel(std::span<const Point>, const MonomialBasis&, double);

  explicit ChristoffelModel(MonomialBasis basis) : basis_(std::move(basis)) {}

  Eigen::VectorXd features(std::span<const double> x) const;
  Eigen::MatrixXd features(const Eigen::MatrixXd& points) const;

  MonomialBasis basis_;
  Eigen::VectorXd center_;
  Eigen::VectorXd inv_half_width_;
  Eigen::MatrixXd r_factor_;  // upper triangular, size x size
  std::size_t n_fit_ = 0;
  double ridge_ = 0.0;
  double alpha_ = 0.0;
  double condition_ = 1.0;
};

/// Fits the model on `train` (ridge adds ridge * I to the moment matrix in the
/// internal basis) and sets alpha = max over train of the level. Throws
/// SingularMomentMatrix when ridge == 0 and the smallest eigenvalue of the
/// moment matrix is <= 1e-12 times the largest.
ChristoffelModel fit_christoffel(std::span<const Point> train, const MonomialBasis& basis,
                                 double ridge = 0.0);

/// Packs points into an n_points x n_x matrix.
Eigen::MatrixXd to_matrix(std::span<const Point> points);

}  // namespace p2l::reach
