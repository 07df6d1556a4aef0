#include "p2l/christoffel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace p2l::reach {

namespace {

void append_degree(std::size_t n_x, unsigned remaining, std::vector<unsigned>& current,
                   std::vector<std::vector<unsigned>>& out) {
  const std::size_t pos = current.size();
  if (pos + 1 == n_x) {
    current.push_back(remaining);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (unsigned e = remaining + 1; e-- > 0;) {
    current.push_back(e);
    append_degree(n_x, remaining - e, current, out);
    current.pop_back();
  }
}

}  // namespace

std::size_t basis_size(std::size_t n_x, std::size_t degree) {
  // C(n_x + d, d) by the multiplicative formula; exact for the sizes in use.
  std::size_t c = 1;
  for (std::size_t i = 1; i <= degree; ++i) c = c * (n_x + i) / i;
  return c;
}

MonomialBasis::MonomialBasis(std::size_t n_x, std::size_t degree) : n_x_(n_x), degree_(degree) {
  if (n_x == 0) throw std::invalid_argument("MonomialBasis: n_x must be >= 1");
  for (unsigned g = 0; g <= degree; ++g) {
    std::vector<std::vector<unsigned>> level;
    std::vector<unsigned> current;
    append_degree(n_x, g, current, level);  // descending lexicographic
    std::stable_sort(level.begin(), level.end(), [](const auto& a, const auto& b) {
      return *std::max_element(a.begin(), a.end()) > *std::max_element(b.begin(), b.end());
    });
    exponents_.insert(exponents_.end(), level.begin(), level.end());
  }
}

Eigen::VectorXd monomial_vector(std::span<const double> x, const MonomialBasis& basis) {
  if (x.size() != basis.n_x())
    throw std::invalid_argument("monomial_vector: point has dimension " + std::to_string(x.size()) +
                                ", basis expects " + std::to_string(basis.n_x()));
  Eigen::VectorXd v(basis.size());
  const auto& table = basis.exponent_table();
  for (std::size_t j = 0; j < table.size(); ++j) {
    double p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (unsigned e = 0; e < table[j][i]; ++e) p *= x[i];
    v[static_cast<Eigen::Index>(j)] = p;
  }
  return v;
}

Eigen::MatrixXd to_matrix(std::span<const Point> points) {
  if (points.empty()) return {};
  const std::size_t n_x = points.front().size();
  Eigen::MatrixXd m(points.size(), n_x);
  for (std::size_t r = 0; r < points.size(); ++r) {
    if (points[r].size() != n_x) throw std::invalid_argument("to_matrix: ragged points");
    for (std::size_t c = 0; c < n_x; ++c) m(r, c) = points[r][c];
  }
  return m;
}

Eigen::MatrixXd ChristoffelModel::features(const Eigen::MatrixXd& points) const {
  const auto n_x = static_cast<Eigen::Index>(basis_.n_x());
  if (points.cols() != n_x)
    throw std::invalid_argument("ChristoffelModel: points have " + std::to_string(points.cols()) +
                                " columns, expected " + std::to_string(n_x));
  const auto d = static_cast<Eigen::Index>(basis_.degree());
  const Eigen::Index m = points.rows();
  const auto& table = basis_.exponent_table();

  // cheb[i](deg, p) = T_deg(y_{p,i})
  std::vector<Eigen::MatrixXd> cheb(static_cast<std::size_t>(n_x), Eigen::MatrixXd(d + 1, m));
  for (Eigen::Index i = 0; i < n_x; ++i) {
    auto& c = cheb[static_cast<std::size_t>(i)];
    for (Eigen::Index p = 0; p < m; ++p) {
      const double y = (points(p, i) - center_[i]) * inv_half_width_[i];
      c(0, p) = 1.0;
      if (d >= 1) c(1, p) = y;
      for (Eigen::Index k = 2; k <= d; ++k) c(k, p) = 2.0 * y * c(k - 1, p) - c(k - 2, p);
    }
  }
  Eigen::MatrixXd f(static_cast<Eigen::Index>(table.size()), m);
  for (std::size_t j = 0; j < table.size(); ++j) {
    auto row = f.row(static_cast<Eigen::Index>(j));
    row.setOnes();
    for (Eigen::Index i = 0; i < n_x; ++i) {
      const unsigned e = table[j][static_cast<std::size_t>(i)];
      if (e != 0) row.array() *= cheb[static_cast<std::size_t>(i)].row(e).array();
    }
  }
  return f;
}

Eigen::VectorXd ChristoffelModel::features(std::span<const double> x) const {
  Eigen::MatrixXd p(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) p(0, static_cast<Eigen::Index>(i)) = x[i];
  return features(p).col(0);
}

// Column-at-a-time solves, so a point's level does not depend on which batch
// it was evaluated in; alpha and membership tests must agree bit for bit.
Eigen::VectorXd ChristoffelModel::levels(const Eigen::MatrixXd& points) const {
  const Eigen::MatrixXd f = features(points);
  const auto lower = r_factor_.transpose().triangularView<Eigen::Lower>();
  Eigen::VectorXd out(f.cols());
  Eigen::VectorXd w(f.rows());
  for (Eigen::Index p = 0; p < f.cols(); ++p) {
    w = f.col(p);
    lower.solveInPlace(w);
    out[p] = static_cast<double>(n_fit_) * w.squaredNorm();
  }
  return out;
}

double ChristoffelModel::level(std::span<const double> x) const {
  Eigen::MatrixXd p(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) p(0, static_cast<Eigen::Index>(i)) = x[i];
  return levels(p)[0];
}

ChristoffelModel ChristoffelModel::with_alpha(double alpha) const {
  ChristoffelModel copy = *this;
  copy.alpha_ = alpha;
  return copy;
}

ChristoffelModel fit_christoffel(std::span<const Point> train, const MonomialBasis& basis,
                                 double ridge) {
  if (train.empty()) throw std::invalid_argument("fit_christoffel: empty training list");
  if (ridge < 0.0) throw std::invalid_argument("fit_christoffel: ridge must be >= 0");
  const Eigen::MatrixXd pts = to_matrix(train);
  const auto n_x = static_cast<Eigen::Index>(basis.n_x());
  if (pts.cols() != n_x) throw std::invalid_argument("fit_christoffel: dimension mismatch");

  ChristoffelModel model(basis);
  model.n_fit_ = train.size();
  model.ridge_ = ridge;
  const Eigen::RowVectorXd lo = pts.colwise().minCoeff();
  const Eigen::RowVectorXd hi = pts.colwise().maxCoeff();
  model.center_ = (0.5 * (lo + hi)).transpose();
  model.inv_half_width_.resize(n_x);
  for (Eigen::Index i = 0; i < n_x; ++i) {
    const double hw = 0.5 * (hi[i] - lo[i]);
    model.inv_half_width_[i] = hw > 0.0 ? 1.0 / hw : 1.0;
  }

  const auto s = static_cast<Eigen::Index>(basis.size());
  const auto n = static_cast<Eigen::Index>(train.size());
  const Eigen::Index extra = ridge > 0.0 ? s : 0;
  if (n + extra < s)
    throw SingularMomentMatrix("fit_christoffel: " + std::to_string(n) +
                               " points cannot determine a moment matrix of size " +
                               std::to_string(s));
  Eigen::MatrixXd design(n + extra, s);
  design.topRows(n) = model.features(pts).transpose();
  if (extra > 0)
    design.bottomRows(extra) =
        std::sqrt(static_cast<double>(n) * ridge) * Eigen::MatrixXd::Identity(s, s);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  model.r_factor_ = qr.matrixQR().topRows(s).triangularView<Eigen::Upper>();

  // Eigenvalues of the moment matrix are sigma(R)^2 / n.
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(model.r_factor_).singularValues();
  const double ratio = sv[s - 1] > 0.0 ? (sv[s - 1] / sv[0]) * (sv[s - 1] / sv[0]) : 0.0;
  model.condition_ = ratio > 0.0 ? 1.0 / ratio : std::numeric_limits<double>::infinity();
  if (ridge == 0.0 && ratio <= 1e-12)
    throw SingularMomentMatrix("fit_christoffel: moment matrix eigenvalue ratio " +
                               std::to_string(ratio) + " <= 1e-12 with " + std::to_string(n) +
                               " points");

  model.alpha_ = model.levels(pts).maxCoeff();
  return model;
}

}  // namespace p2l::reach
