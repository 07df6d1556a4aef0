#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "p2l/christoffel.hpp"
#include "p2l/reachability.hpp"

using namespace p2l;
using namespace p2l::reach;

namespace {

// Textbook evaluation: monomial moment matrix, solved with a dense LDLT.
double monomial_level(const std::vector<Point>& train, const MonomialBasis& basis, const Point& x) {
  const auto s = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s, s);
  for (const auto& z : train) {
    const Eigen::VectorXd v = monomial_vector(z, basis);
    m += v * v.transpose();
  }
  m /= static_cast<double>(train.size());
  const Eigen::VectorXd v = monomial_vector(x, basis);
  return v.dot(m.ldlt().solve(v));
}

std::vector<Point> unit_square_five() { return {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}}; }

}  // namespace

TEST_CASE("monomial ordering") {
  const MonomialBasis b(3, 2);
  REQUIRE(b.size() == 10);
  const Eigen::VectorXd v = monomial_vector(std::vector<double>{2.0, 3.0, 5.0}, b);
  const std::vector<double> expect{1, 2, 3, 5, 4, 9, 25, 6, 10, 15};
  for (int i = 0; i < 10; ++i) CHECK(v(i) == expect[i]);

  const Eigen::VectorXd w = monomial_vector(std::vector<double>{7.0}, MonomialBasis(1, 1));
  CHECK(w.size() == 2);
  CHECK(w(0) == 1.0);
  CHECK(w(1) == 7.0);
  CHECK(MonomialBasis(2, 10).size() == 66);
  CHECK(basis_size(2, 10) == 66);
  CHECK(basis_size(3, 4) == 35);
}

TEST_CASE("degree zero is the whole space") {
  const std::vector<Point> t{{0.3}, {-2.0}, {5.0}};
  const auto m = fit_christoffel(t, MonomialBasis(1, 0));
  CHECK(m.alpha() == doctest::Approx(1.0));
  CHECK(m.level(std::vector<double>{1e6}) == doctest::Approx(1.0));
  CHECK(m.contains(std::vector<double>{-1e6}));
  const Box unit{{0.0}, {1.0}};
  CHECK(volume_mc(m, unit, 1000, 3, 1).value == 1.0);
}

TEST_CASE("five-point linear fit") {
  const auto t = unit_square_five();
  const MonomialBasis b(2, 1);
  const auto m = fit_christoffel(t, b);
  double mean = 0.0;
  for (const auto& z : t) {
    CHECK(m.contains(z));
    CHECK(m.level(z) == doctest::Approx(monomial_level(t, b, z)).epsilon(1e-10));
    mean += m.level(z) / 5.0;
  }
  CHECK(mean == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_FALSE(m.contains(std::vector<double>{7.0, 7.0}));
  const auto q = fit_christoffel(t, MonomialBasis(2, 2), 1e-8);
  CHECK_FALSE(q.contains(std::vector<double>{7.0, -7.0}));
}

TEST_CASE("levels agree with a monomial oracle and obey the trace identity") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t d : {1u, 2u, 3u, 4u}) {
    const MonomialBasis b(2, d);
    std::vector<Point> t;
    for (std::size_t i = 0; i < 4 * b.size(); ++i) t.push_back({nd(gen), 0.5 * nd(gen) + 1.0});
    const auto m = fit_christoffel(t, b);
    double mean = 0.0, max_level = 0.0;
    for (const auto& z : t) {
      const double l = m.level(z);
      mean += l / static_cast<double>(t.size());
      max_level = std::max(max_level, l);
    }
    CHECK(mean == doctest::Approx(static_cast<double>(b.size())).epsilon(1e-9));
    CHECK(m.alpha() == max_level);
    const Point probe{0.3, -0.4};
    CHECK(m.level(probe) == doctest::Approx(monomial_level(t, b, probe)).epsilon(1e-7));
    // Batch and single-point levels are bitwise identical.
    const Eigen::VectorXd batch = m.levels(to_matrix(t));
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(batch(i) == m.level(t[i]));
  }
}

TEST_CASE("singular fits are reported, ridge rescues them") {
  const std::vector<Point> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}};
  CHECK_THROWS_AS(fit_christoffel(line, MonomialBasis(2, 1)), SingularMomentMatrix);
  const std::vector<Point> few{{0, 0}, {1, 0}};
  CHECK_THROWS_AS(fit_christoffel(few, MonomialBasis(2, 1)), SingularMomentMatrix);
  const auto m = fit_christoffel(line, MonomialBasis(2, 1), 1e-6);
  for (const auto& z : line) CHECK(m.contains(z));
}

TEST_CASE("volume estimate matches grid quadrature") {
  const auto m = fit_christoffel(unit_square_five(), MonomialBasis(2, 1));
  const Box box{{-1.0, -1.0}, {2.0, 2.0}};
  CHECK(box.volume() == 9.0);
  const auto a = volume_mc(m, box, 1000000, 99, 0);
  const auto again = volume_mc(m, box, 1000000, 99, 1);
  CHECK(a.value == again.value);
  CHECK(a.hits == again.hits);

  // Midpoint rule at 1e-3 resolution.
  const int g = 3000;
  const double h = 3.0 / g;
  std::size_t inside = 0;
  Eigen::MatrixXd row(g, 2);
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      row(j, 0) = -1.0 + (i + 0.5) * h;
      row(j, 1) = -1.0 + (j + 0.5) * h;
    }
    const Eigen::VectorXd lv = m.levels(row);
    for (int j = 0; j < g; ++j) inside += lv(j) <= m.alpha() ? 1 : 0;
  }
  const double quad = static_cast<double>(inside) * h * h;
  CHECK(std::abs(a.value - quad) / quad < 0.01);
}

TEST_CASE("box around points") {
  const std::vector<Point> p{{0, 1}, {2, 5}};
  const auto b = Box::around(p, 0.25);
  CHECK(b.lo == std::vector<double>{-0.5, 0.0});
  CHECK(b.hi == std::vector<double>{2.5, 6.0});
}

TEST_CASE("risk estimator extremes and a half-space") {
  const std::function<Point(Rng&)> sampler = [](Rng& r) { return Point{r.normal(), r.normal()}; };
  const std::function<bool(const Point&)> yes = [](const Point&) { return true; };
  const std::function<bool(const Point&)> no = [](const Point&) { return false; };
  const std::function<bool(const Point&)> half = [](const Point& p) { return p[0] <= 0.0; };
  CHECK(estimate_risk(yes, sampler, 500, 1, 1).value == 0.0);
  CHECK(estimate_risk(no, sampler, 500, 1, 1).value == 1.0);
  const auto r = estimate_risk(half, sampler, 40000, 5, 0);
  CHECK(r.samples == 40000);
  CHECK(std::abs(r.value - 0.5) <= 3.0 * std::sqrt(0.25 / 40000.0));
}

TEST_CASE("reach P2L on a one-dimensional trace") {
  // Init {-1, 1} gives S = [-1, 1]. 3.0 is the worst violator, then -1.5;
  // after that S = [-2.25, 3] holds everything.
  const Dataset<Point> d({{-1.0}, {1.0}, {0.5}, {3.0}, {-1.5}, {0.9}}, 2);
  const auto r = reach_p2l(d, 1, 0.05);
  CHECK(r.compression.train_list == std::vector<std::size_t>{3, 4});
  CHECK(r.compression.violation_list.empty());
  CHECK(r.eps == bounds::eps_bar({2, 4, 0.05}).eps);
  for (std::size_t i = 2; i < d.size(); ++i) CHECK(r.model.contains(d[i]));
  CHECK(r.model.contains(std::vector<double>{-2.2}));
  CHECK_FALSE(r.model.contains(std::vector<double>{-2.3}));
}

TEST_CASE("reach P2L stops at once when the initial set covers the data") {
  const Dataset<Point> d({{-1.0}, {1.0}, {0.0}, {0.5}, {-0.5}}, 2);
  const auto r = reach_p2l(d, 1, 0.01);
  CHECK(r.compression.train_list.empty());
  CHECK(r.eps == bounds::eps_bar({0, 3, 0.01}).eps);
}
