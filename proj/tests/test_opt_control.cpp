#include <doctest.h>

#include <cmath>
#include <limits>

#include "p2l/bounds.hpp"
#include "p2l/opt_control.hpp"

using namespace p2l;
using namespace p2l::oc;

namespace {

Scenario quiet(double x0, std::size_t h = 9) { return {x0, std::vector<double>(h, 0.0)}; }

// Exhaustive argmin of the mean cost with first-index tie-breaking.
Policy rescan(const std::vector<Scenario>& train, const PolicyGrid& grid, const LinearBenchmark& b) {
  Policy best;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.points_per_axis; ++i)
    for (std::size_t j = 0; j < grid.points_per_axis; ++j) {
      double sum = 0.0;
      for (const auto& z : train) sum += rollout_cost(grid.theta1(i), grid.theta2(j), z, b);
      if (sum < best_sum) {
        best_sum = sum;
        best = grid_policy(grid, i, j);
      }
    }
  return best;
}

}  // namespace

TEST_CASE("rollout cost hand calculations") {
  const LinearBenchmark b;
  CHECK(rollout_cost(0.0, 0.0, quiet(1.0), b) ==
        doctest::Approx(5.0 * (1.0 - std::pow(0.64, 10)) / 0.36).epsilon(1e-12));
  CHECK(std::abs(rollout_cost(0.0, 0.0, quiet(1.0), b) - 13.7287) < 1e-4);
  CHECK(rollout_cost(0.0, 0.0, quiet(0.0), b) == 0.0);
  for (double c : {0.5, 1.0, 2.3, -3.0})
    CHECK(rollout_cost(-8.0, 0.0, quiet(c), b) == doctest::Approx(5.192 * c * c).epsilon(1e-9));
}

TEST_CASE("grid spacing includes the endpoints") {
  const PolicyGrid g;
  CHECK(g.theta1(0) == -18.0);
  CHECK(g.theta1(99) == 2.0);
  CHECK(g.theta2(0) == -5.0);
  CHECK(g.theta2(99) == 5.0);
  CHECK(g.size() == 10000);
}

TEST_CASE("noise parametrization") {
  LinearBenchmark b;
  CHECK(b.x0_stddev() == doctest::Approx(std::sqrt(0.009)));
  b.noise_param = NoiseParam::StdDev;
  CHECK(b.x0_stddev() == 0.009);
  b.horizon = 0;
  CHECK_THROWS(b.validate());
}

TEST_CASE("scenario sampling statistics") {
  const LinearBenchmark b;
  const auto s = sample_scenarios(b, 20000, 3);
  double m = 0.0, v = 0.0;
  for (const auto& z : s) m += z.x0 / 20000.0;
  for (const auto& z : s) v += (z.x0 - m) * (z.x0 - m) / 19999.0;
  CHECK(std::abs(m - 2.3) < 4.0 * std::sqrt(0.009 / 20000.0));
  CHECK(v == doctest::Approx(0.009).epsilon(0.05));
  CHECK(s[0].w.size() == 9);
  CHECK(sample_scenarios(b, 5, 3)[4].w == s[4].w);
}

TEST_CASE("grid synthesis is the exhaustive argmin") {
  const LinearBenchmark b;
  PolicyGrid g;
  g.points_per_axis = 25;
  const auto train = sample_scenarios(b, 6, 17);
  const Policy p = grid_synthesize(train, g, b, 1);
  const Policy r = rescan(train, g, b);
  CHECK(p.i1 == r.i1);
  CHECK(p.i2 == r.i2);

  std::vector<Scenario> rev(train.rbegin(), train.rend());
  const Policy q = grid_synthesize(rev, g, b, 1);
  CHECK(q.i1 == p.i1);
  CHECK(q.i2 == p.i2);

  // Zero scenario: +theta2 and -theta2 cost the same, so the lower index wins.
  const std::vector<Scenario> zero{quiet(0.0)};
  const Policy z = grid_synthesize(zero, PolicyGrid{}, b, 1);
  const Policy zr = rescan(zero, PolicyGrid{}, b);
  CHECK(z.i1 == zr.i1);
  CHECK(z.i2 == zr.i2);
  CHECK(z.i2 == 49);
}

TEST_CASE("incremental refit equals a full fit") {
  const LinearBenchmark b;
  PolicyGrid g;
  g.points_per_axis = 30;
  const auto synth = grid_synthesizer(g, b, 1);
  const auto s = sample_scenarios(b, 8, 5);
  GridDecision prev = synth.fit(std::span<const Scenario>(s.data(), 1));
  for (std::size_t n = 2; n <= s.size(); ++n) {
    const std::span<const Scenario> head(s.data(), n);
    const GridDecision inc = synth.refit(head, prev);
    const GridDecision full = synth.fit(head);
    CHECK(inc.cost_sums == full.cost_sums);
    CHECK(inc.policy.i1 == full.policy.i1);
    CHECK(inc.policy.i2 == full.policy.i2);
    prev = inc;
  }
}

TEST_CASE("oc P2L on small instances") {
  const LinearBenchmark b;
  PolicyGrid g;
  g.points_per_axis = 20;
  const Dataset<Scenario> d(sample_scenarios(b, 5, 9), 1);

  SUBCASE("unreachable threshold consumes everything") {
    const auto r = oc_p2l(d, b, g, 0.5, 0.05, 1);
    CHECK(r.compression.train_list.size() == 4);
    CHECK(r.eps == 1.0);
  }
  SUBCASE("generous threshold stops at once") {
    const auto r = oc_p2l(d, b, g, 1e9, 0.05, 1);
    CHECK(r.compression.train_list.empty());
    CHECK(r.eps == bounds::eps_bar({0, 4, 0.05}).eps);
  }
  SUBCASE("certified policy satisfies every unused working scenario") {
    const Dataset<Scenario> big(sample_scenarios(b, 40, 21), 1);
    const auto r = oc_p2l(big, b, g, 30.0, 0.05, 1);
    std::vector<char> used(40, 0);
    for (auto i : r.compression.train_list) used[i] = 1;
    for (std::size_t i = 1; i < 40; ++i)
      if (!used[i]) CHECK(rollout_cost(r.policy, big[i], b) <= 30.0);
  }
}

TEST_CASE("cdf certificate is monotone") {
  const LinearBenchmark b;
  PolicyGrid g;
  g.points_per_axis = 20;
  const Dataset<Scenario> d(sample_scenarios(b, 30, 2), 1);
  const std::vector<double> levels{26.0, 28.0, 30.0, 32.0, 34.0};
  const auto c = certify_cdf(d, b, g, levels, 0.01, 1);
  REQUIRE(c.levels.size() == 5);
  CHECK(c.joint_confidence == doctest::Approx(0.95));
  for (std::size_t i = 1; i < 5; ++i) CHECK(c.levels[i].eps <= c.levels[i - 1].eps);
  CHECK(c.levels.back().eps == c.run.eps);
  CHECK(c.levels.back().k == c.run.compression.train_list.size());
  CHECK_THROWS(certify_cdf(d, b, g, {3.0, 2.0}, 0.01, 1));
}

TEST_CASE("cost risk estimator") {
  const LinearBenchmark b;
  const Policy p{-8.0, 0.0, 0, 0};
  CHECK(estimate_cost_risk(p, b, 1e18, 500, 1, 1) == 0.0);
  CHECK(estimate_cost_risk(p, b, -1.0, 500, 1, 1) == 1.0);

  // Near-deterministic noise: compare with a ten times larger independent sample.
  LinearBenchmark calm = b;
  calm.x0_spread = 1e-4;
  calm.w_spread = 1e-4;
  const double thr = rollout_cost(p, Scenario{2.3, std::vector<double>(9, 0.3)}, calm) * 1.05;
  const double small = estimate_cost_risk(p, calm, thr, 4000, 8, 1);
  const double large = estimate_cost_risk(p, calm, thr, 40000, 9, 0);
  const double se = std::sqrt(std::max(large * (1 - large), 1e-6) / 4000.0);
  CHECK(std::abs(small - large) <= 3.0 * se + 1e-12);
  const auto tail = estimate_cost_tail(p, calm, {thr, 1e18}, 4000, 8, 1);
  CHECK(tail[0] == small);
  CHECK(tail[1] == 0.0);
}
