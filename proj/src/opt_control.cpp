#include "p2l/opt_control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "p2l/parallel.hpp"

namespace p2l::oc {

void LinearBenchmark::validate() const {
  if (horizon < 1) throw std::invalid_argument("LinearBenchmark: horizon must be >= 1");
  if (!(q > 0.0) || !(r > 0.0)) throw std::invalid_argument("LinearBenchmark: q, r must be > 0");
  if (x0_spread < 0.0 || w_spread < 0.0)
    throw std::invalid_argument("LinearBenchmark: spreads must be >= 0");
}

double LinearBenchmark::x0_stddev() const {
  return noise_param == NoiseParam::Variance ? std::sqrt(x0_spread) : x0_spread;
}

double LinearBenchmark::w_stddev() const {
  return noise_param == NoiseParam::Variance ? std::sqrt(w_spread) : w_spread;
}

double PolicyGrid::theta1(std::size_t i) const {
  if (points_per_axis < 2) return theta1_lo;
  return theta1_lo + (theta1_hi - theta1_lo) * static_cast<double>(i) /
                         static_cast<double>(points_per_axis - 1);
}

double PolicyGrid::theta2(std::size_t j) const {
  if (points_per_axis < 2) return theta2_lo;
  return theta2_lo + (theta2_hi - theta2_lo) * static_cast<double>(j) /
                         static_cast<double>(points_per_axis - 1);
}

Policy grid_policy(const PolicyGrid& grid, std::size_t i1, std::size_t i2) {
  if (i1 >= grid.points_per_axis || i2 >= grid.points_per_axis)
    throw std::out_of_range("grid_policy: index outside the grid");
  return {grid.theta1(i1), grid.theta2(i2), i1, i2};
}

double rollout_cost(double theta1, double theta2, const Scenario& z, const LinearBenchmark& bench) {
  if (z.w.size() != bench.horizon)
    throw std::invalid_argument("rollout_cost: scenario has " + std::to_string(z.w.size()) +
                                " noise samples, horizon is " + std::to_string(bench.horizon));
  double x = z.x0;
  double cost = 0.0;
  for (std::size_t t = 0; t < bench.horizon; ++t) {
    const double u = theta1 * x + theta2;
    cost += bench.q * x * x + bench.r * u * u;
    x = bench.a * x + bench.b * u + z.w[t];
  }
  return cost + bench.q * x * x;
}

Scenario sample_scenario(const LinearBenchmark& bench, Rng& rng) {
  Scenario z;
  z.x0 = rng.normal(bench.x0_mean, bench.x0_stddev());
  z.w.resize(bench.horizon);
  const double sw = bench.w_stddev();
  for (double& w : z.w) w = rng.normal(bench.w_mean, sw);
  return z;
}

std::vector<Scenario> sample_scenarios(const LinearBenchmark& bench, std::size_t n,
                                       std::uint64_t seed) {
  std::vector<Scenario> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    out.push_back(sample_scenario(bench, rng));
  }
  return out;
}

namespace {

// Adds J(theta, z) to every grid cell, row by row in parallel.
void accumulate(std::vector<double>& sums, const Scenario& z, const PolicyGrid& grid,
                const LinearBenchmark& bench, std::size_t workers) {
  const std::size_t n = grid.points_per_axis;
  parallel_for(
      n,
      [&](std::size_t i1) {
        const double th1 = grid.theta1(i1);
        for (std::size_t i2 = 0; i2 < n; ++i2)
          sums[i1 * n + i2] += rollout_cost(th1, grid.theta2(i2), z, bench);
      },
      workers);
}

Policy argmin(const std::vector<double>& sums, const PolicyGrid& grid) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < sums.size(); ++c)
    if (sums[c] < sums[best]) best = c;
  return grid_policy(grid, best / grid.points_per_axis, best % grid.points_per_axis);
}

GridDecision fit_from_scratch(std::span<const Scenario> train, const PolicyGrid& grid,
                              const LinearBenchmark& bench, std::size_t workers) {
  if (train.empty()) throw std::invalid_argument("grid_synthesize: empty training list");
  GridDecision d;
  d.cost_sums.assign(grid.size(), 0.0);
  for (const auto& z : train) accumulate(d.cost_sums, z, grid, bench, workers);
  d.fitted_on = train.size();
  d.policy = argmin(d.cost_sums, grid);
  return d;
}

}  // namespace

Policy grid_synthesize(std::span<const Scenario> train, const PolicyGrid& grid,
                       const LinearBenchmark& bench, std::size_t workers) {
  return fit_from_scratch(train, grid, bench, workers).policy;
}

Synthesizer<Scenario, GridDecision> grid_synthesizer(const PolicyGrid& grid,
                                                     const LinearBenchmark& bench,
                                                     std::size_t workers) {
  Synthesizer<Scenario, GridDecision> s;
  s.fit = [grid, bench, workers](std::span<const Scenario> train) {
    return fit_from_scratch(train, grid, bench, workers);
  };
  s.refit = [grid, bench, workers](std::span<const Scenario> train, const GridDecision& prev) {
    if (train.empty() || prev.fitted_on + 1 != train.size() || prev.cost_sums.size() != grid.size())
      return fit_from_scratch(train, grid, bench, workers);
    GridDecision d;
    d.cost_sums = prev.cost_sums;
    accumulate(d.cost_sums, train.back(), grid, bench, workers);
    d.fitted_on = train.size();
    d.policy = argmin(d.cost_sums, grid);
    return d;
  };
  return s;
}

OcResult oc_p2l(const Dataset<Scenario>& data, const LinearBenchmark& bench,
                const PolicyGrid& grid, double j_bar, double delta, std::size_t workers) {
  bench.validate();
  if (data.n_init() == 0)
    throw std::invalid_argument("oc_p2l: at least one initialisation scenario is required");
  const std::vector<Scenario> init(data.init_points().begin(), data.init_points().end());
  const auto base = grid_synthesizer(grid, bench, workers);

  // L sees the initialisation scenarios followed by T.
  Synthesizer<Scenario, GridDecision> synth;
  synth.fit = [&](std::span<const Scenario> train) {
    std::vector<Scenario> all = init;
    all.insert(all.end(), train.begin(), train.end());
    return base.fit(all);
  };
  synth.refit = [&](std::span<const Scenario> train, const GridDecision& prev) {
    std::vector<Scenario> all = init;
    all.insert(all.end(), train.begin(), train.end());
    return base.refit(all, prev);
  };
  const Property<Scenario, GridDecision> within = [&](const GridDecision& h, const Scenario& z) {
    return rollout_cost(h.policy, z, bench) <= j_bar;
  };
  const Dissatisfaction<Scenario, GridDecision> cost = [&](const GridDecision& h,
                                                           const Scenario& z) {
    return rollout_cost(h.policy, z, bench);
  };

  auto compression = run_p2l(data, synth, within, cost, base.fit(init));
  const double eps = certify(compression, delta, data.working_size());
  const Policy policy = compression.decision.policy;
  return {policy, std::move(compression), eps};
}

CdfCertificate certify_cdf(const Dataset<Scenario>& data, const LinearBenchmark& bench,
                           const PolicyGrid& grid, const std::vector<double>& levels,
                           double delta_per_level, std::size_t workers) {
  if (levels.empty()) throw std::invalid_argument("certify_cdf: no levels");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (!(levels[i] > levels[i - 1]))
      throw std::invalid_argument("certify_cdf: levels must be strictly increasing");

  CdfCertificate out;
  out.run = oc_p2l(data, bench, grid, levels.back(), delta_per_level, workers);
  out.delta_per_level = delta_per_level;
  out.joint_confidence = 1.0 - static_cast<double>(levels.size()) * delta_per_level;

  std::vector<char> in_train(data.size(), 0);
  for (std::size_t i : out.run.compression.train_list) in_train[i] = 1;
  std::vector<double> unused_costs;
  for (std::size_t i = data.n_init(); i < data.size(); ++i)
    if (!in_train[i]) unused_costs.push_back(rollout_cost(out.run.policy, data[i], bench));

  const std::size_t t_size = out.run.compression.train_list.size();
  for (double gamma : levels) {
    const auto u = static_cast<std::size_t>(
        std::count_if(unused_costs.begin(), unused_costs.end(), [&](double c) { return c > gamma; }));
    const std::size_t k = t_size + u;
    out.levels.push_back({gamma, k, bounds::eps_bar({k, data.working_size(), delta_per_level}).eps});
  }
  return out;
}

std::vector<double> estimate_cost_tail(const Policy& policy, const LinearBenchmark& bench,
                                       const std::vector<double>& gammas, std::size_t n_mc,
                                       std::uint64_t seed, std::size_t workers) {
  if (n_mc == 0) throw std::invalid_argument("estimate_cost_tail: n_mc must be >= 1");
  std::vector<double> costs(n_mc);
  parallel_for(
      n_mc,
      [&](std::size_t i) {
        Rng rng(derive_seed(seed, i));
        costs[i] = rollout_cost(policy, sample_scenario(bench, rng), bench);
      },
      workers);
  std::vector<double> tail;
  tail.reserve(gammas.size());
  for (double g : gammas) {
    const auto above = std::count_if(costs.begin(), costs.end(), [&](double c) { return c > g; });
    tail.push_back(static_cast<double>(above) / static_cast<double>(n_mc));
  }
  return tail;
}

double estimate_cost_risk(const Policy& policy, const LinearBenchmark& bench, double threshold,
                          std::size_t n_mc, std::uint64_t seed, std::size_t workers) {
  return estimate_cost_tail(policy, bench, {threshold}, n_mc, seed, workers).front();
}

}  // namespace p2l::oc
