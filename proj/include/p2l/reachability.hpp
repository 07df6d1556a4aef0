#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "p2l/christoffel.hpp"
#include "p2l/core.hpp"
#include "p2l/parallel.hpp"
#include "p2l/rng.hpp"

namespace p2l::reach {

/// Axis-aligned box [lo, hi].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  double volume() const;
  /// Bounding box of the points, widened on each side by margin * extent.
  static Box around(std::span<const Point> points, double margin);
};

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t hits = 0;
  std::size_t samples = 0;
};

/// Volume of {level <= alpha} inside `box` by uniform sampling. Sample i is
/// drawn from stream derive_seed(seed, i), so the same seed gives the same
/// sample cloud for every model (common random numbers across methods).
MonteCarloEstimate volume_mc(const ChristoffelModel& model, const Box& box, std::size_t n_samples,
                             std::uint64_t seed, std::size_t workers = 0);

/// Fraction of fresh draws outside `membership`. Sample i uses its own stream.
template <class P>
MonteCarloEstimate estimate_risk(const std::function<bool(const P&)>& membership,
                                 const std::function<P(Rng&)>& sampler, std::size_t n_mc,
                                 std::uint64_t seed, std::size_t workers = 0) {
  if (n_mc == 0) throw std::invalid_argument("estimate_risk: n_mc must be >= 1");
  std::vector<char> miss(n_mc, 0);
  parallel_for(
      n_mc,
      [&](std::size_t i) {
        Rng rng(derive_seed(seed, i));
        miss[i] = membership(sampler(rng)) ? 0 : 1;
      },
      workers);
  std::size_t misses = 0;
  for (char m : miss) misses += static_cast<std::size_t>(m);
  const double n = static_cast<double>(n_mc);
  const double p = static_cast<double>(misses) / n;
  return {p, std::sqrt(p * (1.0 - p) / n), misses, n_mc};
}

/// Fraction of `points` outside the model's sublevel set.
MonteCarloEstimate violation_fraction(const ChristoffelModel& model, const Eigen::MatrixXd& points,
                                      std::size_t workers = 0);

struct ReachResult {
  ChristoffelModel model;
  CompressionResult<ChristoffelModel> compression;
  double eps = 1.0;
};

/// P2L over terminal states. The initial decision is fitted on the first
/// N_i points; every resynthesis refits on those points plus T. phi is
/// membership, dissatisfaction is the level. eps = eps_bar(|T|, delta, N - N_i).
ReachResult reach_p2l(const Dataset<Point>& data, std::size_t degree, double delta,
                      double ridge = 0.0);

}  // namespace p2l::reach
