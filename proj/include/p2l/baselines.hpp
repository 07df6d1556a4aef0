#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "p2l/christoffel.hpp"
#include "p2l/core.hpp"
#include "p2l/reachability.hpp"

namespace p2l::baselines {

using reach::ChristoffelModel;
using reach::Point;

/// Training fractions to sweep, with a per-candidate confidence budget.
struct SplitPlan {
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double delta_per_fraction = 0.01;
  std::uint64_t seed = 0;
  double ridge = 0.0;

  void validate() const;
  /// 1 - (#fractions) * delta: confidence after selecting among candidates.
  double union_confidence() const;
};

/// Volume estimation settings shared by every candidate of a sweep.
struct VolumeSpec {
  reach::Box box;
  std::size_t n_samples = 100000;
  std::uint64_t seed = 0;
};

/// Seeded Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

struct Candidate {
  double fraction = 0.0;
  std::vector<std::size_t> fit_indices;
  std::vector<std::size_t> eval_indices;  // test or calibration split
  std::size_t k = 0;                      // violations (test-set) or order statistic (conformal)
  double eps = 1.0;
  bool feasible = false;
  std::optional<double> volume;
  std::optional<ChristoffelModel> model;
  std::string note;  // why the fraction was skipped, if it was
};

struct SweepResult {
  std::optional<ChristoffelModel> model;
  double eps = 1.0;
  double fraction = 0.0;
  std::size_t k = 0;
  std::size_t n_eval = 0;
  double volume = 0.0;
  bool met_target = false;  // false: fallback to the smallest-eps candidate
  std::vector<Candidate> candidates;
  std::vector<std::string> warnings;
};

/// Test-set baseline: per fraction fit on the training prefix, count the
/// violations k on the rest, eps = binomial_tail_inversion(k, |V|, delta).
/// Returns the smallest-volume candidate with eps <= target_eps.
SweepResult testset_reach(std::span<const Point> data, const SplitPlan& plan, std::size_t degree,
                          double target_eps, const VolumeSpec& volume, std::size_t workers = 0);

/// Split conformal: per fraction fit on the training prefix, score the
/// calibration split with the level, and take the set {level <= s_(k)} for the
/// order statistic k whose conformal_eps is the smallest value >= target_eps.
/// Returns the smallest-volume set over fractions.
SweepResult conformal_reach(std::span<const Point> data, const SplitPlan& plan, std::size_t degree,
                            double target_eps, const VolumeSpec& volume, std::size_t workers = 0);

/// Largest k in [1, n_cal] with conformal_eps(k, n_cal, delta) >= target, if any.
/// A target of 1 certifies nothing, so every k qualifies and k = 1 (the
/// smallest set) is returned.
std::optional<std::size_t> conformal_order_statistic(std::size_t n_cal, double delta,
                                                     double target_eps);

}  // namespace p2l::baselines
