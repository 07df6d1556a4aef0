#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "p2l/core.hpp"
#include "p2l/rng.hpp"

namespace p2l::oc {

/// How the second parameter of N(mean, s) is read.
enum class NoiseParam { Variance, StdDev };

/// Scalar system x_{t+1} = a x_t + b u_t + w_t with stage cost q x^2 + r u^2.
struct LinearBenchmark {
  double a = 0.8;
  double b = 0.1;
  std::size_t horizon = 9;
  double q = 5.0;
  double r = 0.003;
  double x0_mean = 2.3;
  double x0_spread = 0.009;
  double w_mean = 0.3;
  double w_spread = 0.009;
  NoiseParam noise_param = NoiseParam::Variance;

  void validate() const;
  double x0_stddev() const;
  double w_stddev() const;
};

/// theta1 x [lo1, hi1], theta2 x [lo2, hi2], equally spaced, endpoints included.
struct PolicyGrid {
  double theta1_lo = -18.0;
  double theta1_hi = 2.0;
  double theta2_lo = -5.0;
  double theta2_hi = 5.0;
  std::size_t points_per_axis = 100;

  double theta1(std::size_t i) const;
  double theta2(std::size_t j) const;
  std::size_t size() const { return points_per_axis * points_per_axis; }
};

struct Scenario {
  double x0 = 0.0;
  std::vector<double> w;  // length H
};

/// u_t = theta1 x_t + theta2.
struct Policy {
  double theta1 = 0.0;
  double theta2 = 0.0;
  std::size_t i1 = 0;
  std::size_t i2 = 0;
};

Policy grid_policy(const PolicyGrid& grid, std::size_t i1, std::size_t i2);

/// sum_{t<H} (q x_t^2 + r u_t^2) + q x_H^2. The input at t = H is not defined,
/// so the terminal term carries no input cost.
double rollout_cost(double theta1, double theta2, const Scenario& z, const LinearBenchmark& bench);
inline double rollout_cost(const Policy& p, const Scenario& z, const LinearBenchmark& bench) {
  return rollout_cost(p.theta1, p.theta2, z, bench);
}

Scenario sample_scenario(const LinearBenchmark& bench, Rng& rng);

/// n scenarios; scenario i drawn from stream derive_seed(seed, i).
std::vector<Scenario> sample_scenarios(const LinearBenchmark& bench, std::size_t n,
                                       std::uint64_t seed);

/// Grid decision plus the per-policy cost sums over the list it was fit on,
/// which lets the next fit add one scenario instead of rescanning all of T.
struct GridDecision {
  Policy policy;
  std::vector<double> cost_sums;  // row-major (i1, i2)
  std::size_t fitted_on = 0;
};

/// Empirical-mean minimiser over all grid policies; ties go to the smallest
/// (theta1 index, theta2 index).
Policy grid_synthesize(std::span<const Scenario> train, const PolicyGrid& grid,
                       const LinearBenchmark& bench, std::size_t workers = 0);

/// Synthesizer for the P2L loop. `refit` reuses the previous sums when the
/// list grew by exactly one scenario; results equal a full rescan bit for bit.
Synthesizer<Scenario, GridDecision> grid_synthesizer(const PolicyGrid& grid,
                                                     const LinearBenchmark& bench,
                                                     std::size_t workers = 0);

struct OcResult {
  Policy policy;
  CompressionResult<GridDecision> compression;
  double eps = 1.0;
};

/// P2L with phi: J <= j_bar, dissatisfaction J, N_i = data.n_init() (1 in the
/// benchmark). eps = eps_bar(|T|, delta, N - N_i).
OcResult oc_p2l(const Dataset<Scenario>& data, const LinearBenchmark& bench,
                const PolicyGrid& grid, double j_bar, double delta, std::size_t workers = 0);

struct LevelCertificate {
  double gamma = 0.0;
  std::size_t k = 0;  // |T| + |U_gamma|
  double eps = 1.0;
};

struct CdfCertificate {
  OcResult run;  // P2L at the largest level
  std::vector<LevelCertificate> levels;
  double delta_per_level = 0.0;
  double joint_confidence = 0.0;  // 1 - r delta
};

/// One P2L run at J_bar = max(levels); then per level, U = unused working
/// scenarios with J > gamma and eps = eps_bar(|T| + |U|, delta, N - N_i).
CdfCertificate certify_cdf(const Dataset<Scenario>& data, const LinearBenchmark& bench,
                           const PolicyGrid& grid, const std::vector<double>& levels,
                           double delta_per_level, std::size_t workers = 0);

/// Fraction of fresh scenarios with J > threshold.
double estimate_cost_risk(const Policy& policy, const LinearBenchmark& bench, double threshold,
                          std::size_t n_mc, std::uint64_t seed, std::size_t workers = 0);

/// Empirical tail P[J > gamma] for each gamma, on one shared fresh sample.
std::vector<double> estimate_cost_tail(const Policy& policy, const LinearBenchmark& bench,
                                       const std::vector<double>& gammas, std::size_t n_mc,
                                       std::uint64_t seed, std::size_t workers = 0);

}  // namespace p2l::oc
