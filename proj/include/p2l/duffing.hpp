#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "p2l/rng.hpp"

namespace p2l::reach {

/// Forced Duffing oscillator
///   x1' = x2,  x2' = x1 (1 - x1^2) - alpha x2 + gamma cos(omega t).
struct DuffingConfig {
  double alpha_damping = 0.05;
  double gamma_forcing = 0.4;
  double omega = 1.3;
  double t0 = 0.0;
  double t1 = 100.0;
  double dt = 0.01;

  void validate() const;
};

using State2 = std::array<double, 2>;

/// Classical fixed-step RK4 from t0 to t1. The step count is ceil((t1-t0)/dt)
/// with the step shrunk to land exactly on t1. The forcing is tabulated once,
/// so one integrator can propagate many initial states cheaply.
class DuffingIntegrator {
 public:
  explicit DuffingIntegrator(const DuffingConfig& cfg);

  /// Throws std::runtime_error if the state stops being finite.
  State2 terminal(const State2& x0) const;

  std::size_t steps() const { return steps_; }
  double step() const { return h_; }

 private:
  DuffingConfig cfg_;
  std::size_t steps_ = 0;
  double h_ = 0.0;
  std::vector<double> forcing_;  // gamma cos(omega t) at t0 + j h/2, j = 0..2 steps
};

State2 duffing_terminal(const State2& x0, const DuffingConfig& cfg);

/// Initial-state sampler: uniform on a box or independent Gaussians.
struct InitDistribution {
  enum class Kind { UniformBox, Gaussian };
  Kind kind = Kind::UniformBox;
  State2 a{0.9, 0.9};  // box lower corner, or mean
  State2 b{1.1, 1.1};  // box upper corner, or standard deviation

  State2 sample(Rng& rng) const;
};

/// n terminal states; state i starts from a draw of stream derive_seed(seed, i).
std::vector<std::vector<double>> generate_terminal_states(const DuffingConfig& cfg,
                                                          const InitDistribution& init,
                                                          std::size_t n, std::uint64_t seed,
                                                          std::size_t workers = 0);

}  // namespace p2l::reach
