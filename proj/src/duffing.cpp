#include "p2l/duffing.hpp"

#include <cmath>
#include <sstream>

#include "p2l/parallel.hpp"

namespace p2l::reach {

void DuffingConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("DuffingConfig: dt must be > 0");
  if (!(t1 > t0)) throw std::invalid_argument("DuffingConfig: t1 must exceed t0");
}

DuffingIntegrator::DuffingIntegrator(const DuffingConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const double span = cfg_.t1 - cfg_.t0;
  steps_ = static_cast<std::size_t>(std::ceil(span / cfg_.dt - 1e-9));
  if (steps_ == 0) steps_ = 1;
  h_ = span / static_cast<double>(steps_);
  forcing_.resize(2 * steps_ + 1);
  for (std::size_t j = 0; j < forcing_.size(); ++j) {
    const double t = cfg_.t0 + 0.5 * h_ * static_cast<double>(j);
    forcing_[j] = cfg_.gamma_forcing * std::cos(cfg_.omega * t);
  }
}

State2 DuffingIntegrator::terminal(const State2& x0) const {
  const double a = cfg_.alpha_damping;
  double x1 = x0[0];
  double x2 = x0[1];
  const double h = h_;
  for (std::size_t s = 0; s < steps_; ++s) {
    const double f0 = forcing_[2 * s];
    const double fm = forcing_[2 * s + 1];
    const double f1 = forcing_[2 * s + 2];

    const double k1x = x2;
    const double k1v = x1 * (1.0 - x1 * x1) - a * x2 + f0;
    double y1 = x1 + 0.5 * h * k1x;
    double y2 = x2 + 0.5 * h * k1v;
    const double k2x = y2;
    const double k2v = y1 * (1.0 - y1 * y1) - a * y2 + fm;
    y1 = x1 + 0.5 * h * k2x;
    y2 = x2 + 0.5 * h * k2v;
    const double k3x = y2;
    const double k3v = y1 * (1.0 - y1 * y1) - a * y2 + fm;
    y1 = x1 + h * k3x;
    y2 = x2 + h * k3v;
    const double k4x = y2;
    const double k4v = y1 * (1.0 - y1 * y1) - a * y2 + f1;

    x1 += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    x2 += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!std::isfinite(x1) || !std::isfinite(x2)) {
      std::ostringstream msg;
      msg << "duffing: non-finite state at t = " << cfg_.t0 + h * static_cast<double>(s + 1)
          << " from x0 = (" << x0[0] << ", " << x0[1] << ")";
      throw std::runtime_error(msg.str());
    }
  }
  return {x1, x2};
}

State2 duffing_terminal(const State2& x0, const DuffingConfig& cfg) {
  return DuffingIntegrator(cfg).terminal(x0);
}

State2 InitDistribution::sample(Rng& rng) const {
  switch (kind) {
    case Kind::UniformBox:
      return {rng.uniform(a[0], b[0]), rng.uniform(a[1], b[1])};
    case Kind::Gaussian:
      return {rng.normal(a[0], b[0]), rng.normal(a[1], b[1])};
  }
  return a;
}

std::vector<std::vector<double>> generate_terminal_states(const DuffingConfig& cfg,
                                                          const InitDistribution& init,
                                                          std::size_t n, std::uint64_t seed,
                                                          std::size_t workers) {
  const DuffingIntegrator integrator(cfg);
  std::vector<std::vector<double>> out(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        Rng rng(derive_seed(seed, i));
        const State2 x = integrator.terminal(init.sample(rng));
        out[i] = {x[0], x[1]};
      },
      workers);
  return out;
}

}  // namespace p2l::reach
