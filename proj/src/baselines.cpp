#include "p2l/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "p2l/bounds.hpp"

namespace p2l::baselines {

void SplitPlan::validate() const {
  if (fractions.empty()) throw std::invalid_argument("SplitPlan: no fractions");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] < 1.0))
      throw std::invalid_argument("SplitPlan: fractions must lie in (0, 1)");
    if (i > 0 && !(fractions[i] > fractions[i - 1]))
      throw std::invalid_argument("SplitPlan: fractions must be strictly increasing");
  }
  if (!(delta_per_fraction > 0.0 && delta_per_fraction < 1.0))
    throw std::invalid_argument("SplitPlan: delta must lie in (0, 1)");
}

double SplitPlan::union_confidence() const {
  return 1.0 - static_cast<double>(fractions.size()) * delta_per_fraction;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    // Lemire-free modulo reduction; bias is below 2^-40 for the sizes in use.
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::optional<std::size_t> conformal_order_statistic(std::size_t n_cal, double delta,
                                                     double target_eps) {
  // conformal_eps decreases in k; find the last k with eps >= target.
  if (n_cal > 0 && target_eps >= 1.0) return 1;  // vacuous target: every k qualifies
  if (n_cal == 0 || bounds::conformal_eps(1, n_cal, delta) < target_eps) return std::nullopt;
  std::size_t lo = 1;      // eps(lo) >= target
  std::size_t hi = n_cal;  // search range upper end
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (bounds::conformal_eps(mid, n_cal, delta) >= target_eps)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

namespace {

struct Split {
  std::vector<std::size_t> fit;
  std::vector<std::size_t> eval;
};

Split split_at(const std::vector<std::size_t>& perm, double fraction) {
  const std::size_t n = perm.size();
  auto n_fit = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  n_fit = std::clamp<std::size_t>(n_fit, 1, n - 1);
  return {{perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_fit)},
          {perm.begin() + static_cast<std::ptrdiff_t>(n_fit), perm.end()}};
}

std::vector<Point> gather(std::span<const Point> data, const std::vector<std::size_t>& idx) {
  std::vector<Point> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data[i]);
  return out;
}

// Smallest volume among feasible candidates; ties keep the smaller fraction.
std::optional<std::size_t> pick_min_volume(const std::vector<Candidate>& cands) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!cands[i].feasible || !cands[i].volume) continue;
    if (!best || *cands[i].volume < *cands[*best].volume) best = i;
  }
  return best;
}

void fill_result(SweepResult& out, const Candidate& c, bool met) {
  out.model = c.model;
  out.eps = c.eps;
  out.fraction = c.fraction;
  out.k = c.k;
  out.n_eval = c.eval_indices.size();
  out.volume = c.volume.value_or(0.0);
  out.met_target = met;
}

void require_data(std::span<const Point> data) {
  if (data.size() < 2) throw std::invalid_argument("baseline sweep: need at least two points");
}

}  // namespace

SweepResult testset_reach(std::span<const Point> data, const SplitPlan& plan, std::size_t degree,
                          double target_eps, const VolumeSpec& volume, std::size_t workers) {
  plan.validate();
  require_data(data);
  const reach::MonomialBasis basis(data.front().size(), degree);
  const auto perm = shuffled_indices(data.size(), plan.seed);

  SweepResult out;
  for (double fraction : plan.fractions) {
    Candidate c;
    c.fraction = fraction;
    auto split = split_at(perm, fraction);
    c.fit_indices = std::move(split.fit);
    c.eval_indices = std::move(split.eval);
    try {
      c.model = reach::fit_christoffel(gather(data, c.fit_indices), basis, plan.ridge);
    } catch (const std::exception& e) {
      c.note = e.what();
      out.warnings.push_back("test-set: skipping fraction " + std::to_string(fraction) + ": " +
                             e.what());
      out.candidates.push_back(std::move(c));
      continue;
    }
    c.k = static_cast<std::size_t>(std::count_if(
        c.eval_indices.begin(), c.eval_indices.end(),
        [&](std::size_t i) { return !c.model->contains(data[i]); }));
    c.eps = bounds::binomial_tail_inversion(c.k, c.eval_indices.size(), plan.delta_per_fraction);
    c.feasible = c.eps <= target_eps;
    if (c.feasible)
      c.volume = reach::volume_mc(*c.model, volume.box, volume.n_samples, volume.seed, workers).value;
    out.candidates.push_back(std::move(c));
  }

  if (auto best = pick_min_volume(out.candidates)) {
    fill_result(out, out.candidates[*best], true);
    return out;
  }
  // Nothing meets the target: report the tightest certificate instead.
  std::optional<std::size_t> tightest;
  for (std::size_t i = 0; i < out.candidates.size(); ++i)
    if (out.candidates[i].model && (!tightest || out.candidates[i].eps < out.candidates[*tightest].eps))
      tightest = i;
  if (!tightest) throw std::runtime_error("testset_reach: every fraction failed to fit");
  auto& c = out.candidates[*tightest];
  c.volume = reach::volume_mc(*c.model, volume.box, volume.n_samples, volume.seed, workers).value;
  fill_result(out, c, false);
  out.warnings.push_back("test-set: no fraction reached eps <= " + std::to_string(target_eps));
  return out;
}

SweepResult conformal_reach(std::span<const Point> data, const SplitPlan& plan, std::size_t degree,
                            double target_eps, const VolumeSpec& volume, std::size_t workers) {
  plan.validate();
  require_data(data);
  const reach::MonomialBasis basis(data.front().size(), degree);
  const auto perm = shuffled_indices(data.size(), plan.seed);

  SweepResult out;
  for (double fraction : plan.fractions) {
    Candidate c;
    c.fraction = fraction;
    auto split = split_at(perm, fraction);
    c.fit_indices = std::move(split.fit);
    c.eval_indices = std::move(split.eval);
    std::optional<ChristoffelModel> fitted;
    try {
      fitted = reach::fit_christoffel(gather(data, c.fit_indices), basis, plan.ridge);
    } catch (const std::exception& e) {
      c.note = e.what();
      out.warnings.push_back("conformal: skipping fraction " + std::to_string(fraction) + ": " +
                             e.what());
      out.candidates.push_back(std::move(c));
      continue;
    }

    const std::size_t n_cal = c.eval_indices.size();
    const auto k = conformal_order_statistic(n_cal, plan.delta_per_fraction, target_eps);
    if (!k) {
      c.note = "no order statistic reaches the target";
      out.warnings.push_back("conformal: dropping fraction " + std::to_string(fraction) + ": " +
                             c.note);
      out.candidates.push_back(std::move(c));
      continue;
    }
    // Scores sorted by (score, index); s_(k) is the k-th smallest.
    std::vector<std::pair<double, std::size_t>> scores;
    scores.reserve(n_cal);
    for (std::size_t i : c.eval_indices) scores.emplace_back(fitted->level(data[i]), i);
    std::sort(scores.begin(), scores.end());
    c.k = *k;
    c.eps = bounds::conformal_eps(c.k, n_cal, plan.delta_per_fraction);
    c.model = fitted->with_alpha(scores[c.k - 1].first);
    c.feasible = true;
    c.volume = reach::volume_mc(*c.model, volume.box, volume.n_samples, volume.seed, workers).value;
    out.candidates.push_back(std::move(c));
  }
  const auto best = pick_min_volume(out.candidates);
  if (!best) throw std::runtime_error("conformal_reach: no fraction can reach the target eps");
  fill_result(out, out.candidates[*best], true);
  return out;
}

}  // namespace p2l::baselines
