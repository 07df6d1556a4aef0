#include "p2l/reachability.hpp"

#include <algorithm>
#include <cmath>

namespace p2l::reach {

namespace {
constexpr std::size_t kChunk = 4096;
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

Box Box::around(std::span<const Point> points, double margin) {
  if (points.empty()) throw std::invalid_argument("Box::around: no points");
  const std::size_t n_x = points.front().size();
  Box b{points.front(), points.front()};
  for (const auto& p : points)
    for (std::size_t i = 0; i < n_x; ++i) {
      b.lo[i] = std::min(b.lo[i], p[i]);
      b.hi[i] = std::max(b.hi[i], p[i]);
    }
  for (std::size_t i = 0; i < n_x; ++i) {
    const double pad = margin * (b.hi[i] - b.lo[i]);
    b.lo[i] -= pad;
    b.hi[i] += pad;
  }
  return b;
}

MonteCarloEstimate volume_mc(const ChristoffelModel& model, const Box& box, std::size_t n_samples,
                             std::uint64_t seed, std::size_t workers) {
  if (n_samples == 0) throw std::invalid_argument("volume_mc: n_samples must be >= 1");
  const std::size_t n_x = model.basis().n_x();
  if (box.lo.size() != n_x || box.hi.size() != n_x)
    throw std::invalid_argument("volume_mc: box dimension mismatch");

  const std::size_t n_chunks = (n_samples + kChunk - 1) / kChunk;
  std::vector<std::size_t> hits(n_chunks, 0);
  parallel_for(
      n_chunks,
      [&](std::size_t c) {
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(n_samples, begin + kChunk);
        Eigen::MatrixXd pts(static_cast<Eigen::Index>(end - begin), static_cast<Eigen::Index>(n_x));
        for (std::size_t i = begin; i < end; ++i) {
          Rng rng(derive_seed(seed, i));
          for (std::size_t k = 0; k < n_x; ++k)
            pts(static_cast<Eigen::Index>(i - begin), static_cast<Eigen::Index>(k)) =
                rng.uniform(box.lo[k], box.hi[k]);
        }
        const Eigen::VectorXd lv = model.levels(pts);
        hits[c] = static_cast<std::size_t>((lv.array() <= model.alpha()).count());
      },
      workers);
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  const double n = static_cast<double>(n_samples);
  const double p = static_cast<double>(total) / n;
  const double vol = box.volume();
  return {p * vol, vol * std::sqrt(p * (1.0 - p) / n), total, n_samples};
}

MonteCarloEstimate violation_fraction(const ChristoffelModel& model, const Eigen::MatrixXd& points,
                                      std::size_t workers) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw std::invalid_argument("violation_fraction: no points");
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::size_t> misses(n_chunks, 0);
  parallel_for(
      n_chunks,
      [&](std::size_t c) {
        const auto begin = static_cast<Eigen::Index>(c * kChunk);
        const auto len = static_cast<Eigen::Index>(std::min(kChunk, n - c * kChunk));
        const Eigen::VectorXd lv = model.levels(points.middleRows(begin, len));
        misses[c] = static_cast<std::size_t>((lv.array() > model.alpha()).count());
      },
      workers);
  std::size_t total = 0;
  for (std::size_t m : misses) total += m;
  const double p = static_cast<double>(total) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), total, n};
}

ReachResult reach_p2l(const Dataset<Point>& data, std::size_t degree, double delta, double ridge) {
  if (data.n_init() == 0)
    throw std::invalid_argument("reach_p2l: at least one initialisation point is required");
  const MonomialBasis basis(data.points().front().size(), degree);
  const std::vector<Point> init(data.init_points().begin(), data.init_points().end());

  Synthesizer<Point, ChristoffelModel> synth;
  synth.fit = [&](std::span<const Point> train) {
    std::vector<Point> all = init;
    all.insert(all.end(), train.begin(), train.end());
    return fit_christoffel(all, basis, ridge);
  };
  const Property<Point, ChristoffelModel> inside = [](const ChristoffelModel& m, const Point& z) {
    return m.contains(z);
  };
  const Dissatisfaction<Point, ChristoffelModel> level = [](const ChristoffelModel& m,
                                                            const Point& z) { return m.level(z); };

  auto compression = run_p2l(data, synth, inside, level, fit_christoffel(init, basis, ridge));
  const double eps = certify(compression, delta, data.working_size());
  ChristoffelModel model = compression.decision;
  return {std::move(model), std::move(compression), eps};
}

}  // namespace p2l::reach
