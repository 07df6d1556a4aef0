#pragma once

// Generic Pick-to-Learn meta-algorithms: the basic loop driven by a
// dissatisfaction score, the order/Stop generalisation returning (h, T, U),
// the time-triggered variant, and the single-pass sweep over all stop times.

#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "p2l/bounds.hpp"

namespace p2l {

/// Ordered data points with stable indices 0..N-1. The first n_init points
/// seed the initial decision; the rest form the working set.
template <class Point>
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Point> points, std::size_t n_init = 0)
      : points_(std::move(points)), n_init_(n_init) {
    if (n_init_ >= points_.size())
      throw std::invalid_argument("Dataset: working set must be nonempty (N = " +
                                  std::to_string(points_.size()) +
                                  ", N_i = " + std::to_string(n_init_) + ")");
  }

  std::size_t size() const { return points_.size(); }
  std::size_t n_init() const { return n_init_; }
  std::size_t working_size() const { return points_.size() - n_init_; }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point> points() const { return points_; }
  std::span<const Point> init_points() const { return {points_.data(), n_init_}; }
  std::span<const Point> working_points() const {
    return {points_.data() + n_init_, working_size()};
  }

 private:
  std::vector<Point> points_;
  std::size_t n_init_ = 0;
};

/// The synthesis algorithm L. `fit` must be a deterministic function of the
/// ordered list it receives. `refit`, when set, receives the previous decision
/// as a warm start; it must still depend only on the list.
template <class Point, class Decision>
struct Synthesizer {
  std::function<Decision(std::span<const Point>)> fit;
  std::function<Decision(std::span<const Point>, const Decision&)> refit;

  Decision operator()(std::span<const Point> train, const Decision& previous) const {
    if (refit) return refit(train, previous);
    return fit(train);
  }
};

/// The property phi(h, z); true means satisfied.
template <class Point, class Decision>
using Property = std::function<bool(const Decision&, const Point&)>;

/// Degree of dissatisfaction; larger is worse.
template <class Point, class Decision>
using Dissatisfaction = std::function<double(const Decision&, const Point&)>;

/// What an order may look at: the current training list and decision.
template <class Point, class Decision>
struct LoopState {
  std::span<const Point> train;
  const Decision& decision;
};

/// Total order <=_T over the data extended with Stop. `key` ranks points
/// (larger is higher); equal keys fall back to the smaller dataset index.
/// `exceeds_stop` encodes Stop <=_T z.
template <class Point, class Decision, class Key = double>
struct OrderContract {
  std::function<Key(const LoopState<Point, Decision>&, const Point&)> key;
  std::function<bool(const LoopState<Point, Decision>&, const Point&, const Key&)> exceeds_stop;
};

template <class Decision>
struct CompressionResult {
  Decision decision;
  std::vector<std::size_t> train_list;      // T, in append order
  std::vector<std::size_t> violation_list;  // U, ascending index
  std::size_t iterations = 0;

  std::size_t compression_size() const { return train_list.size() + violation_list.size(); }
};

/// Raised when L throws; carries the list it was called on.
class SynthesisError : public std::runtime_error {
 public:
  SynthesisError(const std::string& what, std::vector<std::size_t> train)
      : std::runtime_error(what), train_list(std::move(train)) {}
  std::vector<std::size_t> train_list;
};

namespace detail {

template <class Point>
std::vector<Point> gather(const Dataset<Point>& data, const std::vector<std::size_t>& idx) {
  std::vector<Point> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data[i]);
  return out;
}

template <class Point, class Decision>
Decision synthesize(const Synthesizer<Point, Decision>& synth, const std::vector<Point>& train,
                    const Decision& previous, const std::vector<std::size_t>& train_idx) {
  try {
    return synth(std::span<const Point>(train), previous);
  } catch (const std::exception& e) {
    throw SynthesisError(std::string("synthesis failed at |T| = ") +
                             std::to_string(train_idx.size()) + ": " + e.what(),
                         train_idx);
  }
}

template <class Point, class Decision>
std::vector<std::size_t> violators(const Dataset<Point>& data, const std::vector<char>& in_train,
                                   const Property<Point, Decision>& prop, const Decision& h) {
  std::vector<std::size_t> out;
  for (std::size_t i = data.n_init(); i < data.size(); ++i)
    if (!in_train[i] && !prop(h, data[i])) out.push_back(i);
  return out;
}

}  // namespace detail

/// Basic P2L: while some unused working point violates phi, append the most
/// dissatisfied one and resynthesize. Ties go to the smaller index.
template <class Point, class Decision>
CompressionResult<Decision> run_p2l(const Dataset<Point>& data,
                                    const Synthesizer<Point, Decision>& synth,
                                    const Property<Point, Decision>& prop,
                                    const Dissatisfaction<Point, Decision>& dissatisfaction,
                                    Decision init_decision) {
  CompressionResult<Decision> res{std::move(init_decision), {}, {}, 0};
  std::vector<char> in_train(data.size(), 0);
  std::vector<Point> train;
  while (true) {
    std::optional<std::size_t> worst;
    double worst_score = 0.0;
    for (std::size_t i = data.n_init(); i < data.size(); ++i) {
      if (in_train[i] || prop(res.decision, data[i])) continue;
      const double s = dissatisfaction(res.decision, data[i]);
      if (!worst || s > worst_score) {
        worst = i;
        worst_score = s;
      }
    }
    if (!worst) break;
    in_train[*worst] = 1;
    res.train_list.push_back(*worst);
    train.push_back(data[*worst]);
    res.decision = detail::synthesize(synth, train, res.decision, res.train_list);
    ++res.iterations;
  }
  return res;
}

/// P2L+: append max_{<=_T}(D \ T) while some unused point exceeds Stop, then
/// collect the phi-violators among the unused working points into U.
template <class Point, class Decision, class Key>
CompressionResult<Decision> run_p2l_plus(const Dataset<Point>& data,
                                         const Synthesizer<Point, Decision>& synth,
                                         const OrderContract<Point, Decision, Key>& order,
                                         const Property<Point, Decision>& prop,
                                         Decision init_decision) {
  CompressionResult<Decision> res{std::move(init_decision), {}, {}, 0};
  std::vector<char> in_train(data.size(), 0);
  std::vector<Point> train;
  while (true) {
    const LoopState<Point, Decision> state{train, res.decision};
    std::optional<std::size_t> top;
    std::optional<Key> top_key;
    bool any_above_stop = false;
    for (std::size_t i = data.n_init(); i < data.size(); ++i) {
      if (in_train[i]) continue;
      Key k = order.key(state, data[i]);
      any_above_stop = any_above_stop || order.exceeds_stop(state, data[i], k);
      if (!top || *top_key < k) {
        top = i;
        top_key = std::move(k);
      }
    }
    if (!any_above_stop) break;
    in_train[*top] = 1;
    res.train_list.push_back(*top);
    train.push_back(data[*top]);
    res.decision = detail::synthesize(synth, train, res.decision, res.train_list);
    ++res.iterations;
  }
  res.violation_list = detail::violators(data, in_train, prop, res.decision);
  return res;
}

/// Order that recovers basic P2L inside P2L+: violators sit above Stop and are
/// ranked by dissatisfaction, satisfiers sit below it.
template <class Point, class Decision>
OrderContract<Point, Decision, std::pair<int, double>> property_order(
    Property<Point, Decision> prop, Dissatisfaction<Point, Decision> dissatisfaction) {
  using Key = std::pair<int, double>;
  OrderContract<Point, Decision, Key> order;
  order.key = [prop, dissatisfaction](const LoopState<Point, Decision>& s, const Point& z) {
    if (prop(s.decision, z)) return Key{0, 0.0};
    return Key{1, dissatisfaction(s.decision, z)};
  };
  order.exceeds_stop = [](const LoopState<Point, Decision>&, const Point&, const Key& k) {
    return k.first == 1;
  };
  return order;
}

/// Time-triggered stop: exactly M appends ranked by `selection`, then U.
template <class Point, class Decision, class Key>
CompressionResult<Decision> run_p2l_tts(
    const Dataset<Point>& data, std::size_t m, const Synthesizer<Point, Decision>& synth,
    std::function<Key(const LoopState<Point, Decision>&, const Point&)> selection,
    const Property<Point, Decision>& prop, Decision init_decision) {
  if (m > data.working_size())
    throw std::out_of_range("run_p2l_tts: M = " + std::to_string(m) + " exceeds working set of " +
                            std::to_string(data.working_size()));
  OrderContract<Point, Decision, Key> order;
  order.key = std::move(selection);
  order.exceeds_stop = [m](const LoopState<Point, Decision>& s, const Point&, const Key&) {
    return s.train.size() < m;
  };
  return run_p2l_plus(data, synth, order, prop, std::move(init_decision));
}

/// eps_bar(|T| + |U|, delta, n_effective).
template <class Decision>
double certify(const CompressionResult<Decision>& result, double delta, std::size_t n_effective) {
  return bounds::eps_bar({result.compression_size(), n_effective, delta}).eps;
}

template <class Decision>
struct IterationRecord {
  std::size_t m = 0;
  CompressionResult<Decision> result;
  double eps = 1.0;
};

template <class Decision>
struct AllIterations {
  std::vector<IterationRecord<Decision>> records;  // M = 1..|working set|
  double delta = 0.0;                              // per-statement
  double joint_confidence = 0.0;                   // 1 - |working set| * delta

  /// Record minimising |T_M| + |U_M| (smallest M on ties).
  const IterationRecord<Decision>& most_compressed() const {
    const IterationRecord<Decision>* best = &records.front();
    for (const auto& r : records)
      if (r.result.compression_size() < best->result.compression_size()) best = &r;
    return *best;
  }
};

/// Runs the loop once until T covers the working set and keeps (h_M, T_M, U_M)
/// after every append. Each M equals run_p2l_tts with that M.
template <class Point, class Decision, class Key>
AllIterations<Decision> run_all_iterations(
    const Dataset<Point>& data, const Synthesizer<Point, Decision>& synth,
    const std::function<Key(const LoopState<Point, Decision>&, const Point&)>& selection,
    const Property<Point, Decision>& prop, Decision init_decision, double delta) {
  const std::size_t n_work = data.working_size();
  AllIterations<Decision> out;
  out.delta = delta;
  out.joint_confidence = 1.0 - static_cast<double>(n_work) * delta;
  out.records.reserve(n_work);

  std::vector<char> in_train(data.size(), 0);
  std::vector<Point> train;
  std::vector<std::size_t> train_idx;
  Decision h = std::move(init_decision);
  for (std::size_t m = 1; m <= n_work; ++m) {
    const LoopState<Point, Decision> state{train, h};
    std::optional<std::size_t> top;
    std::optional<Key> top_key;
    for (std::size_t i = data.n_init(); i < data.size(); ++i) {
      if (in_train[i]) continue;
      Key k = selection(state, data[i]);
      if (!top || *top_key < k) {
        top = i;
        top_key = std::move(k);
      }
    }
    in_train[*top] = 1;
    train_idx.push_back(*top);
    train.push_back(data[*top]);
    h = detail::synthesize(synth, train, h, train_idx);

    CompressionResult<Decision> res{h, train_idx, detail::violators(data, in_train, prop, h), m};
    const double eps = certify(res, delta, n_work);
    out.records.push_back({m, std::move(res), eps});
  }
  return out;
}

}  // namespace p2l
