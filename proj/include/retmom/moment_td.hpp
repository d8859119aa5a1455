#pragma once

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "retmom/features.hpp"
#include "retmom/mdp.hpp"
#include "retmom/moment_math.hpp"
#include "retmom/rng.hpp"

namespace retmom {

/// Raised when a TD error leaves the finite range; carries the moment whose
/// update blew up.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int moment_index, double delta)
      : std::runtime_error("moment " + std::to_string(moment_index) +
                           " diverged (delta = " + std::to_string(delta) + ")"),
        moment_index_(moment_index) {}
  int moment_index() const { return moment_index_; }

 private:
  int moment_index_;
};

struct TransitionSample {
  int state = -1;
  int action = -1;
  double reward = 0.0;
  int next_state = -1;
  bool next_is_terminal = false;
};

/// Step-size scaling over the course of a run. `constant` uses the base
/// step sizes as-is; the decays multiply them by tau / (tau + t) where t is
/// the episode count or the per-state visit count.
enum class StepSchedule { constant, episode_decay, visit_decay };

inline std::string to_string(StepSchedule s) {
  switch (s) {
    case StepSchedule::constant: return "constant";
    case StepSchedule::episode_decay: return "episode_decay";
    case StepSchedule::visit_decay: return "visit_decay";
  }
  throw std::invalid_argument("unknown step schedule");
}

inline StepSchedule step_schedule_from_string(const std::string& s) {
  if (s == "constant") return StepSchedule::constant;
  if (s == "episode_decay") return StepSchedule::episode_decay;
  if (s == "visit_decay") return StepSchedule::visit_decay;
  throw std::invalid_argument("unknown step schedule: " + s);
}

/// Default base step sizes 0.1 / k; higher powers of the return have larger
/// targets and want smaller steps.
template <class Scalar = double>
std::vector<Scalar> default_step_sizes(int num_moments) {
  std::vector<Scalar> alphas(static_cast<std::size_t>(num_moments));
  for (int k = 1; k <= num_moments; ++k)
    alphas[static_cast<std::size_t>(k - 1)] = Scalar(0.1) / static_cast<Scalar>(k);
  return alphas;
}

/// Online estimator of the first n moments of the return with linear
/// function approximation. Each moment k keeps its own weight vector and
/// accumulating eligibility trace; the k-th target uses the surrogate
/// reward built from the lower-moment estimates at the successor state.
template <class Scalar>
class MomentTd {
 public:
  using Vector = VectorX<Scalar>;

  struct Options {
    std::vector<Scalar> step_sizes;    // one per moment, each in (0, 1)
    std::vector<Scalar> trace_decays;  // one per moment, each in [0, 1]
    StepSchedule schedule = StepSchedule::constant;
    Scalar schedule_tau = Scalar(1);
    // Use the non-accumulating trace variant z_k = gamma^k * lambda_k + grad
    // (a scalar broadcast in place of the decayed previous trace).
    bool literal_trace = false;
  };

  MomentTd(int num_moments, FeatureMap<Scalar> features, std::vector<bool> terminal,
           Scalar discount, Options options)
      : n_(num_moments),
        discount_(discount),
        features_(std::move(features)),
        terminal_(std::move(terminal)),
        options_(std::move(options)) {
    if (n_ < 1) throw std::invalid_argument("moment_td: need at least one moment");
    if (discount_ < Scalar(0) || discount_ > Scalar(1))
      throw std::invalid_argument("moment_td: discount must lie in [0, 1]");
    if (options_.step_sizes.empty()) options_.step_sizes = default_step_sizes<Scalar>(n_);
    if (options_.trace_decays.empty())
      options_.trace_decays.assign(static_cast<std::size_t>(n_), Scalar(0));
    if (static_cast<int>(options_.step_sizes.size()) != n_ ||
        static_cast<int>(options_.trace_decays.size()) != n_)
      throw std::invalid_argument("moment_td: need one step size and trace decay per moment");
    for (Scalar a : options_.step_sizes)
      if (!(a > Scalar(0) && a < Scalar(1)))
        throw std::invalid_argument("moment_td: step sizes must lie in (0, 1)");
    for (Scalar l : options_.trace_decays)
      if (!(l >= Scalar(0) && l <= Scalar(1)))
        throw std::invalid_argument("moment_td: trace decays must lie in [0, 1]");
    if (options_.schedule != StepSchedule::constant && !(options_.schedule_tau > Scalar(0)))
      throw std::invalid_argument("moment_td: decay schedules need tau > 0");
    weights_.assign(static_cast<std::size_t>(n_), Vector::Zero(features_.dimension));
    traces_.assign(static_cast<std::size_t>(n_), Vector::Zero(features_.dimension));
    visits_.assign(terminal_.size(), 0);
    // gamma^k by repeated multiplication, so gamma^1 is exactly gamma.
    discount_pow_.resize(static_cast<std::size_t>(n_) + 1);
    discount_pow_[0] = Scalar(1);
    for (int k = 1; k <= n_; ++k)
      discount_pow_[static_cast<std::size_t>(k)] = discount_pow_[static_cast<std::size_t>(k - 1)] * discount_;
  }

  int num_moments() const { return n_; }
  Eigen::Index dimension() const { return features_.dimension; }
  Scalar discount() const { return discount_; }
  const Options& options() const { return options_; }
  const FeatureMap<Scalar>& features() const { return features_; }

  const Vector& weights(int k) const { return weights_.at(index(k)); }
  void set_weights(int k, Vector w) {
    if (w.size() != features_.dimension)
      throw std::invalid_argument("moment_td: weight dimension mismatch");
    weights_.at(index(k)) = std::move(w);
  }

  bool is_terminal(int state) const { return terminal_.at(static_cast<std::size_t>(state)); }

  /// Value of the k-th power of the return at `state`. k = 0 is the fixed
  /// convention (0 at terminals, 1 elsewhere) and is never learned.
  Scalar value(int k, int state) const {
    if (k < 0 || k > n_) throw std::out_of_range("moment_td: moment index out of range");
    if (k == 0) return is_terminal(state) ? Scalar(0) : Scalar(1);
    return weights_[index(k)].dot(features_.evaluate(state));
  }

  /// Raw moment estimates v_0..v_n at `state` (v_0 per the convention).
  std::vector<Scalar> moments(int state) const {
    std::vector<Scalar> v(static_cast<std::size_t>(n_) + 1);
    v[0] = is_terminal(state) ? Scalar(0) : Scalar(1);
    const Vector x = features_.evaluate(state);
    for (int k = 1; k <= n_; ++k) v[static_cast<std::size_t>(k)] = weights_[index(k)].dot(x);
    return v;
  }

  /// Central moments c_0..c_up_to at a non-terminal `state`; c_1 is exactly
  /// zero by construction.
  std::vector<Scalar> central_moments(int state, int up_to) const {
    if (up_to < 0 || up_to > n_)
      throw std::out_of_range("moment_td: central moment order out of range");
    if (is_terminal(state))
      throw std::invalid_argument("moment_td: central moments need a non-terminal state");
    std::vector<Scalar> raw = moments(state);
    raw.resize(static_cast<std::size_t>(up_to) + 1);
    return central_from_raw<Scalar>(raw);
  }

  void reset_traces() {
    for (auto& z : traces_) z.setZero();
  }

  /// Marks an episode boundary: traces cleared, episode counter advanced.
  void begin_episode() {
    reset_traces();
    ++episode_;
  }

  /// One transition of the learning loop. Updates traces and weights for
  /// moments n down to 1 and returns the TD errors (index k-1 holds the
  /// k-th moment's error). The descending order means every surrogate
  /// reward reads this transition's pre-update lower-moment values.
  std::vector<Scalar> step(const TransitionSample& t) {
    check_sample(t);
    const Vector x = features_.evaluate(t.state);
    const auto [next_values, current_values] = stage_values(t);
    std::vector<Scalar> deltas(static_cast<std::size_t>(n_));
    const Scalar alpha_scale = schedule_factor(t.state);
    for (int k = n_; k >= 1; --k) {
      Vector& z = traces_[index(k)];
      const Scalar decay = discount_pow_[static_cast<std::size_t>(k)] * options_.trace_decays[index(k)];
      if (options_.literal_trace)
        z = Vector::Constant(features_.dimension, decay) + x;
      else
        z = decay * z + x;
      const Scalar delta = td_error(k, t, next_values, current_values);
      if (!std::isfinite(static_cast<double>(delta)) || std::abs(delta) > Scalar(1e12))
        throw DivergenceError(k, static_cast<double>(delta));
      weights_[index(k)] += options_.step_sizes[index(k)] * alpha_scale * delta * z;
      deltas[index(k)] = delta;
    }
    visits_[static_cast<std::size_t>(t.state)] += 1;
    return deltas;
  }

  /// TD errors for a transition without touching traces, weights, or
  /// schedule state. Useful for fixed-point diagnostics.
  std::vector<Scalar> peek_errors(const TransitionSample& t) const {
    check_sample(t);
    const auto [next_values, current_values] = stage_values(t);
    std::vector<Scalar> deltas(static_cast<std::size_t>(n_));
    for (int k = n_; k >= 1; --k) deltas[index(k)] = td_error(k, t, next_values, current_values);
    return deltas;
  }

  long episodes_started() const { return episode_; }
  long visit_count(int state) const { return visits_.at(static_cast<std::size_t>(state)); }

 private:
  std::size_t index(int k) const { return static_cast<std::size_t>(k - 1); }

  void check_sample(const TransitionSample& t) const {
    if (!std::isfinite(t.reward))
      throw std::invalid_argument("moment_td: non-finite reward in transition");
    if (is_terminal(t.state))
      throw std::invalid_argument("moment_td: transitions must start at a non-terminal state");
  }

  // Successor values v_0..v_n and current values v_1..v_n, all read before
  // any weight moves. The surrogate's zeroth entry is the zeroth power of
  // the return, which is 1 on every real transition, terminal or not: the
  // final reward still has to enter the target.
  std::pair<std::vector<Scalar>, std::vector<Scalar>> stage_values(const TransitionSample& t) const {
    std::vector<Scalar> next_values(static_cast<std::size_t>(n_) + 1);
    std::vector<Scalar> current_values(static_cast<std::size_t>(n_) + 1);
    next_values[0] = Scalar(1);
    const Vector x = features_.evaluate(t.state);
    if (t.next_is_terminal) {
      for (int k = 1; k <= n_; ++k) next_values[static_cast<std::size_t>(k)] = Scalar(0);
    } else {
      const Vector xnext = features_.evaluate(t.next_state);
      for (int k = 1; k <= n_; ++k)
        next_values[static_cast<std::size_t>(k)] = weights_[index(k)].dot(xnext);
    }
    for (int k = 1; k <= n_; ++k)
      current_values[static_cast<std::size_t>(k)] = weights_[index(k)].dot(x);
    return {std::move(next_values), std::move(current_values)};
  }

  Scalar td_error(int k, const TransitionSample& t, const std::vector<Scalar>& next_values,
                  const std::vector<Scalar>& current_values) const {
    const Scalar r_k = surrogate_reward<Scalar>(
        k, static_cast<Scalar>(t.reward), discount_,
        std::span<const Scalar>(next_values.data(), static_cast<std::size_t>(k)));
    return r_k + discount_pow_[static_cast<std::size_t>(k)] * next_values[static_cast<std::size_t>(k)] -
           current_values[static_cast<std::size_t>(k)];
  }

  Scalar schedule_factor(int state) const {
    switch (options_.schedule) {
      case StepSchedule::constant: return Scalar(1);
      case StepSchedule::episode_decay:
        return options_.schedule_tau / (options_.schedule_tau + static_cast<Scalar>(episode_ > 0 ? episode_ - 1 : 0));
      case StepSchedule::visit_decay:
        return options_.schedule_tau /
               (options_.schedule_tau + static_cast<Scalar>(visits_[static_cast<std::size_t>(state)]));
    }
    throw std::logic_error("moment_td: unknown schedule");
  }

  int n_;
  Scalar discount_;
  FeatureMap<Scalar> features_;
  std::vector<bool> terminal_;
  Options options_;
  std::vector<Vector> weights_;
  std::vector<Vector> traces_;
  std::vector<Scalar> discount_pow_;
  std::vector<long> visits_;
  long episode_ = 0;
};

template <class Scalar>
struct MomentSnapshot {
  long episode = 0;
  std::vector<VectorX<Scalar>> weights;  // one vector per moment
};

template <class Scalar>
struct LearningLog {
  std::vector<MomentSnapshot<Scalar>> snapshots;
};

/// Runs the full on-policy evaluation loop: for each episode, reset traces
/// and walk the policy from the start state, applying one TD step per
/// transition. Snapshots of the weights are recorded before learning and
/// every `snapshot_every` episodes (the final episode always included).
template <class Scalar>
LearningLog<Scalar> run_policy_evaluation(const MdpModel& model, const PolicyTable& policy,
                                          MomentTd<Scalar>& est, long episodes, Rng& rng,
                                          long max_steps, long snapshot_every) {
  if (episodes < 0) throw std::invalid_argument("run_policy_evaluation: negative episode count");
  if (max_steps < 1) throw std::invalid_argument("run_policy_evaluation: max_steps must be >= 1");
  if (snapshot_every < 1)
    throw std::invalid_argument("run_policy_evaluation: snapshot_every must be >= 1");
  if (std::abs(static_cast<double>(est.discount()) - model.discount) > 1e-15)
    throw std::invalid_argument("run_policy_evaluation: estimator and model discounts differ");

  LearningLog<Scalar> log;
  auto snapshot = [&](long episode) {
    MomentSnapshot<Scalar> snap;
    snap.episode = episode;
    for (int k = 1; k <= est.num_moments(); ++k) snap.weights.push_back(est.weights(k));
    log.snapshots.push_back(std::move(snap));
  };
  snapshot(0);
  for (long e = 1; e <= episodes; ++e) {
    est.begin_episode();
    int s = model.start_state;
    for (long t = 0; t < max_steps && !model.is_terminal(s); ++t) {
      const int a = sample_action(policy, s, rng);
      const Transition& tr = sample_transition(model, s, a, rng);
      est.step({s, a, tr.reward, tr.next_state, model.is_terminal(tr.next_state)});
      s = tr.next_state;
    }
    if (e % snapshot_every == 0 || e == episodes) snapshot(e);
  }
  return log;
}

}  // namespace retmom
