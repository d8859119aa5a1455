#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "retmom/rng.hpp"

namespace retmom {

inline constexpr double kProbabilityTolerance = 1e-12;

/// One outgoing branch of a (state, action) pair.
struct Transition {
  double probability = 0.0;
  int next_state = -1;
  double reward = 0.0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Finite MDP with explicit transition branches. Terminal states carry no
/// outgoing transitions; the simulator stops on entering one.
struct MdpModel {
  int num_states = 0;
  int num_actions = 0;
  // transitions[state][action] -> branches; empty per-state list for terminals.
  std::vector<std::vector<std::vector<Transition>>> transitions;
  double discount = 1.0;
  std::vector<bool> terminal;
  int start_state = 0;

  bool is_terminal(int state) const {
    return terminal[static_cast<std::size_t>(state)];
  }
};

/// Stochastic policy as a per-state action distribution. Terminal states
/// keep an empty row.
struct PolicyTable {
  std::vector<std::vector<double>> probs;
};

struct EpisodeStep {
  int state = -1;
  int action = -1;
  double reward = 0.0;
  int next_state = -1;

  friend bool operator==(const EpisodeStep&, const EpisodeStep&) = default;
};

struct EpisodeTrace {
  std::vector<EpisodeStep> steps;
  bool terminated = false;
  bool truncated = false;

  friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

/// Checks the model invariants: branch probabilities form a distribution per
/// (state, action), terminals have no transitions, start is non-terminal.
inline void validate(const MdpModel& model) {
  if (model.num_states <= 0 || model.num_actions <= 0)
    throw std::invalid_argument("mdp: num_states and num_actions must be positive");
  if (static_cast<int>(model.transitions.size()) != model.num_states ||
      static_cast<int>(model.terminal.size()) != model.num_states)
    throw std::invalid_argument("mdp: per-state containers must match num_states");
  if (model.start_state < 0 || model.start_state >= model.num_states)
    throw std::invalid_argument("mdp: start_state out of range");
  if (model.is_terminal(model.start_state))
    throw std::invalid_argument("mdp: start_state must not be terminal");
  if (model.discount < 0.0 || model.discount > 1.0)
    throw std::invalid_argument("mdp: discount must lie in [0, 1]");

  for (int s = 0; s < model.num_states; ++s) {
    const auto& rows = model.transitions[static_cast<std::size_t>(s)];
    if (model.is_terminal(s)) {
      if (!rows.empty())
        throw std::invalid_argument("mdp: terminal state " + std::to_string(s) +
                                    " has outgoing transitions");
      continue;
    }
    if (static_cast<int>(rows.size()) != model.num_actions)
      throw std::invalid_argument("mdp: state " + std::to_string(s) +
                                  " must define every action");
    for (int a = 0; a < model.num_actions; ++a) {
      double total = 0.0;
      for (const auto& br : rows[static_cast<std::size_t>(a)]) {
        if (br.probability < 0.0)
          throw std::invalid_argument("mdp: negative branch probability");
        if (br.next_state < 0 || br.next_state >= model.num_states)
          throw std::invalid_argument("mdp: branch next_state out of range");
        if (!std::isfinite(br.reward))
          throw std::invalid_argument("mdp: non-finite branch reward");
        total += br.probability;
      }
      if (std::abs(total - 1.0) > kProbabilityTolerance)
        throw std::invalid_argument("mdp: branch probabilities of state " +
                                    std::to_string(s) + " action " + std::to_string(a) +
                                    " sum to " + std::to_string(total));
    }
  }
}

/// Checks that every non-terminal state has a proper action distribution.
inline void validate(const MdpModel& model, const PolicyTable& policy) {
  if (static_cast<int>(policy.probs.size()) != model.num_states)
    throw std::invalid_argument("policy: row count must match num_states");
  for (int s = 0; s < model.num_states; ++s) {
    const auto& row = policy.probs[static_cast<std::size_t>(s)];
    if (model.is_terminal(s)) {
      if (!row.empty())
        throw std::invalid_argument("policy: terminal state has an action row");
      continue;
    }
    if (static_cast<int>(row.size()) != model.num_actions)
      throw std::invalid_argument("policy: row of state " + std::to_string(s) +
                                  " must cover every action");
    double total = 0.0;
    for (double p : row) {
      if (p < 0.0) throw std::invalid_argument("policy: negative action probability");
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance)
      throw std::invalid_argument("policy: action probabilities of state " +
                                  std::to_string(s) + " sum to " + std::to_string(total));
  }
}

/// Draws an action for `state` from the policy row. Terminal and unknown
/// states are rejected.
inline int sample_action(const PolicyTable& policy, int state, Rng& rng) {
  if (state < 0 || state >= static_cast<int>(policy.probs.size()))
    throw std::out_of_range("sample_action: unknown state id " + std::to_string(state));
  const auto& row = policy.probs[static_cast<std::size_t>(state)];
  if (row.empty())
    throw std::out_of_range("sample_action: state " + std::to_string(state) +
                            " has no action distribution (terminal?)");
  return rng.categorical(row);
}

/// Draws a successor branch for (state, action).
inline const Transition& sample_transition(const MdpModel& model, int state, int action,
                                           Rng& rng) {
  const auto& branches =
      model.transitions[static_cast<std::size_t>(state)][static_cast<std::size_t>(action)];
  if (branches.size() == 1) return branches.front();
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < branches.size(); ++i) {
    acc += branches[i].probability;
    if (u < acc) return branches[i];
  }
  return branches.back();
}

/// Simulates one episode from `start` until a terminal state or `max_steps`.
inline EpisodeTrace run_episode_from(const MdpModel& model, const PolicyTable& policy,
                                     int start, Rng& rng, long max_steps) {
  if (max_steps < 1) throw std::invalid_argument("run_episode: max_steps must be >= 1");
  if (start < 0 || start >= model.num_states || model.is_terminal(start))
    throw std::invalid_argument("run_episode: invalid start state");
  EpisodeTrace trace;
  int s = start;
  for (long t = 0; t < max_steps; ++t) {
    const int a = sample_action(policy, s, rng);
    const Transition& tr = sample_transition(model, s, a, rng);
    trace.steps.push_back({s, a, tr.reward, tr.next_state});
    s = tr.next_state;
    if (model.is_terminal(s)) {
      trace.terminated = true;
      return trace;
    }
  }
  trace.truncated = true;
  return trace;
}

inline EpisodeTrace run_episode(const MdpModel& model, const PolicyTable& policy, Rng& rng,
                                long max_steps) {
  return run_episode_from(model, policy, model.start_state, rng, max_steps);
}

/// Discounted sum of the trace's rewards in order.
inline double discounted_return(const EpisodeTrace& trace, double discount) {
  if (trace.steps.empty())
    throw std::invalid_argument("discounted_return: empty trace");
  double g = 0.0;
  double scale = 1.0;
  for (const auto& step : trace.steps) {
    g += scale * step.reward;
    scale *= discount;
  }
  return g;
}

/// States reachable from the start state under the policy's support,
/// in ascending id order. Terminal states are excluded.
inline std::vector<int> reachable_states(const MdpModel& model, const PolicyTable& policy) {
  std::vector<bool> seen(static_cast<std::size_t>(model.num_states), false);
  std::deque<int> frontier{model.start_state};
  seen[static_cast<std::size_t>(model.start_state)] = true;
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop_front();
    if (model.is_terminal(s)) continue;
    const auto& row = policy.probs[static_cast<std::size_t>(s)];
    for (int a = 0; a < model.num_actions; ++a) {
      if (row[static_cast<std::size_t>(a)] <= 0.0) continue;
      for (const auto& br :
           model.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]) {
        if (br.probability <= 0.0) continue;
        if (!seen[static_cast<std::size_t>(br.next_state)]) {
          seen[static_cast<std::size_t>(br.next_state)] = true;
          frontier.push_back(br.next_state);
        }
      }
    }
  }
  std::vector<int> out;
  for (int s = 0; s < model.num_states; ++s)
    if (seen[static_cast<std::size_t>(s)] && !model.is_terminal(s)) out.push_back(s);
  return out;
}

// JSON document formats (documented in the README):
//   model:  {"num_states", "num_actions", "discount", "start_state",
//            "terminal_states": [ids], "transitions": [{"state", "action",
//            "branches": [{"probability", "next_state", "reward"}]}]}
//   policy: {"probs": [[...per action...], ...]}  (empty row => terminal)

inline void to_json(nlohmann::json& j, const Transition& t) {
  j = nlohmann::json{
      {"probability", t.probability}, {"next_state", t.next_state}, {"reward", t.reward}};
}

inline void from_json(const nlohmann::json& j, Transition& t) {
  j.at("probability").get_to(t.probability);
  j.at("next_state").get_to(t.next_state);
  j.at("reward").get_to(t.reward);
}

inline void to_json(nlohmann::json& j, const MdpModel& model) {
  std::vector<int> terminals;
  for (int s = 0; s < model.num_states; ++s)
    if (model.is_terminal(s)) terminals.push_back(s);
  nlohmann::json rows = nlohmann::json::array();
  for (int s = 0; s < model.num_states; ++s) {
    if (model.is_terminal(s)) continue;
    for (int a = 0; a < model.num_actions; ++a) {
      rows.push_back(nlohmann::json{
          {"state", s},
          {"action", a},
          {"branches",
           model.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]}});
    }
  }
  j = nlohmann::json{{"num_states", model.num_states},
                     {"num_actions", model.num_actions},
                     {"discount", model.discount},
                     {"start_state", model.start_state},
                     {"terminal_states", terminals},
                     {"transitions", std::move(rows)}};
}

inline void from_json(const nlohmann::json& j, MdpModel& model) {
  model.num_states = j.at("num_states").get<int>();
  model.num_actions = j.at("num_actions").get<int>();
  model.discount = j.at("discount").get<double>();
  model.start_state = j.at("start_state").get<int>();
  model.terminal.assign(static_cast<std::size_t>(model.num_states), false);
  for (int s : j.at("terminal_states").get<std::vector<int>>()) {
    if (s < 0 || s >= model.num_states)
      throw std::invalid_argument("mdp json: terminal state id out of range");
    model.terminal[static_cast<std::size_t>(s)] = true;
  }
  model.transitions.assign(static_cast<std::size_t>(model.num_states), {});
  for (int s = 0; s < model.num_states; ++s)
    if (!model.is_terminal(s))
      model.transitions[static_cast<std::size_t>(s)].assign(
          static_cast<std::size_t>(model.num_actions), {});
  for (const auto& row : j.at("transitions")) {
    const int s = row.at("state").get<int>();
    const int a = row.at("action").get<int>();
    if (s < 0 || s >= model.num_states || a < 0 || a >= model.num_actions)
      throw std::invalid_argument("mdp json: transition row out of range");
    if (model.is_terminal(s))
      throw std::invalid_argument("mdp json: transition row for terminal state");
    row.at("branches").get_to(
        model.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]);
  }
  validate(model);
}

inline void to_json(nlohmann::json& j, const PolicyTable& policy) {
  j = nlohmann::json{{"probs", policy.probs}};
}

inline void from_json(const nlohmann::json& j, PolicyTable& policy) {
  j.at("probs").get_to(policy.probs);
}

}  // namespace retmom
