#pragma once

#include <map>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <utility>
#include <vector>

#include "retmom/mdp.hpp"

namespace retmom {

/// Grid world with a cliff along the bottom row. Start is bottom-left, goal
/// bottom-right, cliff cells strictly between them. A move reaches its
/// intended cell with probability 1 - slip_probability and otherwise lands
/// uniformly on one of the intended cell's in-grid orthogonal neighbours.
/// Landing on a cliff cell costs cliff_reward and resets to the start
/// (the episode continues); entering the goal ends the episode.
struct CliffWalkConfig {
  int width = 12;
  int height = 4;
  double slip_probability = 0.05;
  double step_reward = -0.1;
  double cliff_reward = -1.0;
  double goal_reward = 0.0;  // added on top of step_reward when entering the goal
  double discount = 1.0;
};

inline void validate(const CliffWalkConfig& cfg) {
  if (cfg.width < 3 || cfg.height < 2)
    throw std::invalid_argument("cliff_walk: grid must be at least 3x2 to fit a cliff");
  if (cfg.slip_probability < 0.0 || cfg.slip_probability >= 1.0)
    throw std::invalid_argument("cliff_walk: slip_probability must lie in [0, 1)");
  if (cfg.discount < 0.0 || cfg.discount > 1.0)
    throw std::invalid_argument("cliff_walk: discount must lie in [0, 1]");
}

enum class GridAction : int { up = 0, right = 1, down = 2, left = 3 };
inline constexpr int kNumGridActions = 4;

/// Maps grid cells to MDP state ids. Cliff cells are not states: nothing
/// ever occupies them, so they are skipped in the numbering.
class CliffWalkLayout {
 public:
  explicit CliffWalkLayout(const CliffWalkConfig& cfg) : cfg_(cfg) {
    validate(cfg);
    cell_to_state_.assign(static_cast<std::size_t>(cfg.width * cfg.height), -1);
    for (int row = 0; row < cfg.height; ++row)
      for (int col = 0; col < cfg.width; ++col)
        if (!is_cliff(col, row)) {
          cell_to_state_[cell_index(col, row)] = static_cast<int>(state_to_cell_.size());
          state_to_cell_.emplace_back(col, row);
        }
  }

  const CliffWalkConfig& config() const { return cfg_; }
  int num_states() const { return static_cast<int>(state_to_cell_.size()); }

  bool in_grid(int col, int row) const {
    return col >= 0 && col < cfg_.width && row >= 0 && row < cfg_.height;
  }
  bool is_cliff(int col, int row) const {
    return row == 0 && col > 0 && col < cfg_.width - 1;
  }
  bool is_start(int col, int row) const { return col == 0 && row == 0; }
  bool is_goal(int col, int row) const { return col == cfg_.width - 1 && row == 0; }

  /// State id of a non-cliff cell.
  int state_at(int col, int row) const {
    if (!in_grid(col, row)) throw std::out_of_range("cliff_walk: cell outside grid");
    const int s = cell_to_state_[cell_index(col, row)];
    if (s < 0) throw std::out_of_range("cliff_walk: cliff cells are not states");
    return s;
  }
  std::pair<int, int> cell_of(int state) const {
    return state_to_cell_.at(static_cast<std::size_t>(state));
  }

  int start_state() const { return state_at(0, 0); }
  int goal_state() const { return state_at(cfg_.width - 1, 0); }

 private:
  std::size_t cell_index(int col, int row) const {
    return static_cast<std::size_t>(row * cfg_.width + col);
  }

  CliffWalkConfig cfg_;
  std::vector<int> cell_to_state_;
  std::vector<std::pair<int, int>> state_to_cell_;
};

namespace detail {

inline std::pair<int, int> shift(int col, int row, GridAction a) {
  switch (a) {
    case GridAction::up: return {col, row + 1};
    case GridAction::right: return {col + 1, row};
    case GridAction::down: return {col, row - 1};
    case GridAction::left: return {col - 1, row};
  }
  throw std::invalid_argument("cliff_walk: unknown action");
}

// Landing semantics of a cell: cliff resets to start with the cliff penalty,
// the goal terminates with step_reward + goal_reward, anything else costs a step.
inline std::pair<int, double> land(const CliffWalkLayout& layout, int col, int row) {
  const auto& cfg = layout.config();
  if (layout.is_cliff(col, row)) return {layout.start_state(), cfg.cliff_reward};
  if (layout.is_goal(col, row))
    return {layout.goal_state(), cfg.step_reward + cfg.goal_reward};
  return {layout.state_at(col, row), cfg.step_reward};
}

}  // namespace detail

inline MdpModel build_cliff_walk(const CliffWalkConfig& cfg) {
  const CliffWalkLayout layout(cfg);
  MdpModel model;
  model.num_states = layout.num_states();
  model.num_actions = kNumGridActions;
  model.discount = cfg.discount;
  model.start_state = layout.start_state();
  model.terminal.assign(static_cast<std::size_t>(model.num_states), false);
  model.terminal[static_cast<std::size_t>(layout.goal_state())] = true;
  model.transitions.assign(static_cast<std::size_t>(model.num_states), {});

  for (int s = 0; s < model.num_states; ++s) {
    if (model.is_terminal(s)) continue;
    const auto [col, row] = layout.cell_of(s);
    auto& rows = model.transitions[static_cast<std::size_t>(s)];
    rows.assign(kNumGridActions, {});
    for (int a = 0; a < kNumGridActions; ++a) {
      // Intended destination; walls clamp to the current cell.
      auto [icol, irow] = detail::shift(col, row, static_cast<GridAction>(a));
      if (!layout.in_grid(icol, irow)) {
        icol = col;
        irow = row;
      }
      // Branches are accumulated by (next_state, reward) so duplicated
      // outcomes merge into one entry with a canonical ordering.
      std::map<std::pair<int, double>, double> mass;
      mass[detail::land(layout, icol, irow)] += 1.0 - cfg.slip_probability;
      if (cfg.slip_probability > 0.0) {
        std::vector<std::pair<int, int>> adjacent;
        for (int b = 0; b < kNumGridActions; ++b) {
          const auto [ncol, nrow] = detail::shift(icol, irow, static_cast<GridAction>(b));
          if (layout.in_grid(ncol, nrow) && !(ncol == icol && nrow == irow))
            adjacent.emplace_back(ncol, nrow);
        }
        const double share = cfg.slip_probability / static_cast<double>(adjacent.size());
        for (const auto& [ncol, nrow] : adjacent)
          mass[detail::land(layout, ncol, nrow)] += share;
      }
      auto& branches = rows[static_cast<std::size_t>(a)];
      for (const auto& [key, p] : mass)
        branches.push_back({p, key.first, key.second});
    }
  }
  validate(model);
  return model;
}

/// Deterministic policy that climbs to the top row, traverses, and descends
/// along the right edge. Reaches the goal from every state.
inline PolicyTable safe_policy(const CliffWalkConfig& cfg) {
  const CliffWalkLayout layout(cfg);
  PolicyTable policy;
  policy.probs.assign(static_cast<std::size_t>(layout.num_states()), {});
  for (int s = 0; s < layout.num_states(); ++s) {
    if (s == layout.goal_state()) continue;
    const auto [col, row] = layout.cell_of(s);
    GridAction a = GridAction::up;
    if (col == cfg.width - 1)
      a = GridAction::down;
    else if (row == cfg.height - 1)
      a = GridAction::right;
    auto& probs = policy.probs[static_cast<std::size_t>(s)];
    probs.assign(kNumGridActions, 0.0);
    probs[static_cast<std::size_t>(a)] = 1.0;
  }
  return policy;
}

/// Deterministic policy that walks the row directly above the cliff.
inline PolicyTable risky_policy(const CliffWalkConfig& cfg) {
  const CliffWalkLayout layout(cfg);
  PolicyTable policy;
  policy.probs.assign(static_cast<std::size_t>(layout.num_states()), {});
  for (int s = 0; s < layout.num_states(); ++s) {
    if (s == layout.goal_state()) continue;
    const auto [col, row] = layout.cell_of(s);
    GridAction a = GridAction::right;
    if (col == cfg.width - 1)
      a = GridAction::down;
    else if (row == 0)
      a = GridAction::up;  // start cell: step up to the cliff row
    else if (row > 1)
      a = GridAction::down;
    auto& probs = policy.probs[static_cast<std::size_t>(s)];
    probs.assign(kNumGridActions, 0.0);
    probs[static_cast<std::size_t>(a)] = 1.0;
  }
  return policy;
}

inline void to_json(nlohmann::json& j, const CliffWalkConfig& cfg) {
  j = nlohmann::json{{"width", cfg.width},
                     {"height", cfg.height},
                     {"slip_probability", cfg.slip_probability},
                     {"step_reward", cfg.step_reward},
                     {"cliff_reward", cfg.cliff_reward},
                     {"goal_reward", cfg.goal_reward},
                     {"discount", cfg.discount}};
}

inline void from_json(const nlohmann::json& j, CliffWalkConfig& cfg) {
  CliffWalkConfig defaults;
  cfg.width = j.value("width", defaults.width);
  cfg.height = j.value("height", defaults.height);
  cfg.slip_probability = j.value("slip_probability", defaults.slip_probability);
  cfg.step_reward = j.value("step_reward", defaults.step_reward);
  cfg.cliff_reward = j.value("cliff_reward", defaults.cliff_reward);
  cfg.goal_reward = j.value("goal_reward", defaults.goal_reward);
  cfg.discount = j.value("discount", defaults.discount);
}

}  // namespace retmom
