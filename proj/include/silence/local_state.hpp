#pragma once

#include <optional>
#include <vector>

#include "silence/core.hpp"

namespace silence {

/// Everything a process did and observed in one round, in execution order:
/// the action taken at the round's opening boundary, its sends, a mid-round
/// decision, and the messages it received at the round's end.
struct RoundEntry {
  std::optional<Action> opening_decision;
  bool halted = false;  // halted at the opening boundary; nothing else follows
  std::vector<Send> sent;
  std::optional<Action> mid_round_decision;
  std::vector<Receipt> received;

  bool operator==(const RoundEntry&) const = default;
};

/// r_i(m): initial value, current time and the chronological history.
///
/// Actions taken at time m are outputs of r_i(m) and appear in r_i(m+1) as the
/// opening of round m+1. After a halt the history is frozen while the time keeps
/// advancing. A crashed state is bottom and equals only another bottom state.
struct LocalState {
  int initial_value = 0;
  int time = 0;
  std::vector<RoundEntry> history;
  bool crashed = false;

  static LocalState bottom(int time) {
    LocalState s;
    s.time = time;
    s.crashed = true;
    return s;
  }

  bool halted() const { return !history.empty() && history.back().halted; }

  std::optional<Decision> decision() const {
    for (std::size_t k = 0; k < history.size(); ++k) {
      const auto& e = history[k];
      if (e.opening_decision) return Decision{*e.opening_decision, static_cast<int>(k), false};
      if (e.mid_round_decision) return Decision{*e.mid_round_decision, static_cast<int>(k), true};
    }
    return std::nullopt;
  }

  /// Entry for `round` (1-based), or nullptr when the history does not reach it.
  const RoundEntry* round(int r) const {
    if (r < 1 || r > static_cast<int>(history.size())) return nullptr;
    return &history[r - 1];
  }

  friend bool operator==(const LocalState& a, const LocalState& b) {
    if (a.crashed || b.crashed) return a.crashed == b.crashed;
    return a.initial_value == b.initial_value && a.time == b.time && a.history == b.history;
  }
};

}  // namespace silence
