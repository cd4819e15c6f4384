#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "silence/core.hpp"
#include "silence/failure.hpp"
#include "silence/local_state.hpp"

namespace silence {

/// Complete record of one execution.
///
/// `messages` holds every message that left its sender, sorted by (round,
/// sender, receiver); self-deliveries are virtual and never appear. Local
/// states are not stored: local_state() rebuilds them from the record.
struct Run {
  std::string protocol;
  SystemParams params;
  std::vector<int> initial_values;
  FailureSpec failures;  // canonical: sorted, only crashes that took effect
  std::vector<MessageRecord> messages;
  std::vector<std::optional<Decision>> decisions;
  std::vector<std::optional<int>> halt_times;
  int end_time = 0;  // time at which the execution stopped

  int n() const { return params.n; }

  std::optional<int> crash_round(ProcessId p) const {
    if (const auto* e = failures.find(p)) return e->crash_round;
    return std::nullopt;
  }

  bool is_faulty(ProcessId p) const { return failures.find(p) != nullptr; }
  ProcessSet faulty() const { return failures.faulty(); }

  /// Crashed in a round <= m, i.e. bottom at time m.
  bool crashed_by(ProcessId p, int m) const {
    auto c = crash_round(p);
    return c && *c <= m;
  }

  bool all_ones() const {
    return std::all_of(initial_values.begin(), initial_values.end(), [](int v) { return v == 1; });
  }
  bool nice() const { return all_ones() && failures.empty(); }

  ProcessSet value_set() const {
    ProcessSet s;
    for (int p = 0; p < n(); ++p)
      if (initial_values[p] == 1) s.insert(p);
    return s;
  }

  bool operator==(const Run&) const = default;
};

/// Canonical lookup key of a run: its initial values and failure spec.
inline std::string run_key(const std::vector<int>& values, const FailureSpec& spec) {
  std::string k;
  k.reserve(values.size() + 16 * spec.entries.size());
  for (int v : values) k.push_back(static_cast<char>('0' + v));
  for (const auto& e : spec.canonical().entries) {
    k += '|';
    k += std::to_string(e.process) + ':' + std::to_string(e.crash_round) + ':' +
         std::to_string(e.delivered.bits()) + ':' + std::to_string(e.prefix) +
         (e.decide_before_crash ? "+d" : "");
  }
  return k;
}

inline std::string run_key(const Run& r) { return run_key(r.initial_values, r.failures); }

/// Full history of process i in `run`, one entry per round in which it was
/// active (the last entry is the halt marker if it halted before the horizon).
/// Rounds at or after the crash round are omitted.
inline std::vector<RoundEntry> process_history(const Run& run, ProcessId i) {
  const int horizon = run.params.horizon;
  const auto crash = run.crash_round(i);
  const auto& dec = run.decisions[i];
  const auto& halt = run.halt_times[i];

  int last = horizon;
  if (halt) last = std::min(last, *halt + 1);
  if (crash) last = std::min(last, *crash - 1);

  std::vector<RoundEntry> hist(std::max(last, 0));
  for (int k = 1; k <= last; ++k) {
    auto& e = hist[k - 1];
    if (dec && !dec->mid_round && dec->time == k - 1) e.opening_decision = dec->action;
    if (halt && *halt == k - 1) {
      e.halted = true;
      continue;
    }
    if (dec && dec->mid_round && dec->time == k - 1) e.mid_round_decision = dec->action;
  }
  for (const auto& msg : run.messages) {
    if (msg.round > last) continue;
    auto& e = hist[msg.round - 1];
    if (e.halted) continue;
    if (msg.sender == i) e.sent.push_back(Send{msg.receiver, msg.payload});
    if (msg.receiver == i) e.received.push_back(Receipt{msg.sender, msg.payload});
  }
  return hist;
}

/// Builds r_i(m) from a history produced by process_history().
inline LocalState state_from_history(const Run& run, ProcessId i, int m,
                                     const std::vector<RoundEntry>& hist) {
  if (run.crashed_by(i, m)) return LocalState::bottom(m);
  LocalState s;
  s.initial_value = run.initial_values[i];
  s.time = m;
  const int len = std::min<int>(m, static_cast<int>(hist.size()));
  s.history.assign(hist.begin(), hist.begin() + len);
  return s;
}

/// r_i(m). Throws std::out_of_range when m lies beyond the run's horizon.
inline LocalState local_state(const Run& run, ProcessId i, int m) {
  if (i < 0 || i >= run.n()) throw std::out_of_range("process id out of range");
  if (m < 0 || m > run.params.horizon)
    throw std::out_of_range("time " + std::to_string(m) + " beyond recorded horizon " +
                            std::to_string(run.params.horizon));
  return state_from_history(run, i, m, process_history(run, i));
}

}  // namespace silence
