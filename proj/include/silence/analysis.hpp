#pragma once

#include <climits>
#include <optional>
#include <string>
#include <vector>

#include "silence/core.hpp"
#include "silence/run.hpp"

namespace silence {

// ----------------------------------------------------------------------------
// Message chains
// ----------------------------------------------------------------------------

struct ChainQuery {
  ProcessId from = 0;
  int from_time = 0;
  ProcessId to = 0;
  int to_time = 0;
};

inline constexpr int kUnreached = INT_MAX;

/// For every process h, the earliest time t such that (j, from_time) ~> (h, t),
/// or kUnreached. A message of round k is sent at time k-1 and is in the
/// receiver's hands at time k; consecutive chain messages have strictly
/// increasing send times.
inline std::vector<int> chain_arrivals(const Run& run, ProcessId j, int from_time) {
  std::vector<int> arrival(run.n(), kUnreached);
  arrival[j] = from_time;
  // messages are sorted by round, so one forward pass reaches the fixpoint
  for (const auto& msg : run.messages) {
    const int send_time = msg.round - 1;
    if (arrival[msg.sender] <= send_time && msg.round < arrival[msg.receiver])
      arrival[msg.receiver] = msg.round;
  }
  return arrival;
}

inline bool message_chain_exists(const Run& run, const ChainQuery& q) {
  if (q.from == q.to && q.from_time <= q.to_time) return true;
  return chain_arrivals(run, q.from, q.from_time)[q.to] <= q.to_time;
}

/// S_j(t): processes h with (j,0) ~> (h,t). Always contains j.
inline ProcessSet reach_set(const Run& run, ProcessId j, int t) {
  const auto arrival = chain_arrivals(run, j, 0);
  ProcessSet s;
  for (ProcessId h = 0; h < run.n(); ++h)
    if (arrival[h] <= t) s.insert(h);
  return s;
}

/// Processes reached from (j,0) at any time of the run.
inline ProcessSet reach_set_ever(const Run& run, ProcessId j) {
  const auto arrival = chain_arrivals(run, j, 0);
  ProcessSet s;
  for (ProcessId h = 0; h < run.n(); ++h)
    if (arrival[h] != kUnreached) s.insert(h);
  return s;
}

// ----------------------------------------------------------------------------
// Silent choir
// ----------------------------------------------------------------------------

struct ChoirVerdict {
  bool chain_exists = false;
  ProcessSet reach_set;    // S_j(m-1); empty when m = 0
  ProcessSet faulty_set;   // F
  int choir_size = 0;      // |F u S_j(m-1)|
  bool satisfies_theorem = false;
};

/// Evaluates the choir condition for i learning about j by time m: either a
/// chain (j,0) ~> (i,m) exists, or m > 0 and |F u S_j(m-1)| > f.
inline ChoirVerdict silent_choir_check(const Run& run, ProcessId i, ProcessId j, int m) {
  ChoirVerdict v;
  v.chain_exists = message_chain_exists(run, ChainQuery{j, 0, i, m});
  v.faulty_set = run.faulty();
  if (m > 0) v.reach_set = reach_set(run, j, m - 1);
  v.choir_size = (v.faulty_set | v.reach_set).size();
  v.satisfies_theorem = v.chain_exists || (m > 0 && v.choir_size > run.params.f);
  return v;
}

// ----------------------------------------------------------------------------
// Message-count bound from chain coverage
// ----------------------------------------------------------------------------

struct RankCheck {
  bool applicable = false;  // every process has chains to >= k others
  int message_count = 0;
  bool bound_holds = true;  // message_count >= n+k-1; vacuously true when not applicable
};

inline int min_chain_coverage(const Run& run) {
  int lowest = run.n();
  for (ProcessId j = 0; j < run.n(); ++j) lowest = std::min(lowest, reach_set_ever(run, j).size() - 1);
  return lowest;
}

inline RankCheck rank_bound_check(const Run& run, int k) {
  if (k <= 0) throw ConfigError("rank bound requires k > 0");
  RankCheck c;
  c.message_count = static_cast<int>(run.messages.size());
  c.applicable = min_chain_coverage(run) >= k;
  if (c.applicable) c.bound_holds = c.message_count >= run.n() + k - 1;
  return c;
}

/// Length of the longest message chain starting at (i,0).
inline int chain_rank(const Run& run, ProcessId i) {
  // longest[h]: longest chain from (i,0) whose last message reaches h, paired
  // with its arrival time; messages of one round cannot extend each other.
  std::vector<std::vector<int>> best(run.n());  // best[h][t]: longest chain ending at (h,t)
  const int last_round = run.messages.empty() ? 0 : run.messages.back().round;
  for (auto& row : best) row.assign(last_round + 1, -1);
  best[i][0] = 0;
  int rank = 0;
  for (const auto& msg : run.messages) {
    int from = -1;
    for (int t = 0; t <= msg.round - 1; ++t) from = std::max(from, best[msg.sender][t]);
    if (from < 0) continue;
    best[msg.receiver][msg.round] = std::max(best[msg.receiver][msg.round], from + 1);
    rank = std::max(rank, from + 1);
  }
  return rank;
}

// ----------------------------------------------------------------------------
// Metrics and AC verdicts
// ----------------------------------------------------------------------------

struct Metrics {
  int messages = 0;
  std::vector<std::optional<Decision>> decisions;
  std::vector<std::optional<int>> halt_times;
};

inline Metrics metrics(const Run& run) {
  return Metrics{static_cast<int>(run.messages.size()), run.decisions, run.halt_times};
}

struct ConditionResult {
  bool pass = true;
  std::string witness;
};

struct AcVerdict {
  ConditionResult agreement;
  ConditionResult commit_validity;
  ConditionResult abort_validity;
  ConditionResult decision;

  bool all_pass() const {
    return agreement.pass && commit_validity.pass && abort_validity.pass && decision.pass;
  }
};

namespace detail {
inline std::string describe(ProcessId p, const Decision& d) {
  return "process " + std::to_string(p) + " " + std::string(to_string(d.action)) + "s at time " +
         std::to_string(d.time) + (d.mid_round ? " (mid-round)" : "");
}
}  // namespace detail

/// Decision is judged at the horizon: every process that never crashes must
/// have decided by then.
inline AcVerdict ac_verdict(const Run& run) {
  AcVerdict v;
  std::optional<ProcessId> committer, aborter;
  for (ProcessId p = 0; p < run.n(); ++p) {
    const auto& d = run.decisions[p];
    if (!d) {
      if (!run.is_faulty(p) && v.decision.pass) {
        v.decision.pass = false;
        v.decision.witness = "correct process " + std::to_string(p) + " undecided at horizon " +
                             std::to_string(run.params.horizon);
      }
      continue;
    }
    if (d->action == Action::Commit) {
      if (!committer) committer = p;
      if (!run.all_ones() && v.commit_validity.pass) {
        ProcessId zero = 0;
        while (run.initial_values[zero] == 1) ++zero;
        v.commit_validity.pass = false;
        v.commit_validity.witness =
            detail::describe(p, *d) + " although v_" + std::to_string(zero) + "=0";
      }
    } else {
      if (!aborter) aborter = p;
      if (run.nice() && v.abort_validity.pass) {
        v.abort_validity.pass = false;
        v.abort_validity.witness = detail::describe(p, *d) + " in a nice run";
      }
    }
  }
  if (committer && aborter) {
    v.agreement.pass = false;
    v.agreement.witness = detail::describe(*committer, *run.decisions[*committer]) + "; " +
                          detail::describe(*aborter, *run.decisions[*aborter]);
  }
  return v;
}

/// Violation count and first witness for one condition over many runs.
struct ConditionTally {
  std::size_t violations = 0;
  std::string first_witness;  // "<run key>: <witness>"

  void note(const std::string& key, const ConditionResult& r) {
    if (r.pass) return;
    if (violations++ == 0) first_witness = key + ": " + r.witness;
  }
};

struct AcReport {
  std::size_t runs = 0;
  ConditionTally agreement, commit_validity, abort_validity, decision;

  std::size_t total_violations() const {
    return agreement.violations + commit_validity.violations + abort_validity.violations +
           decision.violations;
  }

  void add(const Run& run) {
    ++runs;
    const auto v = ac_verdict(run);
    if (v.all_pass()) return;
    const auto key = run_key(run);
    agreement.note(key, v.agreement);
    commit_validity.note(key, v.commit_validity);
    abort_validity.note(key, v.abort_validity);
    decision.note(key, v.decision);
  }
};

template <typename Runs>
AcReport ac_verdict_all(const Runs& runs) {
  AcReport report;
  for (const Run& r : runs) report.add(r);
  return report;
}

// ----------------------------------------------------------------------------
// Universe-wide chain-coverage check
// ----------------------------------------------------------------------------

struct RankReport {
  std::size_t runs = 0;
  std::size_t applicable_checks = 0;
  ConditionTally violations;
};

/// Checks the n+k-1 message bound for every run and every applicable k <= n-1.
template <typename Runs>
RankReport rank_bound_all(const Runs& runs) {
  RankReport report;
  for (const Run& r : runs) {
    ++report.runs;
    const int coverage = min_chain_coverage(r);
    for (int k = 1; k <= std::min(coverage, r.n() - 1); ++k) {
      ++report.applicable_checks;
      const auto c = rank_bound_check(r, k);
      ConditionResult res{c.bound_holds, "k=" + std::to_string(k) + " but only " +
                                             std::to_string(c.message_count) + " messages"};
      report.violations.note(run_key(r), res);
    }
  }
  return report;
}

}  // namespace silence
