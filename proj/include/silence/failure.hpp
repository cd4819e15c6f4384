#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "silence/core.hpp"

namespace silence {

/// One faulty process and the adversary's choice for its crash round.
///
/// Under GammaF the surviving crash-round sends are `delivered`, a subset of
/// the receivers the protocol prescribes in that round. Under GammaTildeF the
/// sends are ordered by receiver id and the first `prefix` of them complete;
/// `decide_before_crash` lets a prescribed mid-round decision execute when the
/// whole send list completed.
struct CrashEntry {
  ProcessId process = 0;
  int crash_round = 1;
  ProcessSet delivered;
  int prefix = 0;
  bool decide_before_crash = false;

  bool operator==(const CrashEntry&) const = default;
};

struct FailureSpec {
  std::vector<CrashEntry> entries;

  bool empty() const { return entries.empty(); }

  const CrashEntry* find(ProcessId p) const {
    for (const auto& e : entries)
      if (e.process == p) return &e;
    return nullptr;
  }

  ProcessSet faulty() const {
    ProcessSet s;
    for (const auto& e : entries) s.insert(e.process);
    return s;
  }

  /// Entries sorted by process id; the form stored in runs and used as a key.
  FailureSpec canonical() const {
    FailureSpec c = *this;
    std::sort(c.entries.begin(), c.entries.end(),
              [](const CrashEntry& a, const CrashEntry& b) { return a.process < b.process; });
    return c;
  }

  bool operator==(const FailureSpec&) const = default;
};

/// Returns a description of the first violated invariant, or nullopt when the
/// spec is admissible for `params`.
inline std::optional<std::string> validate_failure_spec(const FailureSpec& spec,
                                                        const SystemParams& params) {
  if (static_cast<int>(spec.entries.size()) > params.f)
    return "failure spec exceeds f: " + std::to_string(spec.entries.size()) + " faulty > f=" +
           std::to_string(params.f);
  ProcessSet seen;
  for (const auto& e : spec.entries) {
    if (e.process < 0 || e.process >= params.n)
      return "process " + std::to_string(e.process) + " out of range [0," +
             std::to_string(params.n) + ")";
    if (seen.contains(e.process))
      return "duplicate crash entry for process " + std::to_string(e.process);
    seen.insert(e.process);
    if (e.crash_round < 1)
      return "crash round must be >= 1 (process " + std::to_string(e.process) + ")";
    if (e.crash_round > params.horizon)
      return "crash round " + std::to_string(e.crash_round) + " exceeds horizon " +
             std::to_string(params.horizon);
    if (e.prefix < 0) return "negative send prefix for process " + std::to_string(e.process);
    if ((e.delivered.bits() & ~ProcessSet::all(params.n).bits()) != 0)
      return "delivery set names processes outside [0,n)";
    if (e.delivered.contains(e.process))
      return "delivery set of process " + std::to_string(e.process) + " contains itself";
  }
  return std::nullopt;
}

}  // namespace silence
