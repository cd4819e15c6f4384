#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "silence/analysis.hpp"
#include "silence/core.hpp"
#include "silence/enumerator.hpp"
#include "silence/fact.hpp"
#include "silence/protocols.hpp"
#include "silence/run.hpp"

namespace silence {

/// r_a ~_i^m r_b.
inline bool indistinguishable(const Run& a, const Run& b, ProcessId i, int m) {
  return local_state(a, i, m) == local_state(b, i, m);
}

struct KnowledgeAnswer {
  bool holds = true;
  std::size_t scanned = 0;                    // indistinguishable runs examined
  std::optional<std::size_t> counterexample;  // universe index of a run where the fact fails
};

/// K_i(fact) at time m of `run`, by a direct scan of `universe`.
/// Throws BottomStateError when r_i(m) is the crashed state.
inline KnowledgeAnswer knows(const RunUniverse& universe, const Run& run, ProcessId i, int m,
                             const Fact& fact) {
  const LocalState here = local_state(run, i, m);
  if (here.crashed)
    throw BottomStateError("state is ⊥: process " + std::to_string(i) + " crashed by time " +
                           std::to_string(m));
  KnowledgeAnswer a;
  for (std::size_t k = 0; k < universe.size(); ++k) {
    if (!(local_state(universe[k], i, m) == here)) continue;
    ++a.scanned;
    if (!fact_eval(universe[k], fact)) {
      a.holds = false;
      if (!a.counterexample) a.counterexample = k;
    }
  }
  return a;
}

/// Indistinguishability classes of every (process, time) slice of a universe.
///
/// Local states are interned incrementally: the id of r_i(m) is derived from
/// the id of r_i(m-1) and the id of the round-m history entry, so two runs
/// share a class exactly when their local states are equal. Each class keeps
/// its members and the AND of their initial-value masks.
class KnowledgeBase {
 public:
  static constexpr int kBottom = -1;

  explicit KnowledgeBase(const RunUniverse& universe)
      : universe_(&universe),
        n_(universe.params().n),
        horizon_(universe.params().horizon),
        slices_(static_cast<std::size_t>(n_) * (horizon_ + 1)) {
    for (auto& s : slices_) s.cls.assign(universe.size(), kBottom);
    Interner interner;
    std::vector<std::unordered_map<std::uint32_t, int>> dense(slices_.size());
    for (std::size_t k = 0; k < universe.size(); ++k) {
      const Run& run = universe[k];
      for (ProcessId i = 0; i < n_; ++i) {
        const auto hist = process_history(run, i);
        std::uint32_t id = interner.pair(kRootTag, static_cast<std::uint32_t>(run.initial_values[i]));
        for (int m = 0; m <= horizon_; ++m) {
          if (run.crashed_by(i, m)) break;
          if (m > 0) {
            const std::uint32_t entry =
                m - 1 < static_cast<int>(hist.size()) ? interner.entry(hist[m - 1]) : kNoEntry;
            id = interner.pair(id, entry);
          }
          const std::size_t si = slice_index(i, m);
          Slice& slice = slices_[si];
          auto [it, fresh] = dense[si].emplace(id, static_cast<int>(slice.members.size()));
          if (fresh) {
            slice.members.emplace_back();
            slice.and_ones.push_back(ProcessSet::all(n_).bits());
          }
          slice.cls[k] = it->second;
          slice.members[it->second].push_back(k);
          slice.and_ones[it->second] &= run.value_set().bits();
        }
      }
    }
  }

  const RunUniverse& universe() const { return *universe_; }
  int n() const { return n_; }
  int horizon() const { return horizon_; }

  /// Class of run k in slice (i,m), or kBottom if r_i(m) is crashed.
  int class_of(std::size_t k, ProcessId i, int m) const { return slice(i, m).cls[k]; }
  std::size_t class_count(ProcessId i, int m) const { return slice(i, m).members.size(); }
  const std::vector<std::size_t>& members(ProcessId i, int m, int cls) const {
    return slice(i, m).members.at(cls);
  }

  /// Processes j with K_i(v_j = 1) at time m of run k.
  ProcessSet known_ones(std::size_t k, ProcessId i, int m) const {
    const Slice& s = slice(i, m);
    return ProcessSet(s.and_ones[checked_class(s, k, i, m)]);
  }

  bool knows_all1(std::size_t k, ProcessId i, int m) const {
    return known_ones(k, i, m) == ProcessSet::all(n_);
  }

  KnowledgeAnswer knows(std::size_t k, ProcessId i, int m, const Fact& fact) const {
    const Slice& s = slice(i, m);
    KnowledgeAnswer a;
    for (std::size_t other : s.members[checked_class(s, k, i, m)]) {
      ++a.scanned;
      if (!fact_eval((*universe_)[other], fact)) {
        a.holds = false;
        if (!a.counterexample) a.counterexample = other;
      }
    }
    return a;
  }

  /// Truth of `fact` in every run of the universe.
  std::vector<char> truth(const Fact& fact) const {
    std::vector<char> t(universe_->size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = fact_eval((*universe_)[k], fact);
    return t;
  }

  /// For each class of slice (i,m): whether `truth` holds in all its members.
  std::vector<char> known_classes(ProcessId i, int m, const std::vector<char>& truth) const {
    const Slice& s = slice(i, m);
    std::vector<char> known(s.members.size(), 1);
    for (std::size_t c = 0; c < s.members.size(); ++c)
      for (std::size_t k : s.members[c])
        if (!truth[k]) {
          known[c] = 0;
          break;
        }
    return known;
  }

 private:
  static constexpr std::uint32_t kRootTag = 0xFFFFFFFFu;
  static constexpr std::uint32_t kNoEntry = 0xFFFFFFFEu;

  struct Slice {
    std::vector<int> cls;
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::uint32_t> and_ones;
  };

  class Interner {
   public:
    std::uint32_t entry(const RoundEntry& e) {
      std::string key;
      auto action = [&](const std::optional<Action>& a) {
        key.push_back(a ? static_cast<char>('1' + static_cast<int>(*a)) : '0');
      };
      auto payload = [&](ProcessId p, const Payload& pl) {
        key.push_back(static_cast<char>(p));
        key.push_back(static_cast<char>(pl.tag));
        const std::uint32_t b = pl.ids.bits();
        key.append(reinterpret_cast<const char*>(&b), sizeof b);
      };
      action(e.opening_decision);
      key.push_back(e.halted ? 'h' : '-');
      action(e.mid_round_decision);
      key.push_back('S');
      for (const auto& s : e.sent) payload(s.receiver, s.payload);
      key.push_back('R');
      for (const auto& r : e.received) payload(r.sender, r.payload);
      return entries_.emplace(std::move(key), static_cast<std::uint32_t>(entries_.size()))
          .first->second;
    }

    std::uint32_t pair(std::uint32_t prev, std::uint32_t entry) {
      const std::uint64_t key = (static_cast<std::uint64_t>(prev) << 32) | entry;
      return pairs_.emplace(key, static_cast<std::uint32_t>(pairs_.size())).first->second;
    }

   private:
    std::unordered_map<std::string, std::uint32_t> entries_;
    std::unordered_map<std::uint64_t, std::uint32_t> pairs_;
  };

  std::size_t slice_index(ProcessId i, int m) const {
    return static_cast<std::size_t>(i) * (horizon_ + 1) + m;
  }

  const Slice& slice(ProcessId i, int m) const {
    if (i < 0 || i >= n_) throw std::out_of_range("process id out of range");
    if (m < 0 || m > horizon_)
      throw std::out_of_range("time " + std::to_string(m) + " beyond recorded horizon " +
                              std::to_string(horizon_));
    return slices_[slice_index(i, m)];
  }

  static int checked_class(const Slice& s, std::size_t k, ProcessId i, int m) {
    const int c = s.cls.at(k);
    if (c == kBottom)
      throw BottomStateError("state is ⊥: process " + std::to_string(i) + " crashed by time " +
                             std::to_string(m));
    return c;
  }

  const RunUniverse* universe_;
  int n_;
  int horizon_;
  std::vector<Slice> slices_;
};

// ----------------------------------------------------------------------------
// Commit requires knowing all1
// ----------------------------------------------------------------------------

struct CommitKnowledgeReport {
  std::size_t commits = 0;
  ConditionTally violations;
};

/// Every commit at time t by process i must satisfy K_i(all1) at r_i(t).
inline CommitKnowledgeReport check_commit_knowledge(const KnowledgeBase& kb) {
  CommitKnowledgeReport report;
  const auto& u = kb.universe();
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Run& run = u[k];
    for (ProcessId i = 0; i < run.n(); ++i) {
      const auto& d = run.decisions[i];
      if (!d || d->action != Action::Commit) continue;
      ++report.commits;
      const ProcessSet known = kb.known_ones(k, i, d->time);
      if (known == ProcessSet::all(run.n())) continue;
      ProcessId unknown = 0;
      while (known.contains(unknown)) ++unknown;
      report.violations.note(run_key(run),
                             ConditionResult{false, detail::describe(i, *d) +
                                                        " without knowing all1 (v_" +
                                                        std::to_string(unknown) + " may be 0)"});
    }
  }
  return report;
}

// ----------------------------------------------------------------------------
// Silent inference instances
// ----------------------------------------------------------------------------

/// If process i gets no round-`round` message (optionally of one tag) from any
/// member of `senders`, it should know `phi`. Members of `senders` that equal i
/// are silent when i itself sent no such message in that round.
struct LemmaInstance {
  std::string label;
  Fact phi;
  ProcessSet senders;
  int round = 1;
  std::optional<Tag> tag;
};

struct LemmaResult {
  LemmaInstance instance;
  bool strong = false;             // |senders| exceeds the faults: plain K_i(phi) required
  std::size_t silent_points = 0;   // (run, i) pairs where the silence occurred
  std::size_t plain_failures = 0;  // silent points where K_i(phi) itself fails
  ConditionTally violations;
};

struct LemmaReport {
  std::vector<LemmaResult> results;

  std::size_t total_violations() const {
    std::size_t v = 0;
    for (const auto& r : results) v += r.violations.violations;
    return v;
  }
};

namespace detail {

inline bool silent_towards(const Run& run, const LemmaInstance& inst, ProcessId i) {
  for (const auto& msg : run.messages) {
    if (msg.round != inst.round) continue;
    if (inst.tag && msg.payload.tag != *inst.tag) continue;
    if (msg.receiver == i && inst.senders.contains(msg.sender)) return false;
    if (msg.sender == i && inst.senders.contains(i)) return false;
  }
  return true;
}

}  // namespace detail

/// Checks every instance over the universe. With more silent senders than
/// `max_faulty`, silence must give K_i(phi); otherwise only
/// K_i(phi or some sender is faulty) is required, and plain_failures records
/// how often K_i(phi) alone fails. Pass max_faulty = 0 for a failure-free
/// universe, where a single reliable sender suffices.
inline LemmaReport check_lemma_suite(const KnowledgeBase& kb,
                                     const std::vector<LemmaInstance>& instances,
                                     std::optional<int> max_faulty = std::nullopt) {
  const auto& u = kb.universe();
  const int faults = max_faulty.value_or(u.params().f);
  LemmaReport report;
  for (const auto& inst : instances) {
    if (inst.senders.empty() || (inst.senders.bits() & ~ProcessSet::all(kb.n()).bits()))
      throw ConfigError("lemma instance '" + inst.label + "' has an invalid sender set");
    if (inst.round < 1 || inst.round > kb.horizon())
      throw ConfigError("lemma instance '" + inst.label + "' names round " +
                        std::to_string(inst.round) + " outside the horizon");
    validate_fact(inst.phi, kb.n());

    LemmaResult res;
    res.instance = inst;
    res.strong = inst.senders.size() > faults;
    Fact weak = inst.phi;
    for (ProcessId j : inst.senders.members()) weak = Fact::either(weak, Fact::is_faulty(j));

    const auto plain_truth = kb.truth(inst.phi);
    const auto weak_truth = kb.truth(weak);
    for (ProcessId i = 0; i < kb.n(); ++i) {
      const auto plain_known = kb.known_classes(i, inst.round, plain_truth);
      const auto weak_known = kb.known_classes(i, inst.round, weak_truth);
      for (std::size_t k = 0; k < u.size(); ++k) {
        const int c = kb.class_of(k, i, inst.round);
        if (c == KnowledgeBase::kBottom || !detail::silent_towards(u[k], inst, i)) continue;
        ++res.silent_points;
        if (!plain_known[c]) ++res.plain_failures;
        const bool ok = res.strong ? plain_known[c] : weak_known[c];
        res.violations.note(run_key(u[k]),
                            ConditionResult{ok, "process " + std::to_string(i) +
                                                    " heard nothing at time " +
                                                    std::to_string(inst.round) +
                                                    " but does not know " +
                                                    to_string(res.strong ? inst.phi : weak)});
      }
    }
    report.results.push_back(std::move(res));
  }
  return report;
}

/// The instances each protocol is designed around.
inline std::vector<LemmaInstance> default_lemma_instances(ProtocolKind kind,
                                                          const SystemParams& params) {
  const int n = params.n;
  const int f = params.f;
  std::vector<LemmaInstance> out;
  const auto all = ProcessSet::all(n);
  switch (kind) {
    case ProtocolKind::Stealth: {
      ProcessSet first;
      for (ProcessId p = 0; p <= f; ++p) first.insert(p);
      out.push_back({"ERR silence of 0..f in round 3", Fact::all1(), first, 3, Tag::Err});
      out.push_back({"ERR silence of 0 in round 3", Fact::all1(), ProcessSet::single(0), 3, Tag::Err});
      break;
    }
    case ProtocolKind::D2:
    case ProtocolKind::MutantSmallChoirD2: {
      for (ProcessId j = 0; j < n; ++j) {
        ProcessSet choir;
        for (int d = 0; d <= f; ++d) choir.insert(wrap(j + d, n));
        out.push_back({"ERR silence of " + std::to_string(j) + "'s choir in round 2",
                       Fact::value_is(j, 1), choir, 2, Tag::Err});
        out.push_back({"ERR silence of " + std::to_string(j) + " in round 2", Fact::value_is(j, 1),
                       ProcessSet::single(j), 2, Tag::Err});
      }
      out.push_back({"ERR silence of everyone in round 2", Fact::all1(), all, 2, Tag::Err});
      break;
    }
    case ProtocolKind::D1f1:
      out.push_back({"HUH silence of everyone in round 2", Fact::all1(), all, 2, Tag::Huh});
      for (ProcessId j = 0; j < n; ++j)
        out.push_back({"HUH silence of " + std::to_string(j) + " in round 2", Fact::all1(),
                       ProcessSet::single(j), 2, Tag::Huh});
      break;
    case ProtocolKind::D15:
      out.push_back({"HUH silence of everyone in round 2", Fact::all1(), all, 2, Tag::Huh});
      break;
    case ProtocolKind::MutantCommitAtZero:
    case ProtocolKind::B1Consensus:
      break;
  }
  return out;
}

// ----------------------------------------------------------------------------
// Knowledge without message chains
// ----------------------------------------------------------------------------

struct ChoirReport {
  std::size_t checks = 0;             // (run, i, j, m) points with K_i(v_j=1), i != j
  std::size_t silent_inferences = 0;  // of those, points without a chain (j,0) ~> (i,m)
  ConditionTally violations;
};

/// Whenever K_i(v_j = 1) holds at time m without a chain (j,0) ~> (i,m), the
/// silent choir condition must hold: m > 0 and |F u S_j(m-1)| > f.
inline ChoirReport check_silent_choir(const KnowledgeBase& kb) {
  const auto& u = kb.universe();
  const int n = kb.n();
  ChoirReport report;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Run& run = u[k];
    std::vector<std::vector<int>> arrivals(n);
    for (ProcessId j = 0; j < n; ++j) arrivals[j] = chain_arrivals(run, j, 0);
    const int faulty_bits = static_cast<int>(run.faulty().bits());
    for (ProcessId i = 0; i < n; ++i) {
      for (int m = 0; m <= kb.horizon(); ++m) {
        if (kb.class_of(k, i, m) == KnowledgeBase::kBottom) break;
        const ProcessSet known = kb.known_ones(k, i, m);
        for (ProcessId j : known.members()) {
          if (j == i) continue;
          ++report.checks;
          if (arrivals[j][i] <= m) continue;
          ++report.silent_inferences;
          ProcessSet choir(static_cast<std::uint32_t>(faulty_bits));
          if (m > 0)
            for (ProcessId h = 0; h < n; ++h)
              if (arrivals[j][h] <= m - 1) choir.insert(h);
          const bool ok = m > 0 && choir.size() > run.params.f;
          report.violations.note(
              run_key(run), ConditionResult{ok, "process " + std::to_string(i) + " knows v_" +
                                                    std::to_string(j) + "=1 at time " +
                                                    std::to_string(m) + " with no chain and choir size " +
                                                    std::to_string(choir.size())});
        }
      }
    }
  }
  return report;
}

/// A point where a committing process knows v_j = 1 although no message
/// chain from (j,0) reaches it: silence carried the information.
struct SilentKnowledgeWitness {
  ProcessId i = 0;
  ProcessId j = 0;
  int m = 0;
  ChoirVerdict verdict;
};

inline std::optional<SilentKnowledgeWitness> find_silent_commit_knowledge(const KnowledgeBase& kb,
                                                                          std::size_t k) {
  const Run& run = kb.universe()[k];
  for (ProcessId i = 0; i < run.n(); ++i) {
    const auto& d = run.decisions[i];
    if (!d || d->action != Action::Commit) continue;
    for (ProcessId j : kb.known_ones(k, i, d->time).members()) {
      if (j == i) continue;
      auto verdict = silent_choir_check(run, i, j, d->time);
      if (!verdict.chain_exists) return SilentKnowledgeWitness{i, j, d->time, verdict};
    }
  }
  return std::nullopt;
}

// ----------------------------------------------------------------------------
// Knowledge Property and perfect recall
// ----------------------------------------------------------------------------

struct KnowledgePropertyReport {
  std::size_t queries = 0;
  ConditionTally truth;   // K_i(phi) holds but phi is false
  ConditionTally recall;  // K_i(phi) at m, not at m+1, i alive at m+1
};

/// The facts the property checks quantify over.
inline std::vector<Fact> standard_facts(int n) {
  std::vector<Fact> facts{Fact::all1(), Fact::negate(Fact::all1())};
  for (ProcessId j = 0; j < n; ++j) {
    facts.push_back(Fact::value_is(j, 1));
    facts.push_back(Fact::value_is(j, 0));
    facts.push_back(Fact::is_faulty(j));
    facts.push_back(Fact::chain_to_correct(j));
    facts.push_back(Fact::either(Fact::value_is(j, 1), Fact::is_faulty(j)));
  }
  return facts;
}

inline KnowledgePropertyReport check_knowledge_properties(const KnowledgeBase& kb,
                                                          const std::vector<Fact>& facts) {
  const auto& u = kb.universe();
  KnowledgePropertyReport report;
  for (const Fact& fact : facts) {
    const auto truth = kb.truth(fact);
    for (ProcessId i = 0; i < kb.n(); ++i) {
      std::vector<std::vector<char>> known(kb.horizon() + 1);
      for (int m = 0; m <= kb.horizon(); ++m) known[m] = kb.known_classes(i, m, truth);
      for (std::size_t k = 0; k < u.size(); ++k) {
        for (int m = 0; m <= kb.horizon(); ++m) {
          const int c = kb.class_of(k, i, m);
          if (c == KnowledgeBase::kBottom) break;
          ++report.queries;
          if (!known[m][c]) continue;
          const std::string where = "process " + std::to_string(i) + " at time " +
                                    std::to_string(m) + " and fact " + to_string(fact);
          report.truth.note(run_key(u[k]), ConditionResult{truth[k] != 0, "knows false fact: " + where});
          if (m < kb.horizon()) {
            const int next = kb.class_of(k, i, m + 1);
            if (next != KnowledgeBase::kBottom)
              report.recall.note(run_key(u[k]),
                                 ConditionResult{known[m + 1][next] != 0, "forgets: " + where});
          }
        }
      }
    }
  }
  return report;
}

}  // namespace silence
