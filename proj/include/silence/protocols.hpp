#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "silence/core.hpp"
#include "silence/protocol.hpp"

namespace silence {

// ----------------------------------------------------------------------------
// Biased-to-1 uniform consensus
// ----------------------------------------------------------------------------

struct ConsensusParams {
  int tolerance = 0;  // crashes tolerated; the sub-phase runs tolerance+1 rounds
  bool proposal = false;
};

/// One step of the flooding realization of biased-to-1 uniform consensus.
///
/// The sub-phase occupies rounds first_round .. first_round+tolerance. A
/// process holds '1' if it proposed 1 or received '1' in an earlier sub-round;
/// it broadcasts '1' exactly once, in the first sub-round after it starts
/// holding it. At the end of the last sub-round it decides 1 iff it holds '1'
/// (commit for 1, abort for 0) and halts. `view.time()` must lie in
/// [first_round-1, first_round+tolerance].
inline StepOutput b1_consensus_step(const ProcessView& view, const ConsensusParams& cp,
                                    int first_round) {
  const int last_round = first_round + cp.tolerance;
  const int m = view.time();
  if (m < first_round - 1 || m > last_round)
    throw KernelFault("consensus step outside its sub-phase (time " + std::to_string(m) + ")");

  bool holds_one = cp.proposal;
  bool already_sent = false;
  for (int r = first_round; r <= m; ++r) {
    holds_one = holds_one || view.received(r, Tag::Cons1);
    already_sent = already_sent || view.sent(r, Tag::Cons1);
  }

  StepOutput out;
  if (m == last_round) {
    out.boundary_decision = holds_one ? Action::Commit : Action::Abort;
    out.halt = true;
    return out;
  }
  if (holds_one && !already_sent) send_to(out, view.others(), view.id(), Payload{Tag::Cons1, {}});
  return out;
}

/// Consensus run in isolation from time 0: proposals are the initial values.
struct B1Consensus {
  int tolerance = 0;

  std::string_view name() const { return "b1consensus"; }
  int default_horizon(int /*f*/) const { return tolerance + 1; }
  void check(const SystemParams&) const {
    if (tolerance < 0) throw ConfigError("consensus tolerance must be >= 0");
  }
  StepOutput step(const ProcessView& v) const {
    return b1_consensus_step(v, ConsensusParams{tolerance, v.value() == 1}, 1);
  }
};

namespace detail {

// Applies the "if haven't performed commit" guard to a consensus step.
inline StepOutput guarded_consensus(const ProcessView& v, bool proposal, int first_round) {
  StepOutput out = b1_consensus_step(v, ConsensusParams{v.f() - 1, proposal}, first_round);
  if (out.boundary_decision && v.decision()) out.boundary_decision.reset();
  return out;
}

inline ProcessSet successors(ProcessId i, int count, int n) {
  ProcessSet s;
  for (int k = 1; k <= count; ++k) s.insert(wrap(i + k, n));
  return s;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// STEALTH: n+f-1 messages, commit at time 3 in nice runs
// ----------------------------------------------------------------------------

inline StepOutput stealth_step(const ProcessView& v) {
  const int m = v.time();
  const ProcessId i = v.id();
  StepOutput out;

  // Process 0 holds all[1] iff it has '1' from everyone, itself included.
  auto coordinator_has_all = [&] { return v.value() == 1 && v.senders(1, Tag::One) == v.others(); };
  auto holds_all1 = [&] { return i == 0 ? coordinator_has_all() : v.received(2, Tag::All1); };

  switch (m) {
    case 0:
      if (v.value() == 1 && i != 0) out.sends.push_back(Send{0, Payload{Tag::One, {}}});
      return out;
    case 1:
      if (i == 0 && coordinator_has_all())
        send_to(out, ProcessSet::all(v.f() + 1), i, Payload{Tag::All1, {}});
      return out;
    case 2:
      if (i <= v.f() && !holds_all1()) send_to(out, v.others(), i, Payload{Tag::Err, {}});
      return out;
    case 3:
      if (!v.received(3, Tag::Err) && !v.sent(3, Tag::Err))
        out.boundary_decision = Action::Commit;
      else
        send_to(out, v.others(), i, Payload{Tag::Huh, {}});
      return out;
    case 4:
      if (!v.received(4, Tag::Huh) && !v.sent(4, Tag::Huh)) {
        out.halt = true;
        return out;
      }
      [[fallthrough]];
    default:
      return detail::guarded_consensus(v, holds_all1() || v.committed(), 5);
  }
}

struct Stealth {
  std::string_view name() const { return "stealth"; }
  int default_horizon(int f) const { return f + 5; }
  void check(const SystemParams&) const {}
  StepOutput step(const ProcessView& v) const { return stealth_step(v); }
};

// ----------------------------------------------------------------------------
// D2: f*n messages, commit at time 2 in nice runs
// ----------------------------------------------------------------------------

/// `choir` is the size of each process's round-one choir {i, ..., i+choir-1};
/// the protocol proper uses f+1. Smaller values produce a broken variant.
inline StepOutput d2_step_with_choir(const ProcessView& v, int choir) {
  const int m = v.time();
  const ProcessId i = v.id();
  StepOutput out;

  auto own_ids = [&] {
    ProcessSet ids = v.senders(1, Tag::One);
    if (v.value() == 1) ids.insert(i);
    return ids;
  };

  switch (m) {
    case 0:
      if (v.value() == 1)
        send_to(out, detail::successors(i, choir - 1, v.n()), i, Payload{Tag::One, {}});
      return out;
    case 1:
      if (own_ids().size() < choir) send_to(out, v.others(), i, Payload{Tag::Err, {}});
      return out;
    case 2:
      if (!v.received(2, Tag::Err) && !v.sent(2, Tag::Err))
        out.boundary_decision = Action::Commit;
      else
        send_to(out, v.others(), i, Payload{Tag::Ids, own_ids()});
      return out;
    case 3:
      if (!v.received_any(3) && !v.sent_any(3)) {
        out.halt = true;
        return out;
      }
      [[fallthrough]];
    default: {
      ProcessSet known = own_ids();
      for (const auto& p : v.payloads(3, Tag::Ids)) known |= p.ids;
      const bool proposal = known == ProcessSet::all(v.n()) || v.committed();
      return detail::guarded_consensus(v, proposal, 4);
    }
  }
}

inline StepOutput d2_step(const ProcessView& v) { return d2_step_with_choir(v, v.f() + 1); }

struct D2 {
  std::string_view name() const { return "d2"; }
  int default_horizon(int f) const { return f + 4; }
  void check(const SystemParams&) const {}
  StepOutput step(const ProcessView& v) const { return d2_step(v); }
};

// ----------------------------------------------------------------------------
// D1f1: n^2-n messages, commit at time 1 in nice runs, f = 1 only
// ----------------------------------------------------------------------------

inline StepOutput d1f1_step(const ProcessView& v) {
  if (v.f() != 1) throw ConfigError("d1f1 requires f=1");
  const int m = v.time();
  const ProcessId i = v.id();
  StepOutput out;

  switch (m) {
    case 0:
      if (v.value() == 1) send_to(out, v.others(), i, Payload{Tag::One, {}});
      return out;
    case 1:
      if (v.value() == 1 && v.senders(1, Tag::One) == v.others())
        out.boundary_decision = Action::Commit;
      else
        send_to(out, v.others(), i, Payload{Tag::Huh, {}});
      return out;
    case 2:
      if (v.committed()) {
        ProcessSet askers = v.senders(2, Tag::Huh);
        if (askers.empty())
          out.halt = true;
        else
          send_to(out, askers, i, Payload{Tag::All1, {}});
      }
      return out;
    default:
      if (!v.committed())
        out.boundary_decision = v.received(3, Tag::All1) ? Action::Commit : Action::Abort;
      out.halt = true;
      return out;
  }
}

struct D1f1 {
  std::string_view name() const { return "d1f1"; }
  int default_horizon(int) const { return 3; }
  void check(const SystemParams& p) const {
    if (p.f != 1) throw ConfigError("d1f1 requires f=1");
  }
  StepOutput step(const ProcessView& v) const { return d1f1_step(v); }
};

// ----------------------------------------------------------------------------
// 1.5D: n^2+nf-n messages, commit mid-round two, GammaTildeF only
// ----------------------------------------------------------------------------

inline StepOutput d15_step(const ProcessView& v) {
  if (v.params().context != Context::GammaTildeF)
    throw ConfigError("d15 requires context gamma-tilde");
  const int m = v.time();
  const ProcessId i = v.id();
  StepOutput out;

  switch (m) {
    case 0:
      if (v.value() == 1) send_to(out, v.others(), i, Payload{Tag::One, {}});
      return out;
    case 1:
      if (v.value() == 1 && v.senders(1, Tag::One) == v.others()) {
        send_to(out, detail::successors(i, v.f(), v.n()), i, Payload{Tag::All1, {}});
        out.mid_round_decision = Action::Commit;
      } else {
        send_to(out, v.others(), i, Payload{Tag::Huh, {}});
      }
      return out;
    case 2:
      if (!v.received(2, Tag::Huh) && !v.sent(2, Tag::Huh)) {
        out.halt = true;
        return out;
      }
      [[fallthrough]];
    default:
      return detail::guarded_consensus(v, v.received(2, Tag::All1) || v.committed(), 3);
  }
}

struct D15 {
  std::string_view name() const { return "d15"; }
  int default_horizon(int f) const { return f + 4; }
  void check(const SystemParams& p) const {
    if (p.context != Context::GammaTildeF) throw ConfigError("d15 requires context gamma-tilde");
  }
  StepOutput step(const ProcessView& v) const { return d15_step(v); }
};

// ----------------------------------------------------------------------------
// Planted mutants for checker self-tests
// ----------------------------------------------------------------------------

/// Commits at time 0 without communicating.
struct MutantCommitAtZero {
  std::string_view name() const { return "mutant-commit0"; }
  int default_horizon(int) const { return 1; }
  void check(const SystemParams&) const {}
  StepOutput step(const ProcessView& v) const {
    StepOutput out;
    if (v.time() == 0) out.boundary_decision = Action::Commit;
    out.halt = true;
    return out;
  }
};

/// D2 with round-one choirs of size f instead of f+1.
struct MutantSmallChoirD2 {
  std::string_view name() const { return "mutant-d2-choir"; }
  int default_horizon(int f) const { return f + 4; }
  void check(const SystemParams&) const {}
  StepOutput step(const ProcessView& v) const { return d2_step_with_choir(v, v.f()); }
};

// ----------------------------------------------------------------------------
// Runtime selection by name
// ----------------------------------------------------------------------------

enum class ProtocolKind { Stealth, D2, D1f1, D15, MutantCommitAtZero, MutantSmallChoirD2, B1Consensus };

/// Type-erased protocol selected by its CLI/trace name.
class AnyProtocol {
 public:
  using Variant =
      std::variant<Stealth, D2, D1f1, D15, MutantCommitAtZero, MutantSmallChoirD2, B1Consensus>;

  template <typename P>
    requires std::constructible_from<Variant, P>
  AnyProtocol(P p) : impl_(std::move(p)) {}  // NOLINT(google-explicit-constructor)

  /// Names: stealth | d2 | d1f1 | d15 | mutant-commit0 | mutant-d2-choir |
  /// b1consensus (tolerance f).
  static AnyProtocol from_name(std::string_view name, const SystemParams& params) {
    if (name == "stealth") return Stealth{};
    if (name == "d2") return D2{};
    if (name == "d1f1") return D1f1{};
    if (name == "d15") return D15{};
    if (name == "mutant-commit0") return MutantCommitAtZero{};
    if (name == "mutant-d2-choir") return MutantSmallChoirD2{};
    if (name == "b1consensus") return B1Consensus{params.f};
    throw ConfigError("unknown protocol '" + std::string(name) +
                      "' (expected stealth | d2 | d1f1 | d15)");
  }

  ProtocolKind kind() const { return static_cast<ProtocolKind>(impl_.index()); }
  std::string_view name() const {
    return std::visit([](const auto& p) { return p.name(); }, impl_);
  }
  int default_horizon(int f) const {
    return std::visit([f](const auto& p) { return p.default_horizon(f); }, impl_);
  }
  void check(const SystemParams& params) const {
    std::visit([&](const auto& p) { p.check(params); }, impl_);
  }
  StepOutput step(const ProcessView& v) const {
    return std::visit([&](const auto& p) { return p.step(v); }, impl_);
  }

 private:
  Variant impl_;
};

static_assert(Protocol<Stealth> && Protocol<D2> && Protocol<D1f1> && Protocol<D15>);
static_assert(Protocol<AnyProtocol>);

/// Parameters with the protocol's default horizon filled in.
template <typename P>
SystemParams default_params(const P& protocol, int n, int f,
                            Context context = Context::GammaF) {
  return SystemParams{n, f, context, protocol.default_horizon(f)};
}

}  // namespace silence
