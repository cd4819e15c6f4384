#pragma once

#include <concepts>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "silence/core.hpp"
#include "silence/local_state.hpp"

namespace silence {

/// What a live process does at time m, computed from r_i(m): a decision and/or
/// halt at the boundary, then the sends of round m+1, then an optional
/// decision taken mid-round after those sends.
struct StepOutput {
  std::optional<Action> boundary_decision;
  bool halt = false;
  std::vector<Send> sends;
  std::optional<Action> mid_round_decision;
};

/// Read-only handle a protocol step receives: who it is, the system
/// parameters, and its current local state.
class ProcessView {
 public:
  /// Throws KernelFault for a crashed state: protocols never step at ⊥.
  ProcessView(ProcessId id, const SystemParams& params, const LocalState& state)
      : id_(id), params_(params), state_(state) {
    if (state.crashed) throw KernelFault("protocol step on the crashed state of process " + std::to_string(id));
  }

  ProcessId id() const { return id_; }
  int n() const { return params_.n; }
  int f() const { return params_.f; }
  int time() const { return state_.time; }
  int value() const { return state_.initial_value; }
  const SystemParams& params() const { return params_; }
  const LocalState& state() const { return state_; }

  std::optional<Decision> decision() const { return state_.decision(); }
  bool committed() const {
    auto d = decision();
    return d && d->action == Action::Commit;
  }

  /// Senders of `tag` messages received in `round`.
  ProcessSet senders(int round, Tag tag) const {
    ProcessSet s;
    if (const auto* e = state_.round(round))
      for (const auto& r : e->received)
        if (r.payload.tag == tag) s.insert(r.sender);
    return s;
  }

  bool received(int round, Tag tag) const { return !senders(round, tag).empty(); }

  bool received_any(int round) const {
    const auto* e = state_.round(round);
    return e && !e->received.empty();
  }

  bool sent(int round, Tag tag) const {
    if (const auto* e = state_.round(round))
      for (const auto& s : e->sent)
        if (s.payload.tag == tag) return true;
    return false;
  }

  bool sent_any(int round) const {
    const auto* e = state_.round(round);
    return e && !e->sent.empty();
  }

  /// Payloads of `tag` messages received in `round`.
  std::vector<Payload> payloads(int round, Tag tag) const {
    std::vector<Payload> out;
    if (const auto* e = state_.round(round))
      for (const auto& r : e->received)
        if (r.payload.tag == tag) out.push_back(r.payload);
    return out;
  }

  ProcessSet others() const {
    ProcessSet s = ProcessSet::all(params_.n);
    s.erase(id_);
    return s;
  }

 private:
  ProcessId id_;
  const SystemParams& params_;
  const LocalState& state_;
};

/// A deterministic round-based protocol the kernel can execute.
template <typename P>
concept Protocol = requires(const P& p, const ProcessView& v, const SystemParams& sp) {
  { p.step(v) } -> std::same_as<StepOutput>;
  { p.name() } -> std::convertible_to<std::string_view>;
  { p.check(sp) };
};

/// Appends one send of `payload` to every member of `to`, ascending, skipping `self`.
inline void send_to(StepOutput& out, ProcessSet to, ProcessId self, Payload payload) {
  for (ProcessId r : to.members())
    if (r != self) out.sends.push_back(Send{r, payload});
}

}  // namespace silence
