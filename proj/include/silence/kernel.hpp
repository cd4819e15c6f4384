#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "silence/core.hpp"
#include "silence/failure.hpp"
#include "silence/local_state.hpp"
#include "silence/protocol.hpp"
#include "silence/run.hpp"

namespace silence {

/// Incremental execution of one run, advanced boundary by boundary.
///
/// Copyable, so the run enumerator can branch on adversary choices between
/// open_boundary() and run_round(). A round proceeds as: boundary actions at
/// time t for every live process (decision, halt), the sends of round t+1
/// (crash-round sends filtered by the adversary), mid-round decisions, then
/// deliveries at time t+1.
template <Protocol P>
class Simulation {
 public:
  Simulation(const P& protocol, const SystemParams& params, std::vector<int> values)
      : protocol_(&protocol), params_(params) {
    validate_params(params_);
    protocol.check(params_);
    if (static_cast<int>(values.size()) != params_.n)
      throw ConfigError("expected " + std::to_string(params_.n) + " initial values, got " +
                        std::to_string(values.size()));
    for (int v : values)
      if (v != 0 && v != 1) throw ConfigError("initial values must be bits");
    run_.protocol = std::string(protocol.name());
    run_.params = params_;
    run_.initial_values = std::move(values);
    run_.decisions.resize(params_.n);
    run_.halt_times.resize(params_.n);
    procs_.resize(params_.n);
    for (int p = 0; p < params_.n; ++p) procs_[p].state.initial_value = run_.initial_values[p];
    pending_.resize(params_.n);
  }

  int time() const { return time_; }
  const SystemParams& params() const { return params_; }
  bool finished() const { return finished_; }
  int faulty_count() const { return static_cast<int>(run_.failures.entries.size()); }

  bool crashed(ProcessId p) const { return procs_[p].crashed; }
  bool halted(ProcessId p) const { return procs_[p].halted; }
  const LocalState& state(ProcessId p) const { return procs_[p].state; }

  /// Executes the boundary actions at the current time. Afterwards pending(p)
  /// holds the round-(time+1) prescription of every process still acting.
  void open_boundary() {
    if (boundary_open_) throw KernelFault("boundary opened twice");
    boundary_open_ = true;
    const int t = time_;
    for (ProcessId p = 0; p < params_.n; ++p) {
      pending_[p].reset();
      auto& proc = procs_[p];
      if (proc.crashed || proc.halted) continue;

      StepOutput out = protocol_->step(ProcessView(p, params_, proc.state));
      if (out.halt && (!out.sends.empty() || out.mid_round_decision))
        throw KernelFault("protocol prescribes actions for a halting process " + std::to_string(p));
      std::sort(out.sends.begin(), out.sends.end());
      for (std::size_t k = 0; k < out.sends.size(); ++k) {
        const ProcessId r = out.sends[k].receiver;
        if (r < 0 || r >= params_.n) throw KernelFault("send to nonexistent process");
        if (r == p) throw KernelFault("self-send recorded by process " + std::to_string(p));
        if (k > 0 && out.sends[k - 1].receiver == r)
          throw KernelFault("two messages to the same receiver in one round");
      }

      RoundEntry entry;
      if (out.boundary_decision) {
        record_decision(p, Decision{*out.boundary_decision, t, false});
        entry.opening_decision = out.boundary_decision;
      }
      if (out.halt) {
        proc.halted = true;
        run_.halt_times[p] = t;
        entry.halted = true;
      }
      if (t < params_.horizon) proc.state.history.push_back(std::move(entry));
      if (!proc.halted && t < params_.horizon) pending_[p] = std::move(out);
    }

    bool active = false;
    for (const auto& proc : procs_) active = active || !(proc.crashed || proc.halted);
    if (!active || t >= params_.horizon) {
      finished_ = true;
      run_.end_time = t;
    }
  }

  /// Prescription of process p for the next round, or nullptr if p does not act.
  const StepOutput* pending(ProcessId p) const {
    return pending_[p] ? &*pending_[p] : nullptr;
  }

  /// Distinct receivers p is prescribed to send to in the next round.
  ProcessSet prescribed_receivers(ProcessId p) const {
    ProcessSet s;
    if (const auto* out = pending(p))
      for (const auto& snd : out->sends) s.insert(snd.receiver);
    return s;
  }

  /// Executes round time()+1. `crashes` lists the processes that crash in it;
  /// each must currently be acting. Delivery choices are clamped to what the
  /// protocol prescribed and stored in canonical form.
  void run_round(std::span<const CrashEntry> crashes) {
    if (!boundary_open_ || finished_) throw KernelFault("run_round without an open boundary");
    boundary_open_ = false;
    const int r = time_ + 1;

    std::vector<MessageRecord> sent;
    std::vector<bool> crashing(params_.n, false);
    for (ProcessId p = 0; p < params_.n; ++p) {
      if (!pending_[p]) continue;
      const StepOutput& out = *pending_[p];
      auto& entry = procs_[p].state.history.back();
      const CrashEntry* crash = nullptr;
      for (const auto& c : crashes)
        if (c.process == p) crash = &c;

      std::size_t count = out.sends.size();
      bool keep_mid = out.mid_round_decision.has_value();
      CrashEntry applied;
      if (crash) {
        crashing[p] = true;
        applied.process = p;
        applied.crash_round = r;
        if (params_.context == Context::GammaF) {
          applied.delivered = crash->delivered & prescribed_receivers(p);
          keep_mid = false;
        } else {
          count = std::min<std::size_t>(static_cast<std::size_t>(std::max(crash->prefix, 0)), count);
          applied.prefix = static_cast<int>(count);
          keep_mid = keep_mid && crash->decide_before_crash && count == out.sends.size();
          applied.decide_before_crash = keep_mid;
        }
        run_.failures.entries.push_back(applied);
      }

      for (std::size_t k = 0; k < count; ++k) {
        const auto& snd = out.sends[k];
        if (crash && params_.context == Context::GammaF && !applied.delivered.contains(snd.receiver))
          continue;
        sent.push_back(MessageRecord{r, p, snd.receiver, snd.payload});
        if (!crash) entry.sent.push_back(snd);
      }
      if (keep_mid) {
        record_decision(p, Decision{*out.mid_round_decision, time_, true});
        if (!crash) entry.mid_round_decision = out.mid_round_decision;
      }
    }

    for (const auto& msg : sent) {
      if (!pending_[msg.receiver] || crashing[msg.receiver]) continue;
      procs_[msg.receiver].state.history.back().received.push_back(
          Receipt{msg.sender, msg.payload});
    }
    run_.messages.insert(run_.messages.end(), sent.begin(), sent.end());

    for (ProcessId p = 0; p < params_.n; ++p) {
      auto& proc = procs_[p];
      if (crashing[p]) {
        proc.crashed = true;
        proc.state = LocalState::bottom(r);
      } else {
        proc.state.time = r;
      }
      pending_[p].reset();
    }
    time_ = r;
  }

  /// Finalizes the run record. Requires finished().
  Run take_run() && {
    if (!finished_) throw KernelFault("run taken before the execution finished");
    std::sort(run_.messages.begin(), run_.messages.end());
    run_.failures = run_.failures.canonical();
    return std::move(run_);
  }

  Run snapshot() const& {
    Simulation copy = *this;
    return std::move(copy).take_run();
  }

 private:
  struct ProcessSlot {
    LocalState state;
    bool crashed = false;
    bool halted = false;
  };

  void record_decision(ProcessId p, const Decision& d) {
    if (run_.decisions[p])
      throw KernelFault("process " + std::to_string(p) + " decides twice");
    run_.decisions[p] = d;
  }

  const P* protocol_;
  SystemParams params_;
  Run run_;
  std::vector<ProcessSlot> procs_;
  std::vector<std::optional<StepOutput>> pending_;
  int time_ = 0;
  bool boundary_open_ = false;
  bool finished_ = false;
};

/// Executes `protocol` from `values` against the adversary `spec`.
///
/// Crash entries for a process that has already halted (or for rounds after
/// the execution ended) have no effect and are dropped from the returned
/// run's failure spec. Throws ConfigError for an inadmissible spec or
/// configuration and KernelFault when the protocol breaks the round rules.
template <Protocol P>
Run execute(const P& protocol, const std::vector<int>& values, const FailureSpec& spec,
            const SystemParams& params) {
  validate_params(params);
  if (auto violation = validate_failure_spec(spec, params)) throw ConfigError(*violation);
  Simulation<P> sim(protocol, params, values);
  while (true) {
    sim.open_boundary();
    if (sim.finished()) break;
    std::vector<CrashEntry> crashes;
    for (const auto& e : spec.entries)
      if (e.crash_round == sim.time() + 1 && sim.pending(e.process)) crashes.push_back(e);
    sim.run_round(crashes);
  }
  return std::move(sim).take_run();
}

}  // namespace silence
