#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "silence/core.hpp"
#include "silence/failure.hpp"
#include "silence/kernel.hpp"
#include "silence/protocol.hpp"
#include "silence/run.hpp"

namespace silence {

inline constexpr std::size_t kDefaultRunBudget = 10'000'000;

/// Restricts which runs an enumeration produces.
struct EnumerationFilter {
  std::function<bool(const std::vector<int>&)> values;  // empty: every vector
  std::optional<int> max_crashes;                      // empty: f

  bool admits(const std::vector<int>& v) const { return !values || values(v); }

  static EnumerationFilter only_values(std::vector<int> wanted) {
    EnumerationFilter f;
    f.values = [w = std::move(wanted)](const std::vector<int>& v) { return v == w; };
    return f;
  }
  static EnumerationFilter failure_free() {
    EnumerationFilter f;
    f.max_crashes = 0;
    return f;
  }
};

/// The enumeration would produce more runs than its budget allows.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::size_t budget, std::string first_uncounted)
      : std::runtime_error("run budget of " + std::to_string(budget) +
                           " exceeded; first uncounted branch: " + first_uncounted),
        budget_(budget),
        branch_(std::move(first_uncounted)) {}

  std::size_t budget() const { return budget_; }
  /// Canonical key (values|crash entries) of the first run not counted.
  const std::string& first_uncounted() const { return branch_; }

 private:
  std::size_t budget_;
  std::string branch_;
};

/// Initial-value vector number `index` in binary order (process 0 is the
/// most significant bit, so "000" < "001" < ... < "111").
inline std::vector<int> value_vector(std::uint32_t index, int n) {
  std::vector<int> v(n);
  for (int p = 0; p < n; ++p) v[p] = static_cast<int>((index >> (n - 1 - p)) & 1u);
  return v;
}

namespace detail {

template <Protocol P, typename Visitor>
class Expander {
 public:
  Expander(const SystemParams& params, int max_crashes, std::size_t budget, Visitor& visit)
      : params_(params), max_crashes_(max_crashes), budget_(budget), visit_(visit) {}

  std::size_t count() const { return count_; }

  void expand(Simulation<P> sim) {
    sim.open_boundary();
    if (sim.finished()) {
      emit(std::move(sim).take_run());
      return;
    }
    std::vector<ProcessId> acting;
    for (ProcessId p = 0; p < params_.n; ++p)
      if (sim.pending(p)) acting.push_back(p);
    std::vector<CrashEntry> crashes;
    choose(sim, acting, 0, crashes);
  }

 private:
  // Branch on the crash choice of acting[idx]: no crash first, then each
  // delivery alternative in bitmask (or prefix) order.
  void choose(const Simulation<P>& sim, const std::vector<ProcessId>& acting, std::size_t idx,
              std::vector<CrashEntry>& crashes) {
    if (idx == acting.size()) {
      Simulation<P> next = sim;
      next.run_round(crashes);
      expand(std::move(next));
      return;
    }
    choose(sim, acting, idx + 1, crashes);
    if (sim.faulty_count() + static_cast<int>(crashes.size()) >= max_crashes_) return;

    const ProcessId p = acting[idx];
    CrashEntry e;
    e.process = p;
    e.crash_round = sim.time() + 1;
    if (params_.context == Context::GammaF) {
      const std::uint32_t all = sim.prescribed_receivers(p).bits();
      for (std::uint32_t sub = 0;; sub = (sub - all) & all) {
        e.delivered = ProcessSet(sub);
        crashes.push_back(e);
        choose(sim, acting, idx + 1, crashes);
        crashes.pop_back();
        if (sub == all) break;
      }
    } else {
      const StepOutput* out = sim.pending(p);
      const int len = static_cast<int>(out->sends.size());
      for (int k = 0; k <= len; ++k) {
        e.prefix = k;
        e.decide_before_crash = false;
        crashes.push_back(e);
        choose(sim, acting, idx + 1, crashes);
        crashes.pop_back();
      }
      if (out->mid_round_decision) {
        e.prefix = len;
        e.decide_before_crash = true;
        crashes.push_back(e);
        choose(sim, acting, idx + 1, crashes);
        crashes.pop_back();
      }
    }
  }

  void emit(Run run) {
    if (count_ >= budget_) throw BudgetExceeded(budget_, run_key(run));
    ++count_;
    visit_(std::move(run));
  }

  const SystemParams& params_;
  int max_crashes_;
  std::size_t budget_;
  Visitor& visit_;
  std::size_t count_ = 0;
};

}  // namespace detail

/// Streams every run of R(protocol, context) admitted by `filter` to `visit`,
/// in canonical order, and returns the number of runs produced.
///
/// Per value vector the adversary is expanded depth-first: each round, each
/// acting process (ascending) either survives or crashes with one of its
/// delivery alternatives, while fewer than max_crashes processes are faulty.
/// Throws BudgetExceeded once more than `budget` runs would be produced.
template <Protocol P, typename Visitor>
std::size_t for_each_run(const P& protocol, const SystemParams& params,
                         const EnumerationFilter& filter, Visitor&& visit,
                         std::size_t budget = kDefaultRunBudget) {
  validate_params(params);
  protocol.check(params);
  const int max_crashes = std::min(params.f, filter.max_crashes.value_or(params.f));
  detail::Expander<P, std::remove_reference_t<Visitor>> expander(params, max_crashes, budget,
                                                                 visit);
  for (std::uint32_t idx = 0; idx < (1u << params.n); ++idx) {
    auto values = value_vector(idx, params.n);
    if (!filter.admits(values)) continue;
    expander.expand(Simulation<P>(protocol, params, std::move(values)));
  }
  return expander.count();
}

/// Materialized run universe with key lookup.
class RunUniverse {
 public:
  RunUniverse() = default;
  RunUniverse(std::string protocol, const SystemParams& params)
      : protocol_(std::move(protocol)), params_(params) {}

  const std::string& protocol() const { return protocol_; }
  const SystemParams& params() const { return params_; }
  const std::vector<Run>& runs() const { return runs_; }
  std::size_t size() const { return runs_.size(); }
  const Run& operator[](std::size_t k) const { return runs_[k]; }

  auto begin() const { return runs_.begin(); }
  auto end() const { return runs_.end(); }

  /// Adds a run; returns false (and drops it) if its key is already present.
  bool add(Run run) {
    auto [it, inserted] = index_.emplace(run_key(run), runs_.size());
    if (!inserted) return false;
    runs_.push_back(std::move(run));
    return true;
  }

  std::optional<std::size_t> index_of(const std::vector<int>& values,
                                      const FailureSpec& spec) const {
    auto it = index_.find(run_key(values, spec));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::string protocol_;
  SystemParams params_;
  std::vector<Run> runs_;
  std::unordered_map<std::string, std::size_t> index_;
};

template <Protocol P>
RunUniverse enumerate(const P& protocol, const SystemParams& params,
                      const EnumerationFilter& filter = {},
                      std::size_t budget = kDefaultRunBudget) {
  RunUniverse u(std::string(protocol.name()), params);
  auto add = [&u](Run run) {
    if (!u.add(std::move(run))) throw KernelFault("enumeration produced a duplicate run");
  };
  for_each_run(protocol, params, filter, add, budget);
  return u;
}

/// The run of `universe` with these initial values and failure spec, if any.
/// Specs must be in canonical form (clamped delivery choices, effective
/// crashes only), which is how enumerated runs record them.
inline const Run* find_run(const RunUniverse& universe, const std::vector<int>& values,
                           const FailureSpec& spec) {
  if (validate_failure_spec(spec, universe.params())) return nullptr;
  auto idx = universe.index_of(values, spec);
  return idx ? &universe[*idx] : nullptr;
}

}  // namespace silence
