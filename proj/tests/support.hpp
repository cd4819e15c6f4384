#pragma once

#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "silence/silence.hpp"

namespace support {

using namespace silence;

inline AnyProtocol protocol(const std::string& name, int n = 3, int f = 1) {
  return AnyProtocol::from_name(name, SystemParams{n, f, Context::GammaF, 1});
}

inline Context natural_context(const std::string& name) {
  return name == "d15" ? Context::GammaTildeF : Context::GammaF;
}

inline SystemParams params(const std::string& name, int n, int f) {
  return default_params(protocol(name, n, f), n, f, natural_context(name));
}

inline Run run_of(const std::string& name, int n, int f, const std::vector<int>& values,
                  const FailureSpec& spec = {}) {
  return execute(protocol(name, n, f), values, spec, params(name, n, f));
}

inline Run nice(const std::string& name, int n, int f) {
  return run_of(name, n, f, std::vector<int>(n, 1));
}

inline CrashEntry crash(ProcessId p, int round, std::vector<ProcessId> delivered = {}) {
  CrashEntry e;
  e.process = p;
  e.crash_round = round;
  for (ProcessId q : delivered) e.delivered.insert(q);
  return e;
}

inline CrashEntry crash_prefix(ProcessId p, int round, int prefix, bool decide = false) {
  CrashEntry e;
  e.process = p;
  e.crash_round = round;
  e.prefix = prefix;
  e.decide_before_crash = decide;
  return e;
}

/// Universes are expensive; build each configuration once per test binary.
inline const RunUniverse& universe(const std::string& name, int n, int f) {
  static std::map<std::tuple<std::string, int, int>, std::unique_ptr<RunUniverse>> cache;
  auto& slot = cache[{name, n, f}];
  if (!slot) slot = std::make_unique<RunUniverse>(enumerate(protocol(name, n, f), params(name, n, f)));
  return *slot;
}

inline const KnowledgeBase& knowledge(const std::string& name, int n, int f) {
  static std::map<std::tuple<std::string, int, int>, std::unique_ptr<KnowledgeBase>> cache;
  auto& slot = cache[{name, n, f}];
  if (!slot) slot = std::make_unique<KnowledgeBase>(universe(name, n, f));
  return *slot;
}

inline std::size_t index_of(const RunUniverse& u, const Run& r) {
  auto idx = u.index_of(r.initial_values, r.failures);
  if (!idx) throw std::logic_error("run not in universe: " + run_key(r));
  return *idx;
}

/// Small configurations every property test sweeps.
struct Config {
  std::string name;
  int n;
  int f;
};

inline std::vector<Config> small_configs() {
  return {{"stealth", 3, 1}, {"stealth", 3, 2}, {"d2", 3, 1},  {"d2", 3, 2},
          {"d1f1", 3, 1},    {"d1f1", 4, 1},    {"d15", 3, 1}, {"d15", 3, 2}};
}

inline std::string label(const Config& c) {
  return c.name + "_" + std::to_string(c.n) + "_" + std::to_string(c.f);
}

inline void PrintTo(const Config& c, std::ostream* os) { *os << label(c); }

}  // namespace support
