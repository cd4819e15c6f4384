#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "silence/core.hpp"
#include "silence/kernel.hpp"
#include "silence/protocols.hpp"
#include "silence/run.hpp"

namespace silence {

using json = nlohmann::json;

namespace detail {

inline json ids_json(ProcessSet s) { return s.members(); }

inline ProcessSet ids_from_json(const json& j, int n) {
  ProcessSet s;
  for (const auto& v : j) {
    const int p = v.get<int>();
    if (p < 0 || p >= n) throw ConfigError("process id " + std::to_string(p) + " out of range");
    s.insert(p);
  }
  return s;
}

}  // namespace detail

/// Canonical trace document. Keys are emitted in a fixed order and messages
/// sorted by (round, sender, receiver), so equal runs give identical text.
inline json to_json(const Run& run) {
  json params = json::object();
  params["protocol"] = run.protocol;
  params["n"] = run.params.n;
  params["f"] = run.params.f;
  params["context"] = std::string(to_string(run.params.context));
  params["horizon"] = run.params.horizon;

  json failures = json::array();
  for (const auto& e : run.failures.entries) {
    json fe = {{"process", e.process}, {"crash_round", e.crash_round}};
    if (run.params.context == Context::GammaF) {
      fe["delivered"] = detail::ids_json(e.delivered);
    } else {
      fe["prefix"] = e.prefix;
      fe["decide_before_crash"] = e.decide_before_crash;
    }
    failures.push_back(std::move(fe));
  }

  json messages = json::array();
  for (const auto& m : run.messages) {
    json jm = {{"round", m.round},
               {"sender", m.sender},
               {"receiver", m.receiver},
               {"tag", std::string(to_string(m.payload.tag))}};
    if (m.payload.tag == Tag::Ids) jm["ids"] = detail::ids_json(m.payload.ids);
    messages.push_back(std::move(jm));
  }

  json decisions = json::object();
  json halts = json::object();
  for (ProcessId p = 0; p < run.n(); ++p) {
    if (const auto& d = run.decisions[p])
      decisions[std::to_string(p)] = {{"action", std::string(to_string(d->action))},
                                      {"time", d->time},
                                      {"mid_round", d->mid_round}};
    if (const auto& h = run.halt_times[p]) halts[std::to_string(p)] = *h;
  }

  json doc = json::object();
  doc["params"] = std::move(params);
  doc["initial_values"] = run.initial_values;
  doc["failures"] = std::move(failures);
  doc["messages"] = std::move(messages);
  doc["decisions"] = std::move(decisions);
  doc["halts"] = std::move(halts);
  doc["end_time"] = run.end_time;
  return doc;
}

inline std::string to_trace_string(const Run& run) { return to_json(run).dump(2) + "\n"; }

/// Parses a canonical trace. Throws ConfigError on any structural problem.
inline Run run_from_json(const json& doc) {
  try {
    Run run;
    const auto& p = doc.at("params");
    run.protocol = p.at("protocol").get<std::string>();
    run.params.n = p.at("n").get<int>();
    run.params.f = p.at("f").get<int>();
    run.params.context = context_from_string(p.at("context").get<std::string>());
    run.params.horizon = p.at("horizon").get<int>();
    validate_params(run.params);
    const int n = run.params.n;

    run.initial_values = doc.at("initial_values").get<std::vector<int>>();
    if (static_cast<int>(run.initial_values.size()) != n)
      throw ConfigError("initial_values has the wrong length");
    for (int v : run.initial_values)
      if (v != 0 && v != 1) throw ConfigError("initial values must be bits");

    for (const auto& fe : doc.at("failures")) {
      CrashEntry e;
      e.process = fe.at("process").get<int>();
      e.crash_round = fe.at("crash_round").get<int>();
      if (run.params.context == Context::GammaF) {
        e.delivered = detail::ids_from_json(fe.at("delivered"), n);
      } else {
        e.prefix = fe.at("prefix").get<int>();
        e.decide_before_crash = fe.value("decide_before_crash", false);
      }
      run.failures.entries.push_back(e);
    }
    if (auto why = validate_failure_spec(run.failures, run.params)) throw ConfigError(*why);
    run.failures = run.failures.canonical();

    for (const auto& jm : doc.at("messages")) {
      MessageRecord m;
      m.round = jm.at("round").get<int>();
      m.sender = jm.at("sender").get<int>();
      m.receiver = jm.at("receiver").get<int>();
      m.payload.tag = tag_from_string(jm.at("tag").get<std::string>());
      if (jm.contains("ids")) m.payload.ids = detail::ids_from_json(jm.at("ids"), n);
      if (m.sender < 0 || m.sender >= n || m.receiver < 0 || m.receiver >= n)
        throw ConfigError("message names a process out of range");
      if (m.sender == m.receiver) throw ConfigError("trace records a self-send");
      if (m.round < 1 || m.round > run.params.horizon)
        throw ConfigError("message round out of range");
      run.messages.push_back(m);
    }
    std::sort(run.messages.begin(), run.messages.end());

    run.decisions.resize(n);
    run.halt_times.resize(n);
    for (const auto& [key, jd] : doc.at("decisions").items()) {
      const int p = std::stoi(key);
      if (p < 0 || p >= n) throw ConfigError("decision for unknown process " + key);
      const auto action = jd.at("action").get<std::string>();
      if (action != "commit" && action != "abort") throw ConfigError("unknown action " + action);
      run.decisions[p] = Decision{action == "commit" ? Action::Commit : Action::Abort,
                                  jd.at("time").get<int>(), jd.value("mid_round", false)};
    }
    for (const auto& [key, jh] : doc.at("halts").items()) {
      const int p = std::stoi(key);
      if (p < 0 || p >= n) throw ConfigError("halt for unknown process " + key);
      run.halt_times[p] = jh.get<int>();
    }
    run.end_time = doc.value("end_time", run.params.horizon);
    return run;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed trace: ") + e.what());
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError(std::string("malformed trace: ") + e.what());
  }
}

inline Run read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read trace " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed trace " + path.string() + ": " + e.what());
  }
  return run_from_json(doc);
}

inline void write_trace(const Run& run, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_trace_string(run);
}

/// Re-executes the run's protocol under its recorded values and failures.
/// True when the recorded trace is exactly what the kernel produces.
inline bool replay_matches(const Run& run) {
  const auto protocol = AnyProtocol::from_name(run.protocol, run.params);
  return execute(protocol, run.initial_values, run.failures, run.params) == run;
}

/// 64-bit FNV-1a; stable across platforms and builds.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Spill file name of a run: hash of its (values, failure spec) key.
inline std::string spill_name(const Run& run) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(stable_hash(run_key(run))));
  return std::string(buf) + ".json";
}

}  // namespace silence
