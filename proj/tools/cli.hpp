#pragma once

// silencectl: simulate, verify, analyze, knowledge, diagram, enumerate.
//
// Exit codes: 0 success, 1 property violation, 2 usage or configuration
// error, 3 internal fault, 4 run budget exceeded.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "silence/silence.hpp"

namespace silencectl {

using namespace silence;

enum Exit : int { kOk = 0, kViolation = 1, kUsage = 2, kFault = 3, kBudget = 4 };

struct SystemOptions {
  std::string protocol = "stealth";
  int n = 3;
  int f = 1;
  std::string context = "auto";  // gamma-tilde for d15, gamma otherwise
  int horizon = 0;               // 0: the protocol's default

  void attach(CLI::App& app) {
    app.add_option("--protocol", protocol,
                   "stealth | d2 | d1f1 | d15 | mutant-commit0 | mutant-d2-choir | b1consensus")
        ->capture_default_str();
    app.add_option("--n", n, "number of processes")->capture_default_str();
    app.add_option("--f", f, "crash bound")->capture_default_str();
    app.add_option("--context", context, "gamma | gamma-tilde | auto")->capture_default_str();
    app.add_option("--horizon", horizon, "round bound (0: protocol default)");
  }

  AnyProtocol make_protocol() const {
    return AnyProtocol::from_name(protocol, SystemParams{n, f, Context::GammaF, 1});
  }

  SystemParams params(const AnyProtocol& p) const {
    Context c = Context::GammaF;
    if (context == "auto")
      c = p.kind() == ProtocolKind::D15 ? Context::GammaTildeF : Context::GammaF;
    else
      c = context_from_string(context);
    SystemParams sp{n, f, c, horizon > 0 ? horizon : p.default_horizon(f)};
    validate_params(sp);
    p.check(sp);
    return sp;
  }
};

inline std::vector<int> parse_values(const std::string& bits, int n) {
  if (static_cast<int>(bits.size()) != n)
    throw ConfigError("--values needs " + std::to_string(n) + " bits, got '" + bits + "'");
  std::vector<int> v;
  for (char c : bits) {
    if (c != '0' && c != '1') throw ConfigError("--values must be a bitstring");
    v.push_back(c - '0');
  }
  return v;
}

/// "p:round:mask". Under gamma the mask is an n-bit string over receivers
/// (character k is receiver k); under gamma-tilde it is a prefix length,
/// optionally followed by +d to let a mid-round decision happen.
inline CrashEntry parse_fail(const std::string& text, const SystemParams& params) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string::npos) throw ConfigError("--fail expects p:round:mask, got '" + text + "'");
  CrashEntry e;
  try {
    e.process = std::stoi(text.substr(0, c1));
    e.crash_round = std::stoi(text.substr(c1 + 1, c2 - c1 - 1));
  } catch (const std::exception&) {
    throw ConfigError("--fail expects numeric process and round, got '" + text + "'");
  }
  std::string mask = text.substr(c2 + 1);
  if (params.context == Context::GammaF) {
    if (static_cast<int>(mask.size()) != params.n ||
        mask.find_first_not_of("01") != std::string::npos)
      throw ConfigError("gamma --fail mask must be " + std::to_string(params.n) +
                        " bits over receivers, got '" + mask + "'");
    for (int k = 0; k < params.n; ++k)
      if (mask[k] == '1') e.delivered.insert(k);
  } else {
    if (mask.size() > 2 && mask.substr(mask.size() - 2) == "+d") {
      e.decide_before_crash = true;
      mask.resize(mask.size() - 2);
    }
    if (mask.empty() || mask.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("gamma-tilde --fail mask must be a prefix length (k or k+d), got '" +
                        text.substr(c2 + 1) + "'");
    e.prefix = std::stoi(mask);
  }
  return e;
}

inline std::string join_times(const Run& run, bool halts) {
  std::string s;
  for (ProcessId p = 0; p < run.n(); ++p) {
    if (p) s += ',';
    if (halts) {
      s += run.halt_times[p] ? std::to_string(*run.halt_times[p]) : "-";
    } else if (const auto& d = run.decisions[p]) {
      s += std::to_string(d->time) + (d->mid_round ? "*" : "");
    } else {
      s += "-";
    }
  }
  return s;
}

inline std::string metrics_line(const Run& run) {
  std::string actions;
  for (ProcessId p = 0; p < run.n(); ++p) {
    if (p) actions += ',';
    const auto& d = run.decisions[p];
    actions += d ? (d->action == Action::Commit ? "C" : "A") : "-";
  }
  return "messages=" + std::to_string(run.messages.size()) + " decide=" + join_times(run, false) +
         " halt=" + join_times(run, true) + " actions=" + actions;
}

inline json metrics_json(const Run& run) {
  const auto m = metrics(run);
  json dec = json::object(), halt = json::object();
  for (ProcessId p = 0; p < run.n(); ++p) {
    if (const auto& d = m.decisions[p])
      dec[std::to_string(p)] = {{"action", std::string(to_string(d->action))},
                                {"time", d->time},
                                {"mid_round", d->mid_round}};
    if (const auto& h = m.halt_times[p]) halt[std::to_string(p)] = *h;
  }
  return {{"messages", m.messages}, {"decision_times", dec}, {"halt_times", halt}};
}

inline std::vector<int> parse_ints(const std::string& csv, std::size_t count, const char* flag) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string part;
  try {
    while (std::getline(ss, part, ',')) out.push_back(std::stoi(part));
  } catch (const std::exception&) {
    throw ConfigError(std::string(flag) + " expects integers, got '" + csv + "'");
  }
  if (out.size() != count)
    throw ConfigError(std::string(flag) + " expects " + std::to_string(count) + " values");
  return out;
}

/// Simulated run from --values/--fail.
inline Run simulate_from(const AnyProtocol& protocol, const SystemParams& params,
                         const std::string& values, const std::vector<std::string>& fails) {
  FailureSpec spec;
  for (const auto& f : fails) spec.entries.push_back(parse_fail(f, params));
  return execute(protocol, parse_values(values, params.n), spec, params);
}

inline void print_tally(std::ostream& out, const std::string& name, const ConditionTally& t) {
  out << "  " << name << ": " << t.violations << " violation(s)";
  if (t.violations) out << "; first: " << t.first_witness;
  out << "\n";
}

/// Replaces "--config FILE" with the file's key=value pairs as flags. Keys
/// already given on the command line keep their command-line value; a
/// repeated key (such as fail) contributes every occurrence.
inline void expand_config(std::vector<std::string>& args) {
  const auto at = std::find(args.begin(), args.end(), "--config");
  if (at == args.end()) return;
  if (at + 1 == args.end()) throw ConfigError("--config needs a file");
  const std::string path = *(at + 1);
  args.erase(at, at + 2);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::ParseError& e) {
    throw ConfigError("bad config " + path + ": " + e.what());
  }
  std::vector<std::string> extra;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const std::string flag = "--" + item.name;
    if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") extra.push_back(flag);
      continue;
    }
    for (const auto& value : item.inputs) {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
}

/// Runs the CLI. Output goes to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exhaustive checker for synchronous crash-failure commit protocols"};
  app.require_subcommand(1);
  bool json_out = false;
  std::string config_path;  // consumed by expand_config before parsing
  app.add_flag("--json", json_out, "machine-readable output");

  // simulate
  auto* sim = app.add_subcommand("simulate", "execute one run and write its trace");
  sim->add_option("--config", config_path, "key=value file mirroring the flags");
  SystemOptions sim_sys;
  std::string sim_values, sim_out;
  std::vector<std::string> sim_fails;
  bool sim_json = false;
  sim_sys.attach(*sim);
  sim->add_option("--values", sim_values, "initial values, e.g. 111")->required();
  sim->add_option("--fail", sim_fails, "crash p:round:mask (repeatable)");
  sim->add_option("--out", sim_out, "trace file to write");
  sim->add_flag("--json", sim_json, "print the trace instead of the metrics line");

  // verify
  auto* ver = app.add_subcommand("verify", "enumerate every run and check properties");
  ver->add_option("--config", config_path, "key=value file mirroring the flags");
  SystemOptions ver_sys;
  std::string suite = "all";
  std::size_t budget = kDefaultRunBudget;
  ver_sys.attach(*ver);
  ver->add_option("--suite", suite, "ac | knowledge | choir | lemma4 | all")
      ->check(CLI::IsMember({"ac", "knowledge", "choir", "lemma4", "all"}))
      ->capture_default_str();
  ver->add_option("--budget", budget, "maximum number of runs")->capture_default_str();

  // analyze
  auto* ana = app.add_subcommand("analyze", "chain, choir, rank and metric queries on a trace");
  std::string trace;
  std::string choir_arg, chain_arg;
  int rank_k = 0;
  bool want_metrics = false;
  ana->add_option("--trace", trace, "canonical trace file")->required();
  auto* o_choir = ana->add_option("--choir", choir_arg, "i,j,m");
  auto* o_chain = ana->add_option("--chain", chain_arg, "i,mi,j,mj: chain from (i,mi) to (j,mj)");
  auto* o_rank = ana->add_option("--rank", rank_k, "k");
  auto* o_metrics = ana->add_flag("--metrics", want_metrics, "message and timing metrics");
  o_choir->excludes(o_chain, o_rank, o_metrics);
  o_chain->excludes(o_rank, o_metrics);
  o_rank->excludes(o_metrics);

  // knowledge
  auto* kno = app.add_subcommand("knowledge", "does process i know a fact at time m");
  kno->add_option("--config", config_path, "key=value file mirroring the flags");
  SystemOptions kno_sys;
  std::string kno_values, fact_text;
  std::vector<std::string> kno_fails;
  int kno_i = 0, kno_m = 0;
  std::size_t kno_budget = kDefaultRunBudget;
  kno_sys.attach(*kno);
  kno->add_option("--values", kno_values, "initial values")->required();
  kno->add_option("--fail", kno_fails, "crash p:round:mask (repeatable)");
  kno->add_option("--i", kno_i, "process")->required();
  kno->add_option("--m", kno_m, "time")->required();
  kno->add_option("--fact", fact_text, "all1 | val j b | faulty j | chaincorrect j | not/and/or")
      ->required();
  kno->add_option("--budget", kno_budget, "maximum number of runs");

  // diagram
  auto* dia = app.add_subcommand("diagram", "ASCII round diagram of a trace");
  std::string dia_trace;
  dia->add_option("--trace", dia_trace, "canonical trace file")->required();

  // enumerate
  auto* enu = app.add_subcommand("enumerate", "count (and optionally spill) every run");
  enu->add_option("--config", config_path, "key=value file mirroring the flags");
  SystemOptions enu_sys;
  std::size_t enu_budget = kDefaultRunBudget;
  std::string spill;
  enu_sys.attach(*enu);
  enu->add_option("--budget", enu_budget, "maximum number of runs");
  enu->add_option("--spill", spill, "directory for one trace file per run");

  try {
    std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
    expand_config(args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
    app.parse(args);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) {
      const auto protocol = sim_sys.make_protocol();
      const auto params = sim_sys.params(protocol);
      const Run run = simulate_from(protocol, params, sim_values, sim_fails);
      if (!sim_out.empty()) write_trace(run, sim_out);
      if (sim_json || json_out)
        out << to_trace_string(run);
      else
        out << metrics_line(run) << "\n";
      return kOk;
    }

    if (*ver) {
      const auto protocol = ver_sys.make_protocol();
      const auto params = ver_sys.params(protocol);
      const RunUniverse u = enumerate(protocol, params, {}, budget);
      const bool all = suite == "all";
      std::size_t violations = 0;
      json report = {{"protocol", std::string(protocol.name())},
                     {"n", params.n},
                     {"f", params.f},
                     {"context", std::string(to_string(params.context))},
                     {"horizon", params.horizon},
                     {"runs", u.size()}};
      std::ostringstream text;
      text << protocol.name() << " n=" << params.n << " f=" << params.f << " "
           << to_string(params.context) << " horizon=" << params.horizon << " runs=" << u.size()
           << "\n";
      auto tally_json = [](const ConditionTally& t) {
        return json{{"violations", t.violations}, {"first_witness", t.first_witness}};
      };

      if (all || suite == "ac") {
        const auto ac = ac_verdict_all(u);
        violations += ac.total_violations();
        text << "suite ac\n";
        print_tally(text, "agreement", ac.agreement);
        print_tally(text, "commit validity", ac.commit_validity);
        print_tally(text, "abort validity", ac.abort_validity);
        print_tally(text, "decision", ac.decision);
        report["ac"] = {{"agreement", tally_json(ac.agreement)},
                        {"commit_validity", tally_json(ac.commit_validity)},
                        {"abort_validity", tally_json(ac.abort_validity)},
                        {"decision", tally_json(ac.decision)}};
      }
      std::optional<KnowledgeBase> kb;
      if (all || suite == "knowledge" || suite == "choir") kb.emplace(u);
      if (all || suite == "knowledge") {
        const auto ck = check_commit_knowledge(*kb);
        const auto lm = check_lemma_suite(*kb, default_lemma_instances(protocol.kind(), params));
        const auto kp = check_knowledge_properties(*kb, standard_facts(params.n));
        violations += ck.violations.violations + lm.total_violations() + kp.truth.violations +
                      kp.recall.violations;
        text << "suite knowledge (" << ck.commits << " commits)\n";
        print_tally(text, "commit without knowing all1", ck.violations);
        json lemmas = json::array();
        for (const auto& r : lm.results) {
          print_tally(text,
                      "silence '" + r.instance.label + "' (" + std::to_string(r.silent_points) +
                          " points, " + (r.strong ? "K phi" : "K(phi or sender faulty)") + ")",
                      r.violations);
          lemmas.push_back({{"instance", r.instance.label},
                            {"requires_plain_knowledge", r.strong},
                            {"silent_points", r.silent_points},
                            {"plain_failures", r.plain_failures},
                            {"violations", r.violations.violations},
                            {"first_witness", r.violations.first_witness}});
        }
        print_tally(text, "knowledge of a false fact", kp.truth);
        print_tally(text, "forgotten knowledge", kp.recall);
        report["knowledge"] = {{"commits", ck.commits},
                               {"commit_knowledge", tally_json(ck.violations)},
                               {"lemmas", lemmas},
                               {"knowledge_property", tally_json(kp.truth)},
                               {"perfect_recall", tally_json(kp.recall)}};
      }
      if (all || suite == "choir") {
        const auto ch = check_silent_choir(*kb);
        violations += ch.violations.violations;
        text << "suite choir (" << ch.checks << " knowledge points, " << ch.silent_inferences
             << " without a chain)\n";
        print_tally(text, "choir condition", ch.violations);
        report["choir"] = {{"checks", ch.checks},
                           {"silent_inferences", ch.silent_inferences},
                           {"condition", tally_json(ch.violations)}};
      }
      if (all || suite == "lemma4") {
        const auto rk = rank_bound_all(u);
        violations += rk.violations.violations;
        text << "suite lemma4 (" << rk.applicable_checks << " applicable checks)\n";
        print_tally(text, "n+k-1 message bound", rk.violations);
        report["lemma4"] = {{"applicable_checks", rk.applicable_checks},
                            {"bound", tally_json(rk.violations)}};
      }
      report["violations"] = violations;
      text << (violations == 0 ? "PASS" : "FAIL") << " violations=" << violations << "\n";
      out << (json_out ? report.dump(2) + "\n" : text.str());
      return violations == 0 ? kOk : kViolation;
    }

    if (*ana) {
      const Run run = read_trace(trace);
      json result;
      if (!choir_arg.empty()) {
        const auto a = parse_ints(choir_arg, 3, "--choir");
        if (a[0] < 0 || a[0] >= run.n() || a[1] < 0 || a[1] >= run.n() || a[2] < 0)
          throw ConfigError("--choir names a process or time out of range");
        const auto v = silent_choir_check(run, a[0], a[1], a[2]);
        result = {{"chain_exists", v.chain_exists},
                  {"reach_set", v.reach_set.members()},
                  {"faulty_set", v.faulty_set.members()},
                  {"choir", (v.reach_set | v.faulty_set).members()},
                  {"choir_size", v.choir_size},
                  {"satisfies_theorem", v.satisfies_theorem}};
      } else if (!chain_arg.empty()) {
        const auto a = parse_ints(chain_arg, 4, "--chain");
        if (a[0] < 0 || a[0] >= run.n() || a[2] < 0 || a[2] >= run.n() || a[1] < 0 || a[3] < 0)
          throw ConfigError("--chain names a process or time out of range");
        result = {{"chain_exists", message_chain_exists(run, ChainQuery{a[0], a[1], a[2], a[3]})}};
      } else if (rank_k != 0) {
        const auto c = rank_bound_check(run, rank_k);
        result = {{"k", rank_k},
                  {"applicable", c.applicable},
                  {"message_count", c.message_count},
                  {"bound_holds", c.bound_holds}};
      } else {
        result = metrics_json(run);
      }
      out << result.dump() << "\n";
      return kOk;
    }

    if (*kno) {
      const auto protocol = kno_sys.make_protocol();
      const auto params = kno_sys.params(protocol);
      const Fact fact = parse_fact(fact_text);
      validate_fact(fact, params.n);
      if (kno_i < 0 || kno_i >= params.n) throw ConfigError("--i out of range");
      const Run run = simulate_from(protocol, params, kno_values, kno_fails);
      const RunUniverse u = enumerate(protocol, params, {}, kno_budget);
      const auto answer = knows(u, run, kno_i, kno_m, fact);
      if (json_out)
        out << json{{"knows", answer.holds}, {"scanned", answer.scanned}, {"universe", u.size()}}.dump()
            << "\n";
      else
        out << (answer.holds ? "true" : "false") << " scanned=" << answer.scanned
            << " universe=" << u.size() << "\n";
      return kOk;
    }

    if (*dia) {
      out << render_diagram(read_trace(dia_trace));
      return kOk;
    }

    if (*enu) {
      const auto protocol = enu_sys.make_protocol();
      const auto params = enu_sys.params(protocol);
      if (!spill.empty()) std::filesystem::create_directories(spill);
      const std::size_t count = for_each_run(
          protocol, params, {},
          [&](const Run& r) {
            if (!spill.empty()) write_trace(r, std::filesystem::path(spill) / spill_name(r));
          },
          enu_budget);
      out << "runs=" << count << "\n";
      return kOk;
    }
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const BottomStateError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const KernelFault& e) {
    err << "internal fault: " << e.what() << "\n";
    return kFault;
  } catch (const std::exception& e) {
    err << "internal fault: " << e.what() << "\n";
    return kFault;
  }
  return kUsage;
}

}  // namespace silencectl
