#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "silence/analysis.hpp"
#include "silence/core.hpp"
#include "silence/run.hpp"

namespace silence {

/// A fact about a whole run. Every fact is time-independent.
struct Fact {
  enum class Kind { All1, ValueIs, IsFaulty, ChainToCorrect, Not, And, Or };

  Kind kind = Kind::All1;
  ProcessId j = 0;
  int b = 1;
  std::vector<Fact> args;

  static Fact all1() { return {}; }
  static Fact value_is(ProcessId j, int b) { return {Kind::ValueIs, j, b, {}}; }
  static Fact is_faulty(ProcessId j) { return {Kind::IsFaulty, j, 1, {}}; }
  static Fact chain_to_correct(ProcessId j) { return {Kind::ChainToCorrect, j, 1, {}}; }
  static Fact negate(Fact a) { return {Kind::Not, 0, 1, {std::move(a)}}; }
  static Fact both(Fact a, Fact c) { return {Kind::And, 0, 1, {std::move(a), std::move(c)}}; }
  static Fact either(Fact a, Fact c) { return {Kind::Or, 0, 1, {std::move(a), std::move(c)}}; }

  bool operator==(const Fact&) const = default;
};

/// Prints a fact in the grammar accepted by parse_fact().
inline std::string to_string(const Fact& f) {
  using K = Fact::Kind;
  switch (f.kind) {
    case K::All1: return "all1";
    case K::ValueIs: return "val " + std::to_string(f.j) + " " + std::to_string(f.b);
    case K::IsFaulty: return "faulty " + std::to_string(f.j);
    case K::ChainToCorrect: return "chaincorrect " + std::to_string(f.j);
    case K::Not: return "not(" + to_string(f.args[0]) + ")";
    case K::And: return "and(" + to_string(f.args[0]) + "," + to_string(f.args[1]) + ")";
    case K::Or: return "or(" + to_string(f.args[0]) + "," + to_string(f.args[1]) + ")";
  }
  return "?";
}

/// Truth of `fact` in `run`. "Correct" means never crashing within the run.
inline bool fact_eval(const Run& run, const Fact& fact) {
  using K = Fact::Kind;
  switch (fact.kind) {
    case K::All1: return run.all_ones();
    case K::ValueIs: return run.initial_values.at(fact.j) == fact.b;
    case K::IsFaulty: return run.is_faulty(fact.j);
    case K::ChainToCorrect: {
      ProcessSet correct = ProcessSet::all(run.n());
      for (ProcessId p : run.faulty().members()) correct.erase(p);
      return !(reach_set_ever(run, fact.j) & correct).empty();
    }
    case K::Not: return !fact_eval(run, fact.args[0]);
    case K::And: return fact_eval(run, fact.args[0]) && fact_eval(run, fact.args[1]);
    case K::Or: return fact_eval(run, fact.args[0]) || fact_eval(run, fact.args[1]);
  }
  return false;
}

/// Throws ConfigError if the fact names a process outside [0, n) or a
/// non-bit value.
inline void validate_fact(const Fact& f, int n) {
  using K = Fact::Kind;
  if (f.kind == K::ValueIs || f.kind == K::IsFaulty || f.kind == K::ChainToCorrect) {
    if (f.j < 0 || f.j >= n)
      throw ConfigError("fact names process " + std::to_string(f.j) + " outside [0," +
                        std::to_string(n) + ")");
  }
  if (f.kind == K::ValueIs && f.b != 0 && f.b != 1) throw ConfigError("fact value must be 0 or 1");
  for (const auto& a : f.args) validate_fact(a, n);
}

namespace detail {

class FactParser {
 public:
  explicit FactParser(std::string_view text) : s_(text) {}

  Fact parse() {
    Fact f = fact();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return f;
  }

 private:
  Fact fact() {
    skip_ws();
    const std::string word = ident();
    if (word == "all1") return Fact::all1();
    if (word == "val") {
      const int j = number();
      const int b = number();
      return Fact::value_is(j, b);
    }
    if (word == "faulty") return Fact::is_faulty(number());
    if (word == "chaincorrect") return Fact::chain_to_correct(number());
    if (word == "not") {
      expect('(');
      Fact a = fact();
      expect(')');
      return Fact::negate(std::move(a));
    }
    if (word == "and" || word == "or") {
      expect('(');
      Fact a = fact();
      expect(',');
      Fact c = fact();
      expect(')');
      return word == "and" ? Fact::both(std::move(a), std::move(c))
                           : Fact::either(std::move(a), std::move(c));
    }
    fail(word.empty() ? "expected a fact" : "unknown fact '" + word + "'");
  }

  std::string ident() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  int number() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a number");
    return std::stoi(std::string(s_.substr(start, pos_ - start)));
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("bad fact \"" + std::string(s_) + "\" at offset " + std::to_string(pos_) +
                      ": " + why);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `all1`, `val j b`, `faulty j`, `chaincorrect j`, `not(F)`,
/// `and(F,F)`, `or(F,F)`.
inline Fact parse_fact(std::string_view text) { return detail::FactParser(text).parse(); }

}  // namespace silence
