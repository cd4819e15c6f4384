#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace silence {

using ProcessId = int;

// Largest system the bitmask-based sets can describe.
inline constexpr int kMaxProcesses = 32;

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

// Bad user-supplied configuration (process counts, failure specs, names).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A protocol or the kernel violated an internal consistency rule.
struct KernelFault : std::logic_error {
  using std::logic_error::logic_error;
};

// A query addressed a crashed (bottom) local state.
struct BottomStateError : std::domain_error {
  using std::domain_error::domain_error;
};

// ----------------------------------------------------------------------------
// ProcessSet
// ----------------------------------------------------------------------------

/// Set of process ids in [0, kMaxProcesses), stored as a bitmask.
class ProcessSet {
 public:
  constexpr ProcessSet() = default;
  constexpr explicit ProcessSet(std::uint32_t bits) : bits_(bits) {}

  static constexpr ProcessSet all(int n) {
    return ProcessSet(n >= 32 ? ~0u : ((1u << n) - 1u));
  }
  static constexpr ProcessSet single(ProcessId p) { return ProcessSet(1u << p); }

  constexpr bool contains(ProcessId p) const { return (bits_ >> p) & 1u; }
  constexpr void insert(ProcessId p) { bits_ |= (1u << p); }
  constexpr void erase(ProcessId p) { bits_ &= ~(1u << p); }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint32_t bits() const { return bits_; }

  constexpr ProcessSet operator|(ProcessSet o) const { return ProcessSet(bits_ | o.bits_); }
  constexpr ProcessSet operator&(ProcessSet o) const { return ProcessSet(bits_ & o.bits_); }
  constexpr ProcessSet& operator|=(ProcessSet o) { bits_ |= o.bits_; return *this; }
  constexpr ProcessSet& operator&=(ProcessSet o) { bits_ &= o.bits_; return *this; }

  std::vector<ProcessId> members() const {
    std::vector<ProcessId> out;
    for (std::uint32_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  constexpr auto operator<=>(const ProcessSet&) const = default;

 private:
  std::uint32_t bits_ = 0;
};

// ----------------------------------------------------------------------------
// System parameters
// ----------------------------------------------------------------------------

enum class Context : std::uint8_t {
  GammaF,       // crash-round sends reach an arbitrary subset of receivers
  GammaTildeF,  // crash-round sends form an atomic prefix of the ordered send list
};

inline std::string_view to_string(Context c) {
  return c == Context::GammaF ? "gamma" : "gamma-tilde";
}

inline Context context_from_string(std::string_view s) {
  if (s == "gamma" || s == "GammaF" || s == "gammaf") return Context::GammaF;
  if (s == "gamma-tilde" || s == "GammaTildeF" || s == "gammatilde") return Context::GammaTildeF;
  throw ConfigError("unknown context '" + std::string(s) + "' (expected gamma | gamma-tilde)");
}

struct SystemParams {
  int n = 3;
  int f = 1;
  Context context = Context::GammaF;
  int horizon = 1;

  bool operator==(const SystemParams&) const = default;
};

/// Throws ConfigError unless 2 < n <= kMaxProcesses, 1 <= f < n and horizon >= 1.
inline void validate_params(const SystemParams& p) {
  if (p.n <= 2) throw ConfigError("n must exceed 2 (got " + std::to_string(p.n) + ")");
  if (p.n > kMaxProcesses) throw ConfigError("n must not exceed " + std::to_string(kMaxProcesses));
  if (p.f < 1 || p.f >= p.n)
    throw ConfigError("f must satisfy 1 <= f < n (got f=" + std::to_string(p.f) + ")");
  if (p.horizon < 1) throw ConfigError("horizon must be at least 1");
}

/// Non-negative residue of `id` modulo n.
inline constexpr ProcessId wrap(int id, int n) { return ((id % n) + n) % n; }

// ----------------------------------------------------------------------------
// Messages and decisions
// ----------------------------------------------------------------------------

enum class Tag : std::uint8_t {
  One,    // round-one vote '1'
  All1,   // "all initial values are 1"
  Err,    // error report
  Huh,    // clarification request
  Cons1,  // consensus value '1'
  Ids,    // id-list of round-one '1' senders
};

inline std::string_view to_string(Tag t) {
  switch (t) {
    case Tag::One: return "ONE";
    case Tag::All1: return "ALL1";
    case Tag::Err: return "ERR";
    case Tag::Huh: return "HUH";
    case Tag::Cons1: return "CONS1";
    case Tag::Ids: return "IDS";
  }
  return "?";
}

inline Tag tag_from_string(std::string_view s) {
  for (Tag t : {Tag::One, Tag::All1, Tag::Err, Tag::Huh, Tag::Cons1, Tag::Ids})
    if (to_string(t) == s) return t;
  throw ConfigError("unknown payload tag '" + std::string(s) + "'");
}

struct Payload {
  Tag tag = Tag::One;
  ProcessSet ids;  // only meaningful for Tag::Ids

  auto operator<=>(const Payload&) const = default;
};

struct Send {
  ProcessId receiver = 0;
  Payload payload;
  auto operator<=>(const Send&) const = default;
};

struct Receipt {
  ProcessId sender = 0;
  Payload payload;
  auto operator<=>(const Receipt&) const = default;
};

/// A message that left its sender. Field order gives the canonical trace
/// ordering (round, sender, receiver).
struct MessageRecord {
  int round = 1;
  ProcessId sender = 0;
  ProcessId receiver = 0;
  Payload payload;

  auto operator<=>(const MessageRecord&) const = default;
};

enum class Action : std::uint8_t { Commit, Abort };

inline std::string_view to_string(Action a) { return a == Action::Commit ? "commit" : "abort"; }

struct Decision {
  Action action = Action::Commit;
  int time = 0;
  bool mid_round = false;  // taken during the send phase of round time+1

  bool operator==(const Decision&) const = default;
};

}  // namespace silence
