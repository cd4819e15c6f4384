#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "support.hpp"

using namespace silence;
using namespace support;

namespace {

// Independent enumeration for single-fault systems: for each value vector,
// the failure-free run plus, for each process j and each round in which j
// still acts, every admissible crash-round delivery choice, each replayed
// with execute(). Before its crash j behaves exactly as in the failure-free
// run, so that run supplies the prescribed sends.
std::map<std::string, silence::Run> single_fault_oracle(const std::string& name, int n,
                                               const std::vector<int>* only = nullptr) {
  const auto p = protocol(name, n, 1);
  const auto sp = params(name, n, 1);
  std::map<std::string, silence::Run> out;
  auto add = [&](silence::Run r) {
    const auto key = run_key(r);
    EXPECT_TRUE(out.emplace(key, std::move(r)).second) << "oracle produced " << key << " twice";
  };
  for (std::uint32_t idx = 0; idx < (1u << n); ++idx) {
    const auto values = value_vector(idx, n);
    if (only && values != *only) continue;
    const silence::Run base = execute(p, values, {}, sp);
    add(base);
    for (ProcessId j = 0; j < n; ++j) {
      for (int round = 1; round <= sp.horizon; ++round) {
        const bool acting = round <= base.end_time &&
                            (!base.halt_times[j] || *base.halt_times[j] >= round);
        if (!acting) continue;
        std::vector<ProcessId> receivers;
        for (const auto& m : base.messages)
          if (m.sender == j && m.round == round) receivers.push_back(m.receiver);
        if (sp.context == Context::GammaF) {
          for (std::uint32_t mask = 0; mask < (1u << receivers.size()); ++mask) {
            std::vector<ProcessId> chosen;
            for (std::size_t k = 0; k < receivers.size(); ++k)
              if (mask >> k & 1u) chosen.push_back(receivers[k]);
            add(execute(p, values, FailureSpec{{crash(j, round, chosen)}}, sp));
          }
        } else {
          for (std::size_t k = 0; k <= receivers.size(); ++k)
            add(execute(p, values, FailureSpec{{crash_prefix(j, round, static_cast<int>(k))}}, sp));
          const auto& d = base.decisions[j];
          if (d && d->mid_round && d->time == round - 1)
            add(execute(p, values,
                        FailureSpec{{crash_prefix(j, round, static_cast<int>(receivers.size()), true)}}, sp));
        }
      }
    }
  }
  return out;
}

void expect_same_runs(const RunUniverse& u, const std::map<std::string, silence::Run>& oracle) {
  ASSERT_EQ(u.size(), oracle.size());
  for (const silence::Run& r : u) {
    auto it = oracle.find(run_key(r));
    ASSERT_NE(it, oracle.end()) << "oracle lacks " << run_key(r);
    EXPECT_EQ(it->second, r);
  }
}

}  // namespace

TEST(Enumerate, SingleFaultUniversesMatchTheIndependentOracle) {
  for (std::string name : {"stealth", "d2", "d1f1", "d15"})
    expect_same_runs(universe(name, 3, 1), single_fault_oracle(name, 3));
  expect_same_runs(universe("d1f1", 4, 1), single_fault_oracle("d1f1", 4));
}

TEST(Enumerate, D1f1NiceVectorCardinality) {
  const std::vector<int> ones{1, 1, 1};
  const auto u = enumerate(protocol("d1f1"), params("d1f1", 3, 1), EnumerationFilter::only_values(ones));
  const auto oracle = single_fault_oracle("d1f1", 3, &ones);
  expect_same_runs(u, oracle);
  EXPECT_TRUE(find_run(u, ones, {}));
  // Round 1: 4 delivery subsets for each of 3 processes. Round 2: everyone
  // committed and is silent, so a crash has one form. Then all halt.
  EXPECT_EQ(u.size(), 1u + 3u * 4u + 3u * 1u);
}

TEST(Enumerate, FailureFreeFilterGivesOneRunPerValueVector) {
  for (const auto& c : small_configs()) {
    const auto u = enumerate(protocol(c.name, c.n, c.f), params(c.name, c.n, c.f),
                             EnumerationFilter::failure_free());
    EXPECT_EQ(u.size(), std::size_t{1} << c.n) << label(c);
    for (const silence::Run& r : u) EXPECT_TRUE(r.failures.empty());
  }
}

TEST(Enumerate, EveryRunReplaysUnderExecute) {
  for (const auto& c : small_configs()) {
    const auto p = protocol(c.name, c.n, c.f);
    for (const silence::Run& r : universe(c.name, c.n, c.f))
      ASSERT_EQ(execute(p, r.initial_values, r.failures, r.params), r) << run_key(r);
  }
}

TEST(Enumerate, CanonicalOrder) {
  const auto& u = universe("stealth", 3, 2);
  std::vector<int> prev_values;
  for (const silence::Run& r : u) {
    if (r.initial_values != prev_values) {
      EXPECT_TRUE(prev_values.empty() || prev_values < r.initial_values);
      EXPECT_TRUE(r.failures.empty()) << "each vector opens with its failure-free run";
      prev_values = r.initial_values;
    }
    EXPECT_LE(static_cast<int>(r.failures.entries.size()), 2);
  }
}

TEST(Enumerate, ValueVectorsAreBinaryOrdered) {
  EXPECT_EQ(value_vector(0, 3), (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(value_vector(1, 3), (std::vector<int>{0, 0, 1}));
  EXPECT_EQ(value_vector(6, 3), (std::vector<int>{1, 1, 0}));
}

TEST(Enumerate, FilteredUniverseIsASubset) {
  const auto& full = universe("d2", 3, 2);
  const auto part = enumerate(protocol("d2", 3, 2), params("d2", 3, 2),
                              EnumerationFilter::only_values({1, 0, 1}));
  ASSERT_GT(part.size(), 1u);
  for (const silence::Run& r : part) {
    const silence::Run* same = find_run(full, r.initial_values, r.failures);
    ASSERT_TRUE(same);
    EXPECT_EQ(*same, r);
  }
}

TEST(Enumerate, ContainsSilentZeroCrashForEveryProcess) {
  const auto& u = universe("stealth", 3, 1);
  for (ProcessId j = 0; j < 3; ++j) {
    std::vector<int> values{1, 1, 1};
    values[j] = 0;
    const silence::Run* r = find_run(u, values, FailureSpec{{crash(j, 1)}});
    ASSERT_TRUE(r) << j;
    for (const auto& m : r->messages) EXPECT_NE(m.sender, j);
  }
}

TEST(FindRun, Lookups) {
  const auto& u = universe("stealth", 3, 1);
  const silence::Run* nice_run = find_run(u, {1, 1, 1}, {});
  ASSERT_TRUE(nice_run);
  EXPECT_EQ(*nice_run, nice("stealth", 3, 1));
  EXPECT_FALSE(find_run(u, {1, 1, 1}, FailureSpec{{crash(0, 1), crash(1, 1)}}));
  const silence::Run* r = find_run(u, {0, 1, 1}, FailureSpec{{crash(0, 1)}});
  ASSERT_TRUE(r);
  for (const auto& m : r->messages) EXPECT_NE(m.sender, 0);
}

TEST(Enumerate, BudgetOverflowNamesTheFirstUncountedRun) {
  const auto& u = universe("stealth", 3, 1);
  try {
    enumerate(protocol("stealth"), params("stealth", 3, 1), {}, 100);
    FAIL() << "expected an overflow";
  } catch (const BudgetExceeded& e) {
    EXPECT_EQ(e.budget(), 100u);
    EXPECT_EQ(e.first_uncounted(), run_key(u[100]));
  }
  EXPECT_EQ(enumerate(protocol("stealth"), params("stealth", 3, 1), {}, u.size()).size(), u.size());
}

TEST(Enumerate, StreamingCountMatchesMaterializedUniverse) {
  for (const auto& c : small_configs()) {
    std::size_t seen = 0;
    const auto count = for_each_run(protocol(c.name, c.n, c.f), params(c.name, c.n, c.f), {},
                                    [&](const silence::Run&) { ++seen; });
    EXPECT_EQ(count, seen);
    EXPECT_EQ(count, universe(c.name, c.n, c.f).size()) << label(c);
  }
}
