#include <gtest/gtest.h>

#include <random>

#include "ies/planner.hpp"
#include "oracles.hpp"

using namespace ies;

namespace {

Configuration cfg(std::string_view text) { return parse_config(text); }

// Planner result compared against the exhaustive sequence tree. Unreachable
// targets are decided by exploring to depth 2n, an upper bound on any
// minimal plan (clear n blocks, then build with at most n moves).
void expect_matches_oracle(const Configuration& src, const Configuration& tgt,
                           const std::map<std::string, oracle::Reached>& tree) {
  auto res = plan(src, tgt, {.horizon = std::nullopt});
  auto it = tree.find(oracle::stacks_key(tgt));
  if (it == tree.end()) {
    EXPECT_FALSE(res.found()) << format_config(src) << " -> " << format_config(tgt);
    EXPECT_TRUE(res.plans.empty());
    return;
  }
  ASSERT_TRUE(res.found()) << format_config(src) << " -> " << format_config(tgt);
  EXPECT_EQ(res.min_length, it->second.depth);
  auto expected = it->second.sequences;
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(res.plans, expected) << format_config(src) << " -> " << format_config(tgt);
}

}  // namespace

TEST(Reachable, Examples) {
  EXPECT_TRUE(reachable(cfg("R.G"), cfg("G.R")));
  EXPECT_FALSE(reachable(cfg("R"), cfg("R|G")));
  EXPECT_TRUE(reachable(cfg("R.G|B"), cfg("-")));
  EXPECT_FALSE(reachable(cfg("R;out=G"), cfg("G")));
}

TEST(Plan, IdenticalConfigs) {
  auto res = plan(cfg("R.G|B"), cfg("B|R.G"));
  ASSERT_TRUE(res.found());
  EXPECT_EQ(res.min_length, 0);
  ASSERT_EQ(res.plans.size(), 1u);
  EXPECT_TRUE(res.plans[0].empty());
}

TEST(Plan, SwapTwoStackedBlocks) {
  auto src = cfg("R.G"), tgt = cfg("G.R");
  auto res = plan(src, tgt);
  ASSERT_TRUE(res.found());
  EXPECT_EQ(res.min_length, 2);
  ASSERT_EQ(res.plans.size(), 1u);
  EXPECT_EQ(res.plans[0], parse_sequence("move(G,table,0),move(R,G,1)"));
  expect_matches_oracle(src, tgt, oracle::enumerate_all_sequences(src, 4));
  EXPECT_EQ(min_plan_length(src, tgt), 2);
}

TEST(Plan, MoveEverythingOut) {
  auto src = cfg("R.G|B");
  auto res = plan(src, cfg("-"));
  ASSERT_TRUE(res.found());
  EXPECT_EQ(res.min_length, 3);
  for (const auto& p : res.plans) EXPECT_EQ(run(src, p).stacks.size(), 0u);
  expect_matches_oracle(src, cfg("-"), oracle::enumerate_all_sequences(src, 6));
}

TEST(Plan, UnreachableIsNoSequence) {
  auto res = plan(cfg("R"), cfg("R|G"));
  EXPECT_EQ(res.status, PlanResult::Status::NoSequence);
  EXPECT_FALSE(res.min_length);
  EXPECT_TRUE(res.plans.empty());
  EXPECT_FALSE(min_plan_length(cfg("R"), cfg("R|G")));
}

TEST(Plan, HorizonCutsSearch) {
  auto src = cfg("R.G"), tgt = cfg("G.R");
  EXPECT_FALSE(plan(src, tgt, {.horizon = 1}).found());
  EXPECT_TRUE(plan(src, tgt, {.horizon = 2}).found());
  EXPECT_FALSE(min_plan_length(src, tgt, 1));
}

TEST(Plan, MaxPlansTruncates) {
  auto src = cfg("R|G|B|Y"), tgt = cfg("-");
  auto all = plan(src, tgt);
  ASSERT_EQ(all.plans.size(), 24u);  // 4! orders of moving each block out
  EXPECT_FALSE(all.truncated);
  auto some = plan(src, tgt, {.max_plans = 5});
  EXPECT_TRUE(some.truncated);
  ASSERT_EQ(some.plans.size(), 5u);
  EXPECT_TRUE(std::equal(some.plans.begin(), some.plans.end(), all.plans.begin()));
}

TEST(Plan, ExhaustiveOracleUpToTwoBlocks) {
  std::vector<Configuration> configs;
  for (const auto& c : oracle::all_relational_with_out(2))
    if (c.out.empty()) configs.push_back(c);
  ASSERT_EQ(configs.size(), 52u);
  for (const auto& src : configs) {
    auto tree = oracle::enumerate_all_sequences(src, 2 * src.block_count());
    for (const auto& tgt : configs) expect_matches_oracle(src, tgt, tree);
  }
}

TEST(Plan, SoundnessOnRandomPairs) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    auto src = oracle::random_configuration(rng);
    auto tgt = oracle::random_configuration(rng);
    auto res = plan(src, tgt, {.horizon = std::nullopt, .max_plans = 50});
    EXPECT_EQ(res.found(), reachable(src, tgt));
    if (!res.found()) continue;
    EXPECT_LE(*res.min_length, 8);
    EXPECT_EQ(min_plan_length(src, tgt, std::nullopt), res.min_length);
    for (const auto& p : res.plans) {
      ASSERT_EQ(static_cast<int>(p.size()), *res.min_length);
      ASSERT_TRUE(same_stacks_relational(run(src, p), tgt));
    }
    auto sorted = res.plans;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, res.plans);
    EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  }
}

TEST(Plan, DeterministicAcrossRuns) {
  auto src = cfg("R.G.B|Y.O"), tgt = cfg("O.B|G.Y.R");
  auto a = plan(src, tgt), b = plan(src, tgt);
  EXPECT_EQ(a.plans, b.plans);
  EXPECT_EQ(a.min_length, b.min_length);
}
