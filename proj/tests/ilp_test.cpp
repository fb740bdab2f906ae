#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "ies/ilp.hpp"
#include "oracles.hpp"

using namespace ies;

namespace {

Configuration cfg(std::string_view text) { return parse_config(text); }

const Clause kOnRule = parse_clause("on(X,Y,t+1) :- move(X,Y,t).");
const Clause kTableRule = parse_clause("ontable(X,t+1) :- move_table(X,t).");
const Clause kOutRule = parse_clause("out(X,t+1) :- move_out(X,t).");

Theory true_theory() { return Theory{{kOnRule, kTableRule, kOutRule}}; }

bool has(const FactSet& f, Pred p, Color a, Color b) { return f.test(static_cast<std::size_t>(GroundAtom{p, a, b}.slot())); }

}  // namespace

TEST(MakeExamples, ReadsEffectsOffTheNextState) {
  const Action a{Color::R, Destination::on(Color::G)};
  auto ex = make_examples({{cfg("R|G"), a, apply(cfg("R|G"), a)}});
  ASSERT_EQ(ex.items.size(), 1u);
  const auto& e = ex.items[0];
  EXPECT_TRUE(has(e.positives, Pred::On, Color::R, Color::G));
  EXPECT_TRUE(has(e.negatives, Pred::OnTable, Color::R, Color::R));
  EXPECT_TRUE(has(e.negatives, Pred::On, Color::G, Color::R));
  EXPECT_FALSE(has(e.positives, Pred::OnTable, Color::G, Color::G));  // inertial, not an example
  EXPECT_FALSE(has(e.negatives, Pred::OnTable, Color::G, Color::G));
  EXPECT_TRUE((e.positives & e.negatives).none());

  const Action out{Color::B, Destination::out()};
  auto ex2 = make_examples({{cfg("B"), out, apply(cfg("B"), out)}});
  EXPECT_TRUE(has(ex2.items[0].positives, Pred::Out, Color::B, Color::B));

  EXPECT_TRUE(make_examples({}).items.empty());
}

TEST(EnumerateClauses, LanguageMembership) {
  const auto all = enumerate_clauses();
  auto contains = [&](const Clause& c) { return std::find(all.begin(), all.end(), c) != all.end(); };
  EXPECT_TRUE(contains(kOnRule));
  EXPECT_TRUE(contains(kTableRule));
  EXPECT_TRUE(contains(kOutRule));
  std::set<std::string> texts;
  for (const auto& c : all) {
    EXPECT_TRUE(c.range_restricted()) << c.to_string();
    EXPECT_LE(c.body.size(), 2u);
    EXPECT_TRUE(texts.insert(c.to_string()).second) << "duplicate " << c.to_string();
    EXPECT_EQ(parse_clause(c.to_string()), c);
  }
  EXPECT_FALSE(contains(Clause{kOnRule.head, {Literal{Pred::Free, 0, 0, false}}}));  // Y unbound
  EXPECT_EQ(enumerate_clauses(), all);  // deterministic order
  // size-1 bodies first
  EXPECT_EQ(all.front().body.size(), 1u);
  EXPECT_EQ(all.back().body.size(), 2u);
}

TEST(EnumerateClauses, NoTwoClausesAreRenamings) {
  auto rename = [](Clause c) {
    auto swap = [](Literal& l) {
      l.a = static_cast<std::uint8_t>(1 - l.a);
      l.b = static_cast<std::uint8_t>(1 - l.b);
    };
    swap(c.head);
    for (auto& l : c.body) swap(l);
    std::sort(c.body.begin(), c.body.end());
    return c;
  };
  auto key = [](Clause c) {
    std::sort(c.body.begin(), c.body.end());
    return c.to_string();
  };
  std::set<std::string> seen;
  for (const auto& c : enumerate_clauses()) {
    const auto k = key(c), r = key(rename(c));
    EXPECT_FALSE(seen.count(k)) << c.to_string();
    EXPECT_FALSE(seen.count(r) && r != k) << c.to_string();
    seen.insert(k);
  }
}

TEST(ClauseText, ParseErrors) {
  EXPECT_EQ(kOnRule.to_string(), "on(X,Y,t+1) :- move(X,Y,t).");
  EXPECT_THROW(parse_clause("on(X,Y,t+1) :- free(X,t)."), ParseError);  // Y unbound
  EXPECT_THROW(parse_clause("free(X,t+1) :- free(X,t)."), ParseError);
  EXPECT_THROW(parse_clause("on(X,Y,t+1) :- move(X,Y,t+1)."), ParseError);
  EXPECT_THROW(parse_clause("on(X,X,t+1) :- move(X,Y,t)."), ParseError);
  EXPECT_THROW(parse_clause("on(X,Y,t+1) :- move(X,Y,t)"), ParseError);
  EXPECT_THROW(parse_clause("on(X,Y,t+1) :- a(X,t), b(X,t), c(X,t)."), ParseError);
}

TEST(Induce, FiveHundredRandomTransitionsYieldTheTrueRules) {
  auto th = induce(random_transitions(500, 0));
  EXPECT_TRUE(th.contains(kOnRule));
  EXPECT_TRUE(th.contains(kTableRule));
  EXPECT_TRUE(th.contains(kOutRule));
  EXPECT_EQ(th.clauses.size(), 3u);
}

TEST(Induce, SingleTransition) {
  const Action a{Color::R, Destination::on(Color::G)};
  auto ex = make_examples({{cfg("R|G"), a, apply(cfg("R|G"), a)}});
  auto th = induce(ex);
  EXPECT_TRUE(consistent(th, ex));
  EXPECT_EQ(th.clauses, std::vector<Clause>{kOnRule});
}

TEST(Induce, Preconditions) {
  EXPECT_THROW(induce(ExampleSet{}), std::invalid_argument);
  // with an empty hypothesis space nothing can cover the positives
  auto ex = make_examples({{cfg("R.G"), Action{Color::G, Destination::table()}, cfg("R|G")}});
  try {
    induce(ex, {});
    FAIL();
  } catch (const Incomplete& e) {
    EXPECT_EQ(e.uncovered(), 1u);
  }
}

TEST(PredictNext, TrueTheoryMatchesEngineOnAllSmallTransitions) {
  const auto th = true_theory();
  std::size_t n = 0;
  for (const auto& c : oracle::all_relational_with_out(3))
    for (const auto& a : legal_moves(c)) {
      ASSERT_EQ(RelState::from(predict_next(th, c, a)), RelState::from(apply(c, a)))
          << format_config(c) << " " << a.to_string();
      ++n;
    }
  EXPECT_GT(n, 1000u);
}

TEST(PredictNext, EmptyTheoryLeavesSubjectUndetermined) {
  EXPECT_THROW(predict_next(Theory{}, cfg("R|G"), Action{Color::R, Destination::on(Color::G)}), InconsistentTheory);
}

TEST(PredictNext, OnRuleFires) {
  auto next = predict_next(Theory{{kOnRule}}, cfg("R|G"), Action{Color::R, Destination::on(Color::G)});
  EXPECT_EQ(next, cfg("G.R"));
}

TEST(PredictNext, IllegalMoveAndBadTheories) {
  EXPECT_THROW(predict_next(true_theory(), cfg("R.G"), Action{Color::R, Destination::table()}), IllegalMove);
  // R gets both on(R,G) and ontable(R)
  Theory bad{{kOnRule, parse_clause("ontable(X,t+1) :- free(X,t).")}};
  EXPECT_THROW(predict_next(bad, cfg("R|G"), Action{Color::R, Destination::on(Color::G)}), InconsistentTheory);
  // G is put on R while R goes on G
  Theory swap{{kOnRule, parse_clause("on(Y,X,t+1) :- move(X,Y,t).")}};
  EXPECT_THROW(predict_next(swap, cfg("R|G"), Action{Color::R, Destination::on(Color::G)}), InconsistentTheory);
}

TEST(PlanWithTheory, MatchesPlannerOnExamples) {
  const auto th = induce(random_transitions(500, 1));
  EXPECT_EQ(plan_with_theory(th, cfg("R.G|B"), cfg("R.G|B")).min_length, 0);
  EXPECT_FALSE(plan_with_theory(th, cfg("R"), cfg("G")).found());
  for (auto [s, t] : {std::pair{"R.G", "G.R"}, {"R.G.B.Y.O", "O.Y.B.G.R"}, {"R.G|B.Y", "Y.R|G.B"}}) {
    auto a = plan_with_theory(th, cfg(s), cfg(t));
    auto b = plan(cfg(s), cfg(t), {.horizon = std::nullopt});
    EXPECT_EQ(a.min_length, b.min_length) << s << " -> " << t;
    EXPECT_EQ(a.plans, b.plans);
  }
}

TEST(PlanWithTheory, LengthOneTransitionsSufficeForLongPlans) {
  auto sample = make_pairs(enumerate_configs(4), [] {
    Quotas q;
    q[1] = 300;
    return q;
  }(), 2);
  auto th = induce(transitions_from_records(sample.records));
  auto src = cfg("R.G.B.Y.O"), tgt = cfg("O.Y.B.G.R");
  auto expected = plan(src, tgt, {.horizon = std::nullopt});
  ASSERT_GE(*expected.min_length, 4);
  auto got = plan_with_theory(th, src, tgt);
  EXPECT_EQ(got.min_length, expected.min_length);
  EXPECT_EQ(got.plans, expected.plans);
}

TEST(TheoryFile, RoundTrip) {
  std::stringstream ss;
  write_theory(ss, true_theory());
  EXPECT_EQ(ss.str(),
            "on(X,Y,t+1) :- move(X,Y,t).\n"
            "ontable(X,t+1) :- move_table(X,t).\n"
            "out(X,t+1) :- move_out(X,t).\n");
  EXPECT_EQ(read_theory(ss), true_theory());
  std::stringstream bad("on(X,Y,t+1) :- move(X,Y,t).\nnope\n");
  try {
    read_theory(bad);
    FAIL();
  } catch (const RecordError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}
