#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "ies/eval.hpp"

using namespace ies;

namespace {

Configuration cfg(std::string_view text) { return parse_config(text); }

PairRecord record(std::string_view src, std::string_view tgt) {
  PairRecord r{cfg(src), cfg(tgt), {}, std::nullopt, false};
  auto res = plan(r.src, r.tgt);
  if (res.found()) {
    r.plans = res.plans;
    r.label = res.min_length;
  }
  return r;
}

std::vector<PairRecord> small_dataset() {
  return make_pairs(enumerate_configs(3), Quotas::uniform(15), 11).records;
}

std::vector<Prediction> first_plans(const std::vector<PairRecord>& rs) {
  std::vector<Prediction> p;
  for (const auto& r : rs) p.push_back(r.plans.empty() ? Prediction{} : Prediction{r.plans.front()});
  return p;
}

}  // namespace

TEST(Fsa, StoredPlansScoreHundred) {
  auto rs = small_dataset();
  EXPECT_EQ(fsa(first_plans(rs), rs), 100.0);
  // any stored plan counts, not only the first
  std::vector<Prediction> last;
  for (const auto& r : rs) last.push_back(r.plans.empty() ? Prediction{} : Prediction{r.plans.back()});
  EXPECT_EQ(fsa(last, rs), 100.0);
  EXPECT_EQ(sla(last, rs), 100.0);
  EXPECT_EQ(semantic_validity(last, rs), 100.0);
}

TEST(Fsa, EmptyPredictionsWithoutLengthZero) {
  std::vector<PairRecord> rs{record("R.G", "G.R"), record("R|G", "R.G"), record("R.G.B", "B.G.R")};
  std::vector<Prediction> empty(rs.size(), MoveSequence{});
  EXPECT_EQ(fsa(empty, rs), 0.0);
  EXPECT_THROW(fsa(std::vector<Prediction>(2), rs), std::invalid_argument);
}

TEST(Fsa, NonMinimalValidPlanIsNotAMatch) {
  auto r = record("R|G", "R.G");
  ASSERT_EQ(r.label, 1);
  // a longer valid plan: detour through the table
  auto detour = parse_sequence("move(R,G,0),move(R,table,1),move(G,R,2)");
  ASSERT_TRUE(same_stacks_relational(run(r.src, detour), r.tgt));
  ASSERT_GT(plan(r.src, r.tgt).min_length, 0);
  std::vector<Prediction> p{detour};
  EXPECT_EQ(fsa(p, {r}), 0.0);
  EXPECT_TRUE(semantic_valid(p[0], r));
  EXPECT_EQ(semantic_validity(p, {r}), 100.0);
}

TEST(Fsa, NoSequenceMatchesUnreachable) {
  auto r = record("R", "G");
  ASSERT_FALSE(r.label);
  EXPECT_TRUE(full_match(std::nullopt, r));
  EXPECT_TRUE(full_match(MoveSequence{}, r));
  EXPECT_TRUE(semantic_valid(std::nullopt, r));
  EXPECT_FALSE(semantic_valid(parse_sequence("move(R,out,0)"), r));
  auto z = record("R|G", "G|R");
  EXPECT_TRUE(full_match(std::nullopt, z));  // both encode to all zeros
}

TEST(Sla, PaddedSlotArithmetic) {
  auto truth = parse_sequence("move(G,table,0),move(R,G,1)");
  auto pred = parse_sequence("move(G,table,0),move(R,B,1)");
  EXPECT_DOUBLE_EQ(step_score(pred, truth, SlaConvention::Padded), 0.875);
  EXPECT_DOUBLE_EQ(step_score(pred, truth, SlaConvention::MaxLength), 0.5);
  EXPECT_DOUBLE_EQ(step_score(truth, truth, SlaConvention::Padded), 1.0);
  EXPECT_DOUBLE_EQ(step_score(MoveSequence{}, MoveSequence{}, SlaConvention::MaxLength), 1.0);
  EXPECT_DOUBLE_EQ(step_score(MoveSequence{}, truth, SlaConvention::Padded), 0.75);
  // best over stored plans
  PairRecord r{cfg("R.G"), cfg("G.R"), {truth}, 2, false};
  EXPECT_DOUBLE_EQ(step_match(pred, r), 0.875);
}

TEST(Sla, NeverBelowFsa) {
  auto rs = small_dataset();
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Prediction> p = first_plans(rs);
    for (auto& x : p)
      if (rng() % 3 == 0) x = parse_sequence("move(R,table,0)");
    EXPECT_GE(sla(p, rs), fsa(p, rs));
    EXPECT_GE(semantic_validity(p, rs), fsa(p, rs));
    EXPECT_GE(sla(p, rs, SlaConvention::MaxLength), fsa(p, rs));
  }
}

TEST(Report, MarkdownTsvAndEmpty) {
  auto rs = small_dataset();
  auto rep = evaluate("ILP", "small", first_plans(rs), rs);
  EXPECT_EQ(rep.overall.n, rs.size());
  std::set<int> labels;
  for (const auto& r : rs) labels.insert(label_index(r.label));
  EXPECT_EQ(rep.per_length.size(), labels.size());
  std::ostringstream md;
  write_report(md, {rep}, ReportFormat::Markdown);
  EXPECT_EQ(md.str(), "| Method | FSA | SLA |\n|---|---|---|\n| ILP | 100.00 | 100.00 |\n");

  std::stringstream tsv;
  write_report(tsv, {rep}, ReportFormat::Tsv);
  EXPECT_EQ(read_report(tsv), std::vector<EvalReport>{rep});

  std::ostringstream e1, e2;
  write_report(e1, {}, ReportFormat::Markdown);
  write_report(e2, {}, ReportFormat::Tsv);
  EXPECT_EQ(e1.str(), "| Method | FSA | SLA |\n|---|---|---|\n");
  EXPECT_EQ(e2.str(), "method\tdataset\tlength\tn\tfsa\tsla\tvalid\n");
}

TEST(Report, Deterministic) {
  auto rs = small_dataset();
  auto p = first_plans(rs);
  p[3] = std::nullopt;
  std::ostringstream a, b;
  write_report(a, {evaluate("X", "d", p, rs)}, ReportFormat::Tsv);
  write_report(b, {evaluate("X", "d", p, rs)}, ReportFormat::Tsv);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Spearman, Basics) {
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_TRUE(std::isnan(spearman({1, 2, 3}, {0, 0, 0})));
  // ties use average ranks: y ranks 1.5,1.5,3 -> rho = sqrt(3)/2
  EXPECT_NEAR(spearman({1, 2, 3}, {5, 5, 7}), std::sqrt(3.0) / 2.0, 1e-12);
}

TEST(PredictAll, NoiseIsReproducibleAcrossJobCounts) {
  auto rs = small_dataset();
  IlpSequencer ilp;
  ilp.train(rs, 0);
  auto a = predict_all(ilp, rs, {.noise = 0.5, .seed = 4, .jobs = 1});
  auto b = predict_all(ilp, rs, {.noise = 0.5, .seed = 4, .jobs = 3});
  EXPECT_EQ(a, b);
  auto clean = predict_all(ilp, rs, {});
  EXPECT_EQ(fsa(clean, rs), 100.0);
  EXPECT_LT(fsa(a, rs), 100.0);
}

TEST(InductionBenchmark, IlpIsFlatAtHundred) {
  auto rs = make_pairs(enumerate_configs(5), Quotas::uniform(8), 5).records;
  auto rows = induction_benchmark([] { return std::make_unique<IlpSequencer>(); }, rs, 1, 6, {});
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_GT(r.n_test, 0u) << r.ell;
    EXPECT_EQ(r.fsa, 100.0) << r.ell;
    EXPECT_EQ(r.sla, 100.0) << r.ell;
  }
  EXPECT_THROW(induction_benchmark([] { return std::make_unique<IlpSequencer>(); }, rs, 0, 6, {}),
               std::invalid_argument);
  EXPECT_THROW(induction_benchmark([] { return std::make_unique<IlpSequencer>(); }, rs, 1, 8, {}),
               std::invalid_argument);
}

TEST(Sequencers, FactoryAndCheckpoints) {
  EXPECT_EQ(make_sequencer("mlp")->name(), "MLP");
  EXPECT_EQ(make_sequencer("q")->name(), "QL");
  EXPECT_EQ(make_sequencer("ilp")->name(), "ILP");
  EXPECT_THROW(make_sequencer("cnn"), std::invalid_argument);

  auto rs = small_dataset();
  const std::string dir = ::testing::TempDir();
  IlpSequencer ilp;
  ilp.train(rs, 0);
  ilp.save(dir + "/theory.lp");
  IlpSequencer ilp2;
  ilp2.load(dir + "/theory.lp");
  EXPECT_EQ(ilp2.theory(), ilp.theory());

  QSequencer q;
  q.train(rs, 1);
  q.save(dir + "/q.tsv");
  QSequencer q2;
  q2.load(dir + "/q.tsv");
  EXPECT_EQ(q2.table(), q.table());
  EXPECT_EQ(predict_all(q, rs), predict_all(q2, rs));
}
