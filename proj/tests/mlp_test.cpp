#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ies/eval.hpp"
#include "ies/mlp.hpp"

using namespace ies;

namespace {

std::vector<PairRecord> sample_records(std::size_t n, std::uint64_t seed, int max_blocks = 3) {
  auto s = make_pairs(enumerate_configs(max_blocks), Quotas::uniform(n), seed);
  std::vector<PairRecord> out = s.records;
  std::mt19937_64 rng(seed);
  std::shuffle(out.begin(), out.end(), rng);
  out.resize(std::min(out.size(), n));
  return out;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, bool binary) {
  Eigen::VectorXd v(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < n; ++i) v(i) = binary ? (u(rng) < 0.5 ? 0.0 : 1.0) : u(rng);
  return v;
}

}  // namespace

TEST(MlpForward, ZeroModelGivesHalf) {
  auto m = MlpModel::zeros(kDefaultMlpWidths);
  auto out = forward(m, encode_pair(parse_config("R.G"), parse_config("G.R")));
  ASSERT_EQ(out.size(), kSequenceBits);
  for (int i = 0; i < out.size(); ++i) EXPECT_EQ(out(i), 0.5);
  // 0.5 meets the threshold; ties resolve to the lowest index in every slot
  auto p = predict(m, parse_config("R"), parse_config("G"));
  ASSERT_EQ(p.size(), 8u);
  for (const auto& mv : p.moves) EXPECT_EQ(mv.action(), (Action{Color::R, Destination::on(Color::G)}));
}

TEST(MlpForward, DeterministicAndBounded) {
  auto a = MlpModel::glorot(kDefaultMlpWidths, 11);
  auto b = MlpModel::glorot(kDefaultMlpWidths, 11);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, MlpModel::glorot(kDefaultMlpWidths, 12));
  EXPECT_EQ(a.layers(), 5u);
  auto x = encode_pair(parse_config("R.G|B"), parse_config("B.G.R"));
  auto y1 = forward(a, x), y2 = forward(b, x);
  EXPECT_EQ(y1, y2);
  for (int i = 0; i < y1.size(); ++i) {
    EXPECT_GT(y1(i), 0.0);
    EXPECT_LT(y1(i), 1.0);
  }
}

TEST(MlpForward, InputLayout) {
  auto x = encode_pair(parse_config("R"), parse_config("-"));
  ASSERT_EQ(x.size(), 80);
  EXPECT_EQ(x.sum(), 2.0);  // one arrangement bit + code 001
  EXPECT_EQ(x(0), 1.0);
  EXPECT_EQ(x(27), 1.0);
}

TEST(BceLoss, Examples) {
  std::vector<double> half(128, 0.5), truth(128, 0.0);
  for (int i = 0; i < 128; i += 3) truth[static_cast<std::size_t>(i)] = 1.0;
  EXPECT_NEAR(bce_loss(half, truth), std::log(2.0), 1e-15);
  EXPECT_LE(bce_loss(truth, truth), -std::log(1.0 - kBceClip) + 1e-15);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> p(128), t(128);
    for (std::size_t i = 0; i < 128; ++i) {
      p[i] = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      t[i] = static_cast<double>(rng() % 2);
    }
    EXPECT_GE(bce_loss(p, t), 0.0);
  }
  EXPECT_THROW(bce_loss(half, std::vector<double>(3)), std::invalid_argument);
}

TEST(MlpPredict, ConfidentEncodingRoundTrips) {
  auto seq = parse_sequence("move(G,table,0),move(R,G,1)");
  auto bits = encode_sequence(seq);
  std::array<double, kSequenceBits> v{};
  for (int i = 0; i < kSequenceBits; ++i) v[static_cast<std::size_t>(i)] = bits[static_cast<std::size_t>(i)] ? 0.99 : 0.01;
  EXPECT_EQ(decode_sequence(std::span<const double, kSequenceBits>(v)), seq);
}

TEST(MlpTrain, EmptyRecordSetLeavesModelUnchanged) {
  auto m = MlpModel::glorot({80, 8, 128}, 1);
  auto before = m;
  auto r = train(m, TrainingSet::from_records({}), {});
  EXPECT_TRUE(r.loss_curve.empty());
  EXPECT_EQ(m, before);
}

TEST(MlpTrain, SeedFixedTrainingIsIdentical) {
  auto recs = sample_records(40, 2);
  auto data = TrainingSet::from_records(recs);
  auto a = MlpModel::glorot({80, 32, 32, 128}, 3), b = a;
  MlpTrainOptions o;
  o.epochs = 5;
  o.seed = 9;
  auto ra = train(a, data, o);
  auto rb = train(b, data, o);
  EXPECT_EQ(a, b);
  EXPECT_EQ(ra.loss_curve, rb.loss_curve);
}

TEST(MlpTrain, OverfitsTenRecords) {
  auto recs = sample_records(10, 4);
  ASSERT_EQ(recs.size(), 10u);
  auto m = MlpModel::glorot(kDefaultMlpWidths, 0);
  MlpTrainOptions o;
  o.epochs = 300;
  o.stop_loss = 1e-3;
  train(m, TrainingSet::from_records(recs), o);
  for (const auto& r : recs) {
    auto p = predict(m, r.src, r.tgt);
    if (r.plans.empty()) {
      EXPECT_TRUE(p.empty());
    } else {
      EXPECT_NE(std::find(r.plans.begin(), r.plans.end(), p), r.plans.end()) << format_record(r);
    }
  }
}

TEST(MlpTrain, SmokeOverfitIsMonotoneAndPermutationStable) {
  auto recs = sample_records(100, 6);
  ASSERT_EQ(recs.size(), 100u);
  MlpTrainOptions o;
  o.epochs = 500;
  o.stop_loss = 0.01;
  auto m = MlpModel::glorot(kDefaultMlpWidths, 0);
  auto r = train(m, TrainingSet::from_records(recs), o);
  ASSERT_FALSE(r.loss_curve.empty());
  EXPECT_LE(r.loss_curve.back(), 0.01);
  for (std::size_t i = 1; i < r.loss_curve.size(); ++i) EXPECT_LE(r.loss_curve[i], r.loss_curve[i - 1]) << i;

  auto shuffled = recs;
  std::mt19937_64 rng(77);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto m2 = MlpModel::glorot(kDefaultMlpWidths, 0);
  o.stop_loss.reset();
  o.epochs = static_cast<int>(r.loss_curve.size());
  auto r2 = train(m2, TrainingSet::from_records(shuffled), o);
  EXPECT_LT(std::abs(r2.loss_curve.back() - r.loss_curve.back()), 0.1 * r.loss_curve.back());
}

TEST(GradCheck, ZeroModel) {
  auto m = MlpModel::zeros({6, 8, 8, 5});
  std::mt19937_64 rng(0);
  auto res = grad_check(m, random_vector(rng, 6, true), random_vector(rng, 5, true));
  EXPECT_LE(res.max_rel_error, 1e-4);
  EXPECT_TRUE(res.failing.empty());
  EXPECT_GT(res.checked, 0u);
}

TEST(GradCheck, SeededRandomModels) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto m = MlpModel::glorot({8, 8, 8, 8, 8, 8}, seed);
    std::mt19937_64 rng(seed + 100);
    auto res = grad_check(m, random_vector(rng, 8, false), random_vector(rng, 8, true));
    EXPECT_LE(res.max_rel_error, 1e-4) << "seed " << seed << " parameter " << res.worst_parameter;
    EXPECT_GT(res.checked, res.skipped);
  }
}

TEST(GradCheck, ReportsOffendingParameters) {
  auto m = MlpModel::glorot({4, 4, 3}, 1);
  std::mt19937_64 rng(2);
  auto res = grad_check(m, random_vector(rng, 4, false), random_vector(rng, 3, true), 1e-5, -1.0);
  EXPECT_EQ(res.failing.size(), res.checked);
}

TEST(Checkpoint, RoundTripAndErrors) {
  auto m = MlpModel::glorot({80, 16, 128}, 4);
  std::stringstream ss;
  save_mlp(ss, m);
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 4), "IESM");
  EXPECT_EQ(bytes.size(), 4 + 4 + 4 + 3 * 4 + m.parameter_count() * 8);
  std::stringstream in(bytes);
  EXPECT_EQ(load_mlp(in), m);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_mlp(truncated), CheckpointError);
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream bad_magic(bad);
  EXPECT_THROW(load_mlp(bad_magic), CheckpointError);
}

TEST(Checkpoint, ParameterOrderIsRowMajorPerLayer) {
  auto m = MlpModel::zeros({2, 3, 1});
  m.weights[0](0, 1) = 7.0;
  m.biases[0](2) = 5.0;
  m.weights[1](0, 2) = 3.0;
  EXPECT_EQ(m.parameter(1), 7.0);
  EXPECT_EQ(m.parameter(6 + 2), 5.0);
  EXPECT_EQ(m.parameter(9 + 2), 3.0);
  EXPECT_EQ(m.parameter_count(), 13u);
}

TEST(MlpInduction, LongerTestPlansScoreBelowHeldInLengths) {
  auto records = make_pairs(enumerate_configs(4), Quotas::uniform(40), 9).records;
  for (int ell = 1; ell <= 4; ++ell) {
    auto split = split_by_length(records, ell);
    ASSERT_FALSE(split.test.empty()) << ell;
    std::mt19937_64 rng(static_cast<std::uint64_t>(ell));
    std::shuffle(split.train.begin(), split.train.end(), rng);
    const auto cut = split.train.begin() + static_cast<std::ptrdiff_t>(split.train.size() * 4 / 5);
    const std::vector<PairRecord> fit(split.train.begin(), cut), held(cut, split.train.end());
    MlpSequencer seq;
    seq.train(fit, 0);
    const double test_fsa = fsa(predict_all(seq, split.test), split.test);
    const double held_fsa = fsa(predict_all(seq, held), held);
    EXPECT_LT(test_fsa, held_fsa) << "l=" << ell;
  }
}
