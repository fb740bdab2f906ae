#pragma once

// Common interface over the three Stage-II sequencers.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ies/dataset.hpp"
#include "ies/ilp.hpp"
#include "ies/mlp.hpp"
#include "ies/qlearn.hpp"

namespace ies {

// nullopt is the "no sequence" answer.
using Prediction = std::optional<MoveSequence>;

class Sequencer {
 public:
  virtual ~Sequencer() = default;
  virtual std::string name() const = 0;
  virtual void train(const std::vector<PairRecord>& records, std::uint64_t seed) = 0;
  virtual Prediction predict(const Configuration& src, const Configuration& tgt) const = 0;
  virtual void save(const std::string& path) const = 0;
  virtual void load(const std::string& path) = 0;
};

struct MlpConfig {
  std::vector<int> widths = kDefaultMlpWidths;
  MlpTrainOptions train;
};

class MlpSequencer : public Sequencer {
 public:
  explicit MlpSequencer(MlpConfig cfg = {}) : cfg_(std::move(cfg)), model_(MlpModel::zeros(cfg_.widths)) {}

  std::string name() const override { return "MLP"; }

  void train(const std::vector<PairRecord>& records, std::uint64_t seed) override {
    model_ = MlpModel::glorot(cfg_.widths, seed);
    auto opts = cfg_.train;
    opts.seed = seed + 1;
    last_ = ies::train(model_, TrainingSet::from_records(records), opts);
  }

  Prediction predict(const Configuration& src, const Configuration& tgt) const override {
    return ies::predict(model_, src, tgt);
  }

  void save(const std::string& path) const override { save_mlp(path, model_); }
  void load(const std::string& path) override {
    model_ = load_mlp(path);
    cfg_.widths = model_.widths;
  }

  const MlpModel& model() const { return model_; }
  const MlpTrainResult& last_training() const { return last_; }

 private:
  MlpConfig cfg_;
  MlpModel model_;
  MlpTrainResult last_;
};

struct QConfig {
  QOptions q;
  int episodes_per_pair = 1000;  // episodes = max(q.episodes, this * reachable pairs)
};

class QSequencer : public Sequencer {
 public:
  explicit QSequencer(QConfig cfg = {}) : cfg_(cfg) {}

  std::string name() const override { return "QL"; }

  void train(const std::vector<PairRecord>& records, std::uint64_t seed) override {
    auto opts = cfg_.q;
    opts.seed = seed;
    std::size_t pairs = 0;
    for (const auto& r : records) pairs += r.label ? 1 : 0;
    opts.episodes = static_cast<int>(std::max<std::size_t>(static_cast<std::size_t>(opts.episodes),
                                                           pairs * static_cast<std::size_t>(cfg_.episodes_per_pair)));
    table_ = train_q(records, opts);
  }

  Prediction predict(const Configuration& src, const Configuration& tgt) const override {
    return rollout(table_, src, tgt, cfg_.q.horizon);
  }

  void save(const std::string& path) const override { save_q(path, table_); }
  void load(const std::string& path) override { table_ = load_q(path); }

  const QTable& table() const { return table_; }

 private:
  QConfig cfg_;
  QTable table_;
};

// Induces from every step of every stored plan; plans with the learned
// theory and an unbounded horizon.
class IlpSequencer : public Sequencer {
 public:
  explicit IlpSequencer(std::optional<int> horizon = std::nullopt) : horizon_(horizon) {}

  std::string name() const override { return "ILP"; }

  void train(const std::vector<PairRecord>& records, std::uint64_t) override {
    theory_ = induce(transitions_from_records(records));
  }

  Prediction predict(const Configuration& src, const Configuration& tgt) const override {
    auto res = plan_with_theory(theory_, src, tgt, {.horizon = horizon_, .max_plans = 1});
    if (!res.found()) return std::nullopt;
    return res.plans.front();
  }

  void save(const std::string& path) const override { write_theory(path, theory_); }
  void load(const std::string& path) override { theory_ = read_theory(path); }

  const Theory& theory() const { return theory_; }
  void set_theory(Theory th) { theory_ = std::move(th); }

 private:
  std::optional<int> horizon_;
  Theory theory_;
};

inline std::unique_ptr<Sequencer> make_sequencer(const std::string& method) {
  if (method == "mlp") return std::make_unique<MlpSequencer>();
  if (method == "q") return std::make_unique<QSequencer>();
  if (method == "ilp") return std::make_unique<IlpSequencer>();
  throw std::invalid_argument("unknown method '" + method + "' (expected mlp, q or ilp)");
}

}  // namespace ies
