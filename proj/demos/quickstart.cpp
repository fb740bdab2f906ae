// Generate a small dataset, train the three sequencers on 80% of it and
// print their scores on the rest, then the rules the ILP sequencer found.

#include <iostream>
#include <random>

#include "ies/ies.hpp"

using namespace ies;

int main() {
  auto records = make_pairs(enumerate_configs(3), Quotas::uniform(40), 1).records;
  std::mt19937_64 rng(1);
  std::shuffle(records.begin(), records.end(), rng);
  const auto cut = records.begin() + static_cast<std::ptrdiff_t>(records.size() * 4 / 5);
  const std::vector<PairRecord> train(records.begin(), cut), test(cut, records.end());
  std::cerr << train.size() << " train / " << test.size() << " test records\n";

  MlpConfig mlp;
  mlp.train.epochs = 10;
  auto ilp = std::make_unique<IlpSequencer>();
  auto fc = std::make_unique<MlpSequencer>(mlp);
  auto q = std::make_unique<QSequencer>();
  std::vector<EvalReport> reports;
  for (Sequencer* seq : {static_cast<Sequencer*>(fc.get()), static_cast<Sequencer*>(q.get()),
                         static_cast<Sequencer*>(ilp.get())}) {
    seq->train(train, 0);
    reports.push_back(evaluate(seq->name(), "demo", predict_all(*seq, test), test));
  }
  write_report(std::cout, reports, ReportFormat::Markdown);
  std::cout << '\n';
  write_theory(std::cout, ilp->theory());
  return 0;
}
