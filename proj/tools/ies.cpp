// ies: dataset generation, planning, training, evaluation, induction
// benchmark and detection re-imagination.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ies/ies.hpp"

using namespace ies;

namespace {

std::string data_dir() {
  const char* env = std::getenv("IES_DATA_DIR");
  return env && *env ? env : ".";
}

std::string in_data_dir(const std::string& name) { return data_dir() + "/" + name; }

void log(const std::string& msg) { std::cerr << "[ies] " << msg << '\n'; }

struct Hyper {
  int epochs = MlpTrainOptions{}.epochs;
  double lr = MlpTrainOptions{}.lr;
  int batch = MlpTrainOptions{}.batch;
  int episodes = QOptions{}.episodes;
  int episodes_per_pair = QConfig{}.episodes_per_pair;
  double alpha = QOptions{}.alpha;
  double gamma = QOptions{}.gamma;
};

void add_hyper(CLI::App* sub, Hyper& h) {
  sub->add_option("--epochs", h.epochs, "mlp: training epochs")->capture_default_str();
  sub->add_option("--lr", h.lr, "mlp: Adam learning rate")->capture_default_str();
  sub->add_option("--batch", h.batch, "mlp: minibatch size")->capture_default_str();
  sub->add_option("--episodes", h.episodes, "q: minimum episode count")->capture_default_str();
  sub->add_option("--episodes-per-pair", h.episodes_per_pair, "q: episodes per reachable training pair")
      ->capture_default_str();
  sub->add_option("--alpha", h.alpha, "q: learning rate")->capture_default_str();
  sub->add_option("--gamma", h.gamma, "q: discount")->capture_default_str();
}

std::unique_ptr<Sequencer> build(const std::string& method, const Hyper& h) {
  if (method == "mlp") {
    MlpConfig c;
    c.train.epochs = h.epochs;
    c.train.lr = h.lr;
    c.train.batch = h.batch;
    return std::make_unique<MlpSequencer>(c);
  }
  if (method == "q") {
    QConfig c;
    c.q.episodes = h.episodes;
    c.q.alpha = h.alpha;
    c.q.gamma = h.gamma;
    c.episodes_per_pair = h.episodes_per_pair;
    return std::make_unique<QSequencer>(c);
  }
  return make_sequencer(method);
}

const auto kMethods = CLI::IsMember({"mlp", "q", "ilp"});
const std::map<std::string, ReportFormat> kFormats{{"tsv", ReportFormat::Tsv}, {"md", ReportFormat::Markdown}};
const std::map<std::string, SlaConvention> kSla{{"padded", SlaConvention::Padded}, {"max", SlaConvention::MaxLength}};

// "none=10,1=5" on top of a uniform base.
Quotas parse_quotas(std::size_t per_label, const std::string& spec) {
  auto q = Quotas::uniform(per_label);
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--quota", "expected label=count, got '" + item + "'");
    const auto key = item.substr(0, eq);
    Label l;
    if (key != "none") {
      int v = -1;
      try {
        v = std::stoi(key);
      } catch (const std::exception&) {
      }
      if (v < 0 || v > kMaxMoves || std::to_string(v) != key) throw CLI::ValidationError("--quota", "bad label '" + key + "'");
      l = v;
    }
    try {
      q[l] = std::stoul(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--quota", "bad count in '" + item + "'");
    }
  }
  return q;
}

void print_plan(std::ostream& os, const PlanResult& res) {
  if (!res.found()) {
    os << "no sequence\n";
    return;
  }
  os << "min_length " << *res.min_length << "\nplans " << res.plans.size() << (res.truncated ? " (truncated)" : "")
     << '\n';
  for (const auto& p : res.plans) os << (p.empty() ? "(empty)" : p.to_string()) << '\n';
}

template <class F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage event sequencing over a symbolic blocksworld.\n"
               "Default data directory: $IES_DATA_DIR (currently " + data_dir() + ")."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ies 1.0");

  // gen
  auto* gen = app.add_subcommand("gen", "Sample pairs with all minimal plans");
  int gen_blocks = kMaxBlocks;
  std::size_t per_label = 100, pool = 0, max_plans = 200;
  std::string quota_spec, gen_out = in_data_dir("pairs.tsv");
  std::uint64_t gen_seed = 0;
  int gen_jobs = default_jobs();
  gen->add_option("--max-blocks", gen_blocks, "Largest scene size")->check(CLI::Range(0, kMaxBlocks))->capture_default_str();
  gen->add_option("--per-label", per_label, "Records per label (none, 0..8)")->capture_default_str();
  gen->add_option("--quota", quota_spec, "Per-label overrides, e.g. none=0,8=20");
  gen->add_option("--target-pool", pool, "Draw targets from this many full-size scenes (0 = all)")->capture_default_str();
  gen->add_option("--max-plans", max_plans, "Cap on stored plans per record (0 = none)")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_option("--jobs", gen_jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("-o,--out", gen_out, "Record file, - for stdout")->capture_default_str();

  // plan
  auto* pln = app.add_subcommand("plan", "List all minimal plans between two configurations");
  std::string plan_src, plan_tgt;
  int horizon = kMaxMoves;
  bool unbounded = false;
  std::size_t plan_cap = 0;
  pln->add_option("source", plan_src, "Source configuration, e.g. R.G|B")->required();
  pln->add_option("target", plan_tgt, "Target configuration")->required();
  pln->add_option("--horizon", horizon, "Maximum plan length")->check(CLI::NonNegativeNumber)->capture_default_str();
  pln->add_flag("--unbounded", unbounded, "Search without a length bound");
  pln->add_option("--max-plans", plan_cap, "Stop after this many plans (0 = all)")->capture_default_str();

  // train
  auto* trn = app.add_subcommand("train", "Train a sequencer and write a checkpoint");
  std::string trn_method, trn_data = in_data_dir("pairs.tsv"), trn_out;
  std::uint64_t trn_seed = 0;
  Hyper trn_h;
  trn->add_option("method", trn_method, "mlp, q or ilp")->required()->check(kMethods);
  trn->add_option("--data", trn_data, "Training records")->capture_default_str();
  trn->add_option("-o,--out", trn_out, "Checkpoint path (default: <data dir>/<method>.ckpt)");
  trn->add_option("--seed", trn_seed, "Random seed")->capture_default_str();
  add_hyper(trn, trn_h);

  // eval
  auto* evl = app.add_subcommand("eval", "Score a checkpoint on a record file");
  std::string evl_method, evl_ckpt, evl_data = in_data_dir("pairs.tsv"), evl_report, evl_format = "md", evl_sla = "padded";
  double evl_noise = 0.0;
  std::uint64_t evl_seed = 0;
  int evl_jobs = default_jobs();
  std::optional<double> require_fsa;
  evl->add_option("method", evl_method, "mlp, q or ilp")->required()->check(kMethods);
  evl->add_option("--checkpoint", evl_ckpt, "Checkpoint (default: <data dir>/<method>.ckpt)");
  evl->add_option("--data", evl_data, "Test records")->capture_default_str();
  evl->add_option("--report", evl_report, "Report file (default: stdout)");
  evl->add_option("--format", evl_format, "tsv or md")->check(CLI::IsMember({"tsv", "md"}))->capture_default_str();
  evl->add_option("--sla", evl_sla, "Step alignment length: padded or max")->check(CLI::IsMember({"padded", "max"}))
      ->capture_default_str();
  evl->add_option("--noise", evl_noise, "Recognition noise probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  evl->add_option("--seed", evl_seed, "Noise seed")->capture_default_str();
  evl->add_option("--jobs", evl_jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  evl->add_option("--require-fsa", require_fsa, "Exit 1 when FSA falls below this value");

  // induct
  auto* ind = app.add_subcommand("induct", "Train on plans of length <= l, test on longer ones");
  std::string ind_method, ind_data = in_data_dir("pairs.tsv"), ind_report, ind_format = "md";
  int ell_min = 1, ell_max = 6, ind_jobs = default_jobs();
  double ind_noise = 0.0;
  std::uint64_t ind_seed = 0;
  Hyper ind_h;
  ind->add_option("method", ind_method, "mlp, q or ilp")->required()->check(kMethods);
  ind->add_option("--data", ind_data, "Records")->capture_default_str();
  ind->add_option("--ell-min", ell_min, "Smallest l")->check(CLI::Range(1, kMaxMoves - 1))->capture_default_str();
  ind->add_option("--ell-max", ell_max, "Largest l")->check(CLI::Range(1, kMaxMoves - 1))->capture_default_str();
  ind->add_option("--noise", ind_noise, "Recognition noise probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  ind->add_option("--seed", ind_seed, "Random seed")->capture_default_str();
  ind->add_option("--jobs", ind_jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  ind->add_option("--report", ind_report, "Report file (default: stdout)");
  ind->add_option("--format", ind_format, "tsv or md")->check(CLI::IsMember({"tsv", "md"}))->capture_default_str();
  add_hyper(ind, ind_h);

  // reimagine
  auto* rim = app.add_subcommand("reimagine", "Turn two detection files into configurations");
  std::string rim_src, rim_tgt, classmap = in_data_dir("classmap.tsv");
  ReimagineOptions ropts;
  bool rim_plan = false;
  rim->add_option("source", rim_src, "Source detections")->required()->check(CLI::ExistingFile);
  rim->add_option("target", rim_tgt, "Target detections")->required()->check(CLI::ExistingFile);
  rim->add_option("--classmap", classmap, "label<TAB>color lines")->capture_default_str();
  rim->add_option("--min-score", ropts.min_score, "Detection score filter")->capture_default_str();
  rim->add_option("--overlap", ropts.overlap, "Required overlap, fraction of the upper width")->capture_default_str();
  rim->add_option("--gap", ropts.gap, "Allowed vertical gap, fraction of the lower height")->capture_default_str();
  rim->add_flag("--plan", rim_plan, "Also list minimal plans between the two scenes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().back()->help());
    return 0;
  } catch (const CLI::CallForVersion& e) {
    std::cout << e.what() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    const bool unknown = app.get_subcommands().empty() && argc > 1 && argv[1][0] != '-';
    std::cerr << "error: " << (unknown ? "unknown subcommand '" + std::string(argv[1]) + "'" : std::string(e.what()))
              << "\n\n"
              << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().back()->help());
    return 2;
  }

  try {
    if (*gen) {
      const auto configs = enumerate_configs(gen_blocks);
      const auto targets = pool ? target_pool(configs, gen_blocks, pool, gen_seed) : configs;
      const auto quotas = parse_quotas(per_label, quota_spec);
      log("sampling from " + std::to_string(configs.size()) + " sources x " + std::to_string(targets.size()) +
          " targets");
      auto sample = make_pairs(configs, targets, quotas, gen_seed, {.max_plans = max_plans, .jobs = gen_jobs});
      for (int li = 0; li < kNumLabels; ++li) {
        const auto want = quotas.per_label[static_cast<std::size_t>(li)];
        const auto got = sample.achieved.per_label[static_cast<std::size_t>(li)];
        if (got < want)
          log("label " + label_to_string(label_from_index(li)) + ": only " + std::to_string(got) + " of " +
              std::to_string(want) + " available");
      }
      with_output(gen_out, [&](std::ostream& os) { write_records(os, sample.records); });
      log("wrote " + std::to_string(sample.records.size()) + " records to " + gen_out);
    } else if (*pln) {
      auto res = plan(parse_config(plan_src), parse_config(plan_tgt),
                      {.horizon = unbounded ? std::nullopt : std::optional<int>(horizon), .max_plans = plan_cap});
      print_plan(std::cout, res);
    } else if (*trn) {
      const auto records = read_records(trn_data);
      auto seq = build(trn_method, trn_h);
      log("training " + seq->name() + " on " + std::to_string(records.size()) + " records");
      seq->train(records, trn_seed);
      const auto out = trn_out.empty() ? in_data_dir(trn_method + ".ckpt") : trn_out;
      seq->save(out);
      log("checkpoint " + out);
    } else if (*evl) {
      const auto records = read_records(evl_data);
      auto seq = make_sequencer(evl_method);
      seq->load(evl_ckpt.empty() ? in_data_dir(evl_method + ".ckpt") : evl_ckpt);
      const auto preds = predict_all(*seq, records, {.noise = evl_noise, .seed = evl_seed, .jobs = evl_jobs});
      const auto rep = evaluate(seq->name(), evl_data, preds, records, kSla.at(evl_sla));
      with_output(evl_report, [&](std::ostream& os) { write_report(os, {rep}, kFormats.at(evl_format)); });
      if (require_fsa && rep.overall.fsa < *require_fsa) {
        log("FSA " + std::to_string(rep.overall.fsa) + " below required " + std::to_string(*require_fsa));
        return 1;
      }
    } else if (*ind) {
      if (ell_min > ell_max) throw std::invalid_argument("--ell-min exceeds --ell-max");
      const auto records = read_records(ind_data);
      const auto rows = induction_benchmark([&] { return build(ind_method, ind_h); }, records, ell_min, ell_max,
                                            {.noise = ind_noise, .seed = ind_seed, .jobs = ind_jobs});
      with_output(ind_report, [&](std::ostream& os) {
        write_induction(os, build(ind_method, ind_h)->name(), rows, kFormats.at(ind_format));
      });
    } else if (*rim) {
      const auto map = load_class_map(classmap);
      const auto src = to_blocks(load_detections(rim_src), map, ropts);
      const auto tgt = to_blocks(load_detections(rim_tgt), map, ropts);
      std::cout << "source " << format_config(src) << "\ntarget " << format_config(tgt) << '\n';
      if (rim_plan) print_plan(std::cout, plan(src, tgt));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
