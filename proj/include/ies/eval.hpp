#pragma once

// Full-sequence and step-level accuracy, semantic validity, and the
// train-short / test-long induction benchmark.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ies/dataset.hpp"
#include "ies/parallel.hpp"
#include "ies/sequencer.hpp"

namespace ies {

// Metrics compare 128-bit encodings, so "no sequence" and the empty
// sequence are the same answer (the all-zero vector).
inline const MoveSequence& as_sequence(const Prediction& p) {
  static const MoveSequence kEmpty;
  return p ? *p : kEmpty;
}

// Ground-truth alternatives: every stored plan, or the empty sequence for
// unreachable records.
inline std::vector<MoveSequence> truths(const PairRecord& r) {
  if (r.plans.empty()) return {MoveSequence{}};
  return r.plans;
}

inline bool full_match(const Prediction& p, const PairRecord& r) {
  const auto& s = as_sequence(p);
  for (const auto& t : truths(r))
    if (t == s) return true;
  return false;
}

enum class SlaConvention { Padded, MaxLength };

// Slots compared one by one; a slot past the end of a sequence is a pad.
inline double step_score(const MoveSequence& pred, const MoveSequence& truth, SlaConvention conv) {
  const std::size_t len = conv == SlaConvention::Padded ? static_cast<std::size_t>(kMaxMoves)
                                                         : std::max(pred.size(), truth.size());
  if (len == 0) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const bool hp = i < pred.size(), ht = i < truth.size();
    if (hp != ht) continue;
    if (!hp || pred.moves[i].action() == truth.moves[i].action()) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(len);
}

inline double step_match(const Prediction& p, const PairRecord& r, SlaConvention conv = SlaConvention::Padded) {
  const auto& s = as_sequence(p);
  double best = 0.0;
  for (const auto& t : truths(r)) best = std::max(best, step_score(s, t, conv));
  return best;
}

// Reaches the target. For unreachable records the only valid answer is no
// sequence.
inline bool semantic_valid(const Prediction& p, const PairRecord& r) {
  if (!r.label) return as_sequence(p).empty();
  if (!p) return false;
  auto end = try_run(r.src, *p);
  return end && same_stacks_relational(*end, r.tgt);
}

namespace detail {

inline void check_sizes(std::size_t preds, std::size_t records) {
  if (preds != records)
    throw std::invalid_argument("got " + std::to_string(preds) + " predictions for " + std::to_string(records) +
                                " records");
}

template <class Score>
double mean_percent(const std::vector<Prediction>& preds, const std::vector<PairRecord>& records, Score&& score) {
  check_sizes(preds.size(), records.size());
  if (records.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) sum += score(preds[i], records[i]);
  return 100.0 * sum / static_cast<double>(records.size());
}

}  // namespace detail

inline double fsa(const std::vector<Prediction>& preds, const std::vector<PairRecord>& records) {
  return detail::mean_percent(preds, records, [](const Prediction& p, const PairRecord& r) {
    return full_match(p, r) ? 1.0 : 0.0;
  });
}

inline double sla(const std::vector<Prediction>& preds, const std::vector<PairRecord>& records,
                  SlaConvention conv = SlaConvention::Padded) {
  return detail::mean_percent(preds, records,
                              [conv](const Prediction& p, const PairRecord& r) { return step_match(p, r, conv); });
}

inline double semantic_validity(const std::vector<Prediction>& preds, const std::vector<PairRecord>& records) {
  return detail::mean_percent(preds, records, [](const Prediction& p, const PairRecord& r) {
    return semantic_valid(p, r) ? 1.0 : 0.0;
  });
}

// ---------------------------------------------------------------------------
// Reports

struct Scores {
  std::size_t n = 0;
  double fsa = 0.0;
  double sla = 0.0;
  double valid = 0.0;  // semantic validity, percent

  friend bool operator==(const Scores&, const Scores&) = default;
};

struct EvalReport {
  std::string method;
  std::string dataset;
  Scores overall;
  std::map<int, Scores> per_length;  // key: label_index (0 = none, l+1 = length l)

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

inline EvalReport evaluate(const std::string& method, const std::string& dataset, const std::vector<Prediction>& preds,
                           const std::vector<PairRecord>& records, SlaConvention conv = SlaConvention::Padded) {
  detail::check_sizes(preds.size(), records.size());
  EvalReport rep{method, dataset, {}, {}};
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) groups[label_index(records[i].label)].push_back(i);
  auto score = [&](const std::vector<std::size_t>& idx) {
    std::vector<Prediction> p;
    std::vector<PairRecord> r;
    for (auto i : idx) {
      p.push_back(preds[i]);
      r.push_back(records[i]);
    }
    return Scores{idx.size(), fsa(p, r), sla(p, r, conv), semantic_validity(p, r)};
  };
  rep.overall = {records.size(), fsa(preds, records), sla(preds, records, conv), semantic_validity(preds, records)};
  for (const auto& [li, idx] : groups) rep.per_length[li] = score(idx);
  return rep;
}

enum class ReportFormat { Tsv, Markdown };

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string length_name(int li) { return li < 0 ? "all" : label_to_string(label_from_index(li)); }

}  // namespace detail

// TSV keeps full precision and the per-length rows so files can be read
// back; markdown is the summary table.
inline void write_report(std::ostream& os, const std::vector<EvalReport>& reports, ReportFormat format) {
  if (format == ReportFormat::Markdown) {
    os << "| Method | FSA | SLA |\n|---|---|---|\n";
    for (const auto& r : reports)
      os << "| " << r.method << " | " << detail::fmt("%.2f", r.overall.fsa) << " | "
         << detail::fmt("%.2f", r.overall.sla) << " |\n";
    return;
  }
  os << "method\tdataset\tlength\tn\tfsa\tsla\tvalid\n";
  auto row = [&](const EvalReport& r, int li, const Scores& s) {
    os << r.method << '\t' << r.dataset << '\t' << detail::length_name(li) << '\t' << s.n << '\t'
       << detail::fmt("%.17g", s.fsa) << '\t' << detail::fmt("%.17g", s.sla) << '\t' << detail::fmt("%.17g", s.valid)
       << '\n';
  };
  for (const auto& r : reports) {
    row(r, -1, r.overall);
    for (const auto& [li, s] : r.per_length) row(r, li, s);
  }
}

inline std::vector<EvalReport> read_report(std::istream& is) {
  std::vector<EvalReport> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (n == 1 || line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, '\t');) f.push_back(cell);
    if (f.size() != 7) throw RecordError(n, "expected 7 fields");
    try {
      Scores s{std::stoul(f[3]), std::stod(f[4]), std::stod(f[5]), std::stod(f[6])};
      if (f[2] == "all") {
        out.push_back({f[0], f[1], s, {}});
      } else {
        if (out.empty() || out.back().method != f[0]) throw RecordError(n, "length row before its summary row");
        const Label l = f[2] == "none" ? Label{} : Label{std::stoi(f[2])};
        out.back().per_length[label_index(l)] = s;
      }
    } catch (const RecordError&) {
      throw;
    } catch (const std::exception& e) {
      throw RecordError(n, e.what());
    }
  }
  return out;
}

inline void write_report(const std::string& path, const std::vector<EvalReport>& reports, ReportFormat format) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_report(os, reports, format);
}

// ---------------------------------------------------------------------------
// Prediction with optional recognition noise

struct PredictOptions {
  double noise = 0.0;  // perturb_config probability on source and target
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Noise draws come from a per-record stream so results do not depend on jobs.
inline std::vector<Prediction> predict_all(const Sequencer& seq, const std::vector<PairRecord>& records,
                                           const PredictOptions& opts = {}) {
  std::vector<Prediction> out(records.size());
  parallel_for(records.size(), opts.jobs, [&](std::size_t i) {
    Configuration src = records[i].src, tgt = records[i].tgt;
    if (opts.noise > 0.0) {
      std::mt19937_64 rng(opts.seed * 0x9E3779B97F4A7C15ULL + i);
      src = perturb_config(src, opts.noise, rng);
      tgt = perturb_config(tgt, opts.noise, rng);
    }
    out[i] = seq.predict(src, tgt);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Induction benchmark

struct InductionRow {
  int ell = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double fsa = 0.0;
  double sla = 0.0;
};

using SequencerFactory = std::function<std::unique_ptr<Sequencer>()>;

// For each ell: train a fresh sequencer on labels <= ell, score on > ell.
inline std::vector<InductionRow> induction_benchmark(const SequencerFactory& make, const std::vector<PairRecord>& records,
                                                     int ell_min, int ell_max, const PredictOptions& opts,
                                                     SlaConvention conv = SlaConvention::Padded) {
  if (ell_min < 1 || ell_max > kMaxMoves - 1 || ell_min > ell_max)
    throw std::invalid_argument("ell range must lie within 1.." + std::to_string(kMaxMoves - 1));
  std::vector<InductionRow> rows;
  for (int ell = ell_min; ell <= ell_max; ++ell) {
    const auto split = split_by_length(records, ell);
    auto seq = make();
    seq->train(split.train, opts.seed);
    const auto preds = predict_all(*seq, split.test, opts);
    rows.push_back({ell, split.train.size(), split.test.size(), fsa(preds, split.test), sla(preds, split.test, conv)});
  }
  return rows;
}

inline void write_induction(std::ostream& os, const std::string& method, const std::vector<InductionRow>& rows,
                            ReportFormat format) {
  if (format == ReportFormat::Markdown) {
    os << "| Method | l | FSA | SLA |\n|---|---|---|---|\n";
    for (const auto& r : rows)
      os << "| " << method << " | " << r.ell << " | " << detail::fmt("%.2f", r.fsa) << " | "
         << detail::fmt("%.2f", r.sla) << " |\n";
    return;
  }
  os << "method\tell\tn_train\tn_test\tfsa\tsla\n";
  for (const auto& r : rows)
    os << method << '\t' << r.ell << '\t' << r.n_train << '\t' << r.n_test << '\t' << detail::fmt("%.17g", r.fsa)
       << '\t' << detail::fmt("%.17g", r.sla) << '\n';
}

// Spearman rank correlation with average ranks for ties; NaN when either
// side has no variance.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ies
