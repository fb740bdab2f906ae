#pragma once

// Symbolic dataset construction: configuration enumeration, length-stratified
// pair sampling with all minimal plans, train/test splits by plan length,
// recognition-noise emulation and the line-oriented record file format.

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ies/core.hpp"
#include "ies/logic.hpp"
#include "ies/parallel.hpp"
#include "ies/planner.hpp"

namespace ies {

// ---------------------------------------------------------------------------
// Labels: none (no sequence) or a minimal length 0..8.

using Label = std::optional<int>;
inline constexpr int kNumLabels = kMaxMoves + 2;

constexpr int label_index(Label l) { return l ? *l + 1 : 0; }
constexpr Label label_from_index(int i) { return i == 0 ? Label{} : Label{i - 1}; }

inline std::string label_to_string(Label l) { return l ? std::to_string(*l) : "none"; }

struct PairRecord {
  Configuration src;
  Configuration tgt;
  std::vector<MoveSequence> plans;  // all minimal plans, possibly capped
  Label label;
  bool truncated = false;

  // Throws std::logic_error when a stored plan does not replay or the label
  // disagrees with the plan list.
  void verify() const {
    if (!label) {
      if (!plans.empty()) throw std::logic_error("unreachable record with plans");
      return;
    }
    if (plans.empty()) throw std::logic_error("reachable record without plans");
    for (const auto& p : plans) {
      if (static_cast<int>(p.size()) != *label) throw std::logic_error("plan length differs from label");
      auto end = try_run(src, p);
      if (!end || !same_stacks_relational(*end, tgt))
        throw std::logic_error("plan " + p.to_string() + " does not reach the target");
    }
  }

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

// ---------------------------------------------------------------------------
// Configuration enumeration

// Grid mode: every ordered-stack arrangement. Relational mode: one
// representative per class (stacks ordered by bottom block id).
inline std::vector<Configuration> enumerate_configs(int max_blocks = kMaxBlocks,
                                                    CanonicalMode mode = CanonicalMode::Relational) {
  if (max_blocks < 0 || max_blocks > kMaxBlocks) throw std::invalid_argument("max_blocks must be in 0..5");
  std::vector<Configuration> out;
  for (int k = 0; k <= max_blocks; ++k) {
    for (int mask = 0; mask < (1 << kNumColors); ++mask) {
      ColorSet set(static_cast<std::uint8_t>(mask));
      if (set.size() != k) continue;
      auto colors = set.to_vector();
      do {
        const int cut_masks = k > 0 ? 1 << (k - 1) : 1;
        for (int cuts = 0; cuts < cut_masks; ++cuts) {
          Configuration cfg;
          for (int i = 0; i < k; ++i) {
            if (i == 0 || ((cuts >> (i - 1)) & 1)) cfg.stacks.push_back({});
            cfg.stacks.back().push_back(colors[static_cast<std::size_t>(i)]);
          }
          if (mode == CanonicalMode::Relational &&
              !std::is_sorted(cfg.stacks.begin(), cfg.stacks.end(),
                              [](const Stack& a, const Stack& b) { return a.front() < b.front(); }))
            continue;
          out.push_back(std::move(cfg));
        }
      } while (std::next_permutation(colors.begin(), colors.end()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pair sampling

struct Quotas {
  std::array<std::size_t, kNumLabels> per_label{};  // index via label_index

  static Quotas uniform(std::size_t per_label_count) {
    Quotas q;
    q.per_label.fill(per_label_count);
    return q;
  }
  std::size_t& operator[](Label l) { return per_label[static_cast<std::size_t>(label_index(l))]; }
  std::size_t operator[](Label l) const { return per_label[static_cast<std::size_t>(label_index(l))]; }
  std::size_t total() const {
    std::size_t n = 0;
    for (auto v : per_label) n += v;
    return n;
  }
  friend bool operator==(const Quotas&, const Quotas&) = default;
};

struct PairOptions {
  std::size_t max_plans = 200;
  int jobs = 1;
};

struct PairSample {
  std::vector<PairRecord> records;  // grouped by label (none, 0, ..., 8)
  Quotas achieved;
  bool feasible = true;             // every quota was met
};

// Samples pairs (src from `sources`, tgt from `targets`) uniformly without
// replacement within each label class, then attaches all minimal plans.
// Deterministic given the seed, independent of `jobs`.
inline PairSample make_pairs(const std::vector<Configuration>& sources, const std::vector<Configuration>& targets,
                             const Quotas& quotas, std::uint64_t seed, const PairOptions& opts = {}) {
  using Counts = std::array<std::size_t, kNumLabels>;
  std::vector<std::uint32_t> tgt_keys(targets.size());
  for (std::size_t j = 0; j < targets.size(); ++j) tgt_keys[j] = RelState::from(targets[j]).stacks_key();

  auto label_targets = [&](std::size_t i, auto&& visit) {
    const auto dist = distance_map(sources[i], kMaxMoves);
    for (std::size_t j = 0; j < targets.size(); ++j) {
      auto it = dist.find(tgt_keys[j]);
      visit(j, it == dist.end() ? Label{} : Label{it->second});
    }
  };

  std::vector<Counts> counts(sources.size());
  parallel_for(sources.size(), opts.jobs, [&](std::size_t i) {
    Counts c{};
    label_targets(i, [&](std::size_t, Label l) { ++c[static_cast<std::size_t>(label_index(l))]; });
    counts[i] = c;
  });

  // Choose global ranks per label, then resolve them to (src, k-th target).
  PairSample sample;
  std::vector<std::vector<std::vector<std::size_t>>> wanted(
      sources.size(), std::vector<std::vector<std::size_t>>(kNumLabels));  // [src][label] -> ranks
  for (int li = 0; li < kNumLabels; ++li) {
    const std::size_t quota = quotas.per_label[static_cast<std::size_t>(li)];
    if (quota == 0) continue;
    std::size_t total = 0;
    for (const auto& c : counts) total += c[static_cast<std::size_t>(li)];
    const std::size_t n = std::min(quota, total);
    if (n < quota) sample.feasible = false;
    sample.achieved.per_label[static_cast<std::size_t>(li)] = n;

    // Floyd's algorithm: n distinct values from [0, total).
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(li));
    std::set<std::size_t> chosen;
    for (std::size_t j = total - n; j < total; ++j) {
      std::uniform_int_distribution<std::size_t> dist(0, j);
      const std::size_t t = dist(rng);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::size_t src = 0, base = 0;
    for (std::size_t rank : chosen) {
      while (rank >= base + counts[src][static_cast<std::size_t>(li)]) base += counts[src++][static_cast<std::size_t>(li)];
      wanted[src][static_cast<std::size_t>(li)].push_back(rank - base);
    }
  }

  struct Pick {
    std::size_t src, tgt;
    int label_idx;
  };
  std::vector<std::vector<Pick>> picks(sources.size());
  parallel_for(sources.size(), opts.jobs, [&](std::size_t i) {
    bool any = false;
    for (const auto& w : wanted[i]) any = any || !w.empty();
    if (!any) return;
    Counts seen{};
    Counts next{};
    label_targets(i, [&](std::size_t j, Label l) {
      const auto li = static_cast<std::size_t>(label_index(l));
      const auto& w = wanted[i][li];
      if (next[li] < w.size() && w[next[li]] == seen[li]) {
        picks[i].push_back({i, j, static_cast<int>(li)});
        ++next[li];
      }
      ++seen[li];
    });
  });

  std::vector<Pick> ordered;
  for (int li = 0; li < kNumLabels; ++li)
    for (const auto& per_src : picks)
      for (const auto& p : per_src)
        if (p.label_idx == li) ordered.push_back(p);

  sample.records.resize(ordered.size());
  parallel_for(ordered.size(), opts.jobs, [&](std::size_t k) {
    const auto& p = ordered[k];
    PairRecord rec{sources[p.src], targets[p.tgt], {}, label_from_index(p.label_idx), false};
    if (rec.label) {
      auto res = plan(rec.src, rec.tgt, {.horizon = kMaxMoves, .max_plans = opts.max_plans});
      if (!res.found() || res.min_length != rec.label) throw std::logic_error("planner disagrees with label");
      rec.plans = std::move(res.plans);
      rec.truncated = res.truncated;
    }
    rec.verify();
    sample.records[k] = std::move(rec);
  });
  return sample;
}

inline PairSample make_pairs(const std::vector<Configuration>& configs, const Quotas& quotas, std::uint64_t seed,
                             const PairOptions& opts = {}) {
  return make_pairs(configs, configs, quotas, seed, opts);
}

// k configurations with exactly `blocks` blocks on the table, by seeded shuffle.
inline std::vector<Configuration> target_pool(const std::vector<Configuration>& configs, int blocks, std::size_t k,
                                              std::uint64_t seed) {
  std::vector<Configuration> pool;
  for (const auto& c : configs)
    if (c.block_count() == blocks) pool.push_back(c);
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  if (pool.size() > k) pool.resize(k);
  return pool;
}

// ---------------------------------------------------------------------------
// Splits

struct SplitSpec {
  int ell = 1;
  std::vector<PairRecord> train;  // labels none, 0..ell
  std::vector<PairRecord> test;   // labels ell+1..8
};

inline SplitSpec split_by_length(const std::vector<PairRecord>& records, int ell) {
  if (ell < 1 || ell > kMaxMoves - 1) throw std::invalid_argument("ell must be in 1..7");
  SplitSpec split;
  split.ell = ell;
  for (const auto& r : records) (!r.label || *r.label <= ell ? split.train : split.test).push_back(r);
  return split;
}

// ---------------------------------------------------------------------------
// Recognition noise

// With probability p, recolors one block to an unused color or moves one
// free block to a different on-table position. The result always differs
// from the input unless the scene is empty.
inline Configuration perturb_config(const Configuration& cfg, double p, std::mt19937_64& rng) {
  if (cfg.stacks.empty()) return cfg;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (!(coin(rng) < p)) return cfg;

  std::vector<Configuration> recolors;
  ColorSet used = cfg.scene_colors();
  for (Color c : cfg.out) used.insert(c);
  for (std::size_t s = 0; s < cfg.stacks.size(); ++s)
    for (std::size_t h = 0; h < cfg.stacks[s].size(); ++h)
      for (Color c : kAllColors) {
        if (used.contains(c)) continue;
        Configuration v = cfg;
        v.stacks[s][h] = c;
        recolors.push_back(std::move(v));
      }

  std::vector<Configuration> moves;
  for (const Action& a : legal_moves(cfg))
    if (a.dest.kind() != Destination::Kind::Out) moves.push_back(apply(cfg, a));

  const std::vector<Configuration>* pool = nullptr;
  if (recolors.empty()) pool = &moves;
  else if (moves.empty()) pool = &recolors;
  else pool = coin(rng) < 0.5 ? &recolors : &moves;
  if (pool->empty()) return cfg;
  std::uniform_int_distribution<std::size_t> pick(0, pool->size() - 1);
  return (*pool)[pick(rng)];
}

// ---------------------------------------------------------------------------
// Record files: src <TAB> tgt <TAB> label <TAB> plans [<TAB> truncated]
// Plans are ';'-separated, each a ','-separated list of move(X,Y,t) atoms.

class RecordError : public std::runtime_error {
 public:
  RecordError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline std::string format_record(const PairRecord& r) {
  std::string line = format_config(r.src) + '\t' + format_config(r.tgt) + '\t' + label_to_string(r.label) + '\t';
  for (std::size_t i = 0; i < r.plans.size(); ++i) {
    if (i) line += ';';
    line += r.plans[i].to_string();
  }
  if (r.truncated) line += "\ttruncated";
  return line;
}

inline PairRecord parse_record(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (fields.size() != 4 && fields.size() != 5)
    throw std::invalid_argument("expected 4 or 5 tab-separated fields, got " + std::to_string(fields.size()));
  PairRecord r;
  r.src = parse_config(fields[0]);
  r.tgt = parse_config(fields[1]);
  if (fields[2] == "none") {
    r.label = std::nullopt;
  } else {
    if (fields[2].size() != 1 || fields[2][0] < '0' || fields[2][0] > '8')
      throw std::invalid_argument("bad label '" + std::string(fields[2]) + "'");
    r.label = fields[2][0] - '0';
  }
  if (r.label) {
    std::size_t s = 0;
    for (;;) {
      auto semi = fields[3].find(';', s);
      r.plans.push_back(parse_sequence(fields[3].substr(s, semi == std::string_view::npos ? semi : semi - s)));
      if (semi == std::string_view::npos) break;
      s = semi + 1;
    }
  } else if (!fields[3].empty()) {
    throw std::invalid_argument("label none must have no plans");
  }
  if (fields.size() == 5) {
    if (fields[4] != "truncated") throw std::invalid_argument("unknown fifth field");
    r.truncated = true;
  }
  for (const auto& p : r.plans)
    if (static_cast<int>(p.size()) != *r.label) throw std::invalid_argument("plan length differs from label");
  return r;
}

inline void write_records(std::ostream& os, const std::vector<PairRecord>& records) {
  os << "# src\ttgt\tlabel\tplans\n";
  for (const auto& r : records) os << format_record(r) << '\n';
}

inline std::vector<PairRecord> read_records(std::istream& is) {
  std::vector<PairRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(parse_record(line));
    } catch (const std::exception& e) {
      throw RecordError(n, e.what());
    }
  }
  return out;
}

inline void write_records(const std::string& path, const std::vector<PairRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_records(os, records);
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::vector<PairRecord> read_records(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_records(is);
}

}  // namespace ies
