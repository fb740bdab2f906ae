#pragma once

// Test-only reference implementations. These deliberately avoid RelState
// and the planner so they can check them independently.

#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ies/core.hpp"
#include "ies/logic.hpp"

namespace ies::oracle {

// Every parseable string over {colors, '|'} of length < 2k that yields a
// configuration with exactly k blocks, deduplicated by its text form.
inline std::size_t count_grid_configs_by_strings(int k) {
  if (k == 0) return 1;
  const std::string alphabet = "RGBYOP|";
  std::set<std::string> found;
  std::string buf;
  std::function<void(int)> rec = [&](int remaining) {
    if (!buf.empty()) {
      std::string text;
      for (std::size_t i = 0; i < buf.size(); ++i) {
        if (i && buf[i] != '|' && buf[i - 1] != '|') text += '.';
        text += buf[i];
      }
      try {
        auto cfg = parse_config(text);
        if (cfg.block_count() == k) found.insert(format_config(cfg));
      } catch (const ParseError&) {
      }
    }
    if (remaining == 0) return;
    for (char ch : alphabet) {
      buf.push_back(ch);
      rec(remaining - 1);
      buf.pop_back();
    }
  };
  rec(2 * k - 1);
  return found.size();
}

// Relational key of the stacks only (out-set erased).
inline std::string stacks_key(const Configuration& cfg) {
  return canonical(Configuration(cfg.stacks), CanonicalMode::Relational);
}

struct Reached {
  int depth;
  std::vector<MoveSequence> sequences;
};

// Walks the full tree of legal action sequences from `src` up to max_depth
// (no state deduplication) and records, for every reached stack layout,
// the first depth and every sequence of that depth reaching it.
inline std::map<std::string, Reached> enumerate_all_sequences(const Configuration& src, int max_depth) {
  std::map<std::string, Reached> reached;
  std::vector<Action> prefix;
  std::function<void(const Configuration&)> rec = [&](const Configuration& cfg) {
    const int d = static_cast<int>(prefix.size());
    auto key = stacks_key(cfg);
    auto it = reached.find(key);
    if (it == reached.end()) {
      reached.emplace(key, Reached{d, {MoveSequence::from_actions(prefix)}});
    } else if (it->second.depth == d) {
      it->second.sequences.push_back(MoveSequence::from_actions(prefix));
    } else if (it->second.depth > d) {
      it->second = Reached{d, {MoveSequence::from_actions(prefix)}};
    }
    if (d == max_depth) return;
    for (const Action& a : legal_moves(cfg)) {
      prefix.push_back(a);
      rec(apply(cfg, a));
      prefix.pop_back();
    }
  };
  rec(src);
  return reached;
}

// All configurations (including out-sets) over at most max_blocks blocks in
// total, one per relational class, generated from the text grammar.
inline std::vector<Configuration> all_relational_with_out(int max_blocks) {
  std::vector<Configuration> out;
  std::set<std::string> seen;
  for (int mask = 0; mask < 64; ++mask) {
    ColorSet set(static_cast<std::uint8_t>(mask));
    if (set.size() > max_blocks) continue;
    auto colors = set.to_vector();
    const int n = static_cast<int>(colors.size());
    // Assign every color a "slot": out, or position in a list ordering.
    for (int out_mask = 0; out_mask < (1 << n); ++out_mask) {
      std::vector<Color> scene, gone;
      for (int i = 0; i < n; ++i) ((out_mask >> i) & 1 ? gone : scene).push_back(colors[i]);
      std::sort(scene.begin(), scene.end());
      do {
        const int m = static_cast<int>(scene.size());
        for (int cuts = 0; cuts < (m > 0 ? (1 << (m - 1)) : 1); ++cuts) {
          Configuration cfg;
          if (m > 0) {
            cfg.stacks.push_back({scene[0]});
            for (int i = 1; i < m; ++i) {
              if ((cuts >> (i - 1)) & 1) cfg.stacks.push_back({});
              cfg.stacks.back().push_back(scene[i]);
            }
          }
          cfg.out = gone;
          if (seen.insert(canonical(cfg, CanonicalMode::Relational)).second) out.push_back(cfg);
        }
      } while (std::next_permutation(scene.begin(), scene.end()));
    }
  }
  return out;
}

inline Configuration random_configuration(std::mt19937_64& rng, int max_blocks = kMaxBlocks) {
  std::vector<Color> colors(kAllColors.begin(), kAllColors.end());
  std::shuffle(colors.begin(), colors.end(), rng);
  const int n = static_cast<int>(rng() % static_cast<unsigned>(max_blocks + 1));
  Configuration cfg;
  for (int i = 0; i < n; ++i) {
    if (cfg.stacks.empty() || rng() % 2 == 0) cfg.stacks.push_back({});
    cfg.stacks.back().push_back(colors[i]);
  }
  return cfg;
}

}  // namespace ies::oracle
