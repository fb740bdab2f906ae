#pragma once

// Goal-conditioned tabular Q-learning over relational states. The table key
// folds the target into the state; actions are the legal moves of the state.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ies/core.hpp"
#include "ies/dataset.hpp"
#include "ies/logic.hpp"

namespace ies {

struct QOptions {
  int episodes = 20000;
  double alpha = 0.1;
  double gamma = 0.9;
  double eps_start = 1.0;
  double eps_end = 0.05;
  int horizon = kMaxMoves;
  std::uint64_t seed = 0;
};

inline constexpr double kGoalReward = 1.0;
inline constexpr double kStepReward = -0.01;

// +1 when the move reaches the target, -0.01 otherwise.
inline double reward(const RelState& next, const RelState& goal) {
  return next.stacks_key() == goal.stacks_key() ? kGoalReward : kStepReward;
}

class QTable {
 public:
  struct Entry {
    std::vector<Action> actions;  // legal-move order
    std::vector<double> q;
  };

  static std::uint64_t key(const RelState& cur, const RelState& goal) {
    return (static_cast<std::uint64_t>(cur.stacks_key()) << 32) | goal.stacks_key();
  }

  const Entry* find(const RelState& cur, const RelState& goal) const {
    auto it = table_.find(key(cur, goal));
    return it == table_.end() ? nullptr : &it->second;
  }

  Entry& entry(const RelState& cur, const RelState& goal) {
    auto [it, inserted] = table_.try_emplace(key(cur, goal));
    if (inserted) {
      it->second.actions = RelState::from_key(cur.stacks_key()).legal_moves();
      it->second.q.assign(it->second.actions.size(), 0.0);
    }
    return it->second;
  }

  std::size_t size() const { return table_.size(); }
  const std::unordered_map<std::uint64_t, Entry>& entries() const { return table_; }

  double max_abs_q() const {
    double m = 0.0;
    for (const auto& [k, e] : table_)
      for (double v : e.q) m = std::max(m, std::abs(v));
    return m;
  }

  friend bool operator==(const QTable& a, const QTable& b) {
    if (a.table_.size() != b.table_.size()) return false;
    for (const auto& [k, e] : a.table_) {
      auto it = b.table_.find(k);
      if (it == b.table_.end() || it->second.actions != e.actions || it->second.q != e.q) return false;
    }
    return true;
  }

 private:
  std::unordered_map<std::uint64_t, Entry> table_;
};

namespace detail {

inline std::size_t argmax_first(const std::vector<double>& q) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = i;
  return best;
}

}  // namespace detail

// One Q-learning episode from src towards tgt. Returns the number of updates.
inline int run_episode(QTable& table, const RelState& src, const RelState& goal, double eps, const QOptions& opts,
                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  RelState s = RelState::from_key(src.stacks_key());
  int updates = 0;
  for (int step = 0; step < opts.horizon; ++step) {
    if (s.stacks_key() == goal.stacks_key()) break;
    if (s.scene_colors().empty()) break;  // dead end: nothing can move
    auto& e = table.entry(s, goal);
    std::size_t a;
    if (coin(rng) < eps) {
      a = std::uniform_int_distribution<std::size_t>(0, e.actions.size() - 1)(rng);
    } else {
      a = detail::argmax_first(e.q);
    }
    const RelState next = RelState::from_key(s.apply(e.actions[a]).stacks_key());
    const double r = reward(next, goal);
    double target = r;
    if (r != kGoalReward) {
      if (const auto* ne = table.find(next, goal); ne && !ne->q.empty())
        target += opts.gamma * *std::max_element(ne->q.begin(), ne->q.end());
    }
    e.q[a] += opts.alpha * (target - e.q[a]);
    ++updates;
    if (r == kGoalReward) break;
    s = next;
  }
  return updates;
}

inline double epsilon_at(int episode, const QOptions& opts) {
  if (opts.episodes <= 1) return opts.eps_end;
  const double f = static_cast<double>(episode) / static_cast<double>(opts.episodes - 1);
  return opts.eps_start + (opts.eps_end - opts.eps_start) * f;
}

using ConfigPairs = std::vector<std::pair<Configuration, Configuration>>;

// Episodes draw a (src, tgt) pair uniformly at random from `pairs`.
inline QTable train_q(const ConfigPairs& pairs, const QOptions& opts) {
  QTable table;
  if (pairs.empty()) return table;
  std::vector<std::pair<RelState, RelState>> states;
  for (const auto& [s, t] : pairs) states.emplace_back(RelState::from(s), RelState::from(t));
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, states.size() - 1);
  for (int ep = 0; ep < opts.episodes; ++ep) {
    const auto& [s, g] = states[pick(rng)];
    run_episode(table, s, g, epsilon_at(ep, opts), opts, rng);
  }
  return table;
}

// Reachable records only; unreachable pairs have no goal to learn.
inline QTable train_q(const std::vector<PairRecord>& records, const QOptions& opts) {
  ConfigPairs pairs;
  for (const auto& r : records)
    if (r.label) pairs.emplace_back(r.src, r.tgt);
  return train_q(pairs, opts);
}

// Greedy policy execution. Unseen states or a missed goal give nullopt.
inline std::optional<MoveSequence> rollout(const QTable& table, const Configuration& src, const Configuration& tgt,
                                           int horizon = kMaxMoves) {
  const RelState goal = RelState::from(tgt);
  RelState s = RelState::from_key(RelState::from(src).stacks_key());
  std::vector<Action> plan;
  for (;;) {
    if (s.stacks_key() == goal.stacks_key()) return MoveSequence::from_actions(plan);
    if (static_cast<int>(plan.size()) >= horizon) return std::nullopt;
    const auto* e = table.find(s, goal);
    if (!e || e->actions.empty()) return std::nullopt;
    const Action a = e->actions[detail::argmax_first(e->q)];
    plan.push_back(a);
    s = RelState::from_key(s.apply(a).stacks_key());
  }
}

// ---------------------------------------------------------------------------
// Checkpoint: "<cur>@<tgt>\t<X,dest>\t<q>" per line, sorted, %.17g values.

namespace detail {

inline std::string q_state_text(std::uint32_t stacks_key) {
  return canonical(RelState::from_key(stacks_key).to_configuration(), CanonicalMode::Relational);
}

inline Action parse_action_text(std::string_view text) {
  const auto comma = text.find(',');
  if (comma != 1 || text.size() < 3) throw ParseError(0, "bad action '" + std::string(text) + "'");
  const auto subject = color_from_letter(text[0]);
  if (!subject) throw ParseError(0, "bad action subject");
  const auto dest_text = text.substr(2);
  Destination dest = Destination::table();
  if (dest_text == "table") {
    dest = Destination::table();
  } else if (dest_text == "out") {
    dest = Destination::out();
  } else if (dest_text.size() == 1 && color_from_letter(dest_text[0])) {
    dest = Destination::on(*color_from_letter(dest_text[0]));
  } else {
    throw ParseError(2, "bad action destination");
  }
  return {*subject, dest};
}

}  // namespace detail

inline void save_q(std::ostream& os, const QTable& table) {
  std::vector<std::string> lines;
  char buf[64];
  for (const auto& [k, e] : table.entries()) {
    const std::string state = detail::q_state_text(static_cast<std::uint32_t>(k >> 32)) + "@" +
                              detail::q_state_text(static_cast<std::uint32_t>(k & 0xFFFFFFFFU));
    for (std::size_t i = 0; i < e.actions.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", e.q[i]);
      lines.push_back(state + "\t" + e.actions[i].to_string() + "\t" + buf);
    }
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines) os << l << '\n';
}

inline QTable load_q(std::istream& is) {
  QTable table;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto t1 = line.find('\t');
      const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
      if (t2 == std::string::npos) throw ParseError(0, "expected three tab-separated fields");
      const std::string state = line.substr(0, t1);
      const auto at = state.find('@');
      if (at == std::string::npos) throw ParseError(0, "state key lacks '@'");
      const RelState cur = RelState::from(parse_config(state.substr(0, at)));
      const RelState goal = RelState::from(parse_config(state.substr(at + 1)));
      const Action a = detail::parse_action_text(line.substr(t1 + 1, t2 - t1 - 1));
      const std::string qtext = line.substr(t2 + 1);
      std::size_t used = 0;
      const double q = std::stod(qtext, &used);
      if (used != qtext.size() || !std::isfinite(q)) throw ParseError(0, "bad q-value");
      auto& e = table.entry(cur, goal);
      auto it = std::find(e.actions.begin(), e.actions.end(), a);
      if (it == e.actions.end()) throw ParseError(0, "action " + a.to_string() + " is not legal in " + state);
      e.q[static_cast<std::size_t>(it - e.actions.begin())] = q;
    } catch (const std::exception& ex) {
      throw RecordError(n, ex.what());
    }
  }
  return table;
}

inline void save_q(const std::string& path, const QTable& table) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  save_q(os, table);
}

inline QTable load_q(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return load_q(is);
}

}  // namespace ies
