#pragma once

// Exact planner: layered breadth-first search over relational states that
// enumerates every minimal-length move sequence between two configurations.

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ies/core.hpp"
#include "ies/logic.hpp"

namespace ies {

struct PlanOptions {
  std::optional<int> horizon = kMaxMoves;  // nullopt = unbounded
  std::size_t max_plans = 0;              // 0 = no cap
};

struct PlanResult {
  enum class Status { NoSequence, Plans };

  Status status = Status::NoSequence;
  std::optional<int> min_length;
  std::vector<MoveSequence> plans;  // lexicographic in legal-move order
  bool truncated = false;           // max_plans cut the enumeration short

  bool found() const { return status == Status::Plans; }
};

// Target stacks may only use blocks that are on the table in the source.
inline bool reachable(const Configuration& src, const Configuration& tgt) {
  return tgt.scene_colors().subset_of(src.scene_colors());
}

namespace detail {

struct SearchNode {
  RelState state;
  int depth;
  std::vector<std::uint32_t> preds;  // indices of predecessor nodes
  bool on_shortest_path = false;
};

class PlanEnumerator {
 public:
  PlanEnumerator(const std::vector<SearchNode>& nodes, const std::unordered_map<std::uint32_t, std::uint32_t>& index,
                 std::size_t max_plans)
      : nodes_(nodes), index_(index), max_plans_(max_plans) {}

  template <class Step>
  void enumerate(std::uint32_t node, int goal_depth, Step& step) {
    if (done()) return;
    if (nodes_[node].depth == goal_depth) {
      result_.push_back(MoveSequence::from_actions(prefix_));
      return;
    }
    std::vector<Action> actions;
    nodes_[node].state.legal_moves(actions);
    for (const Action& a : actions) {
      const RelState next = step(nodes_[node].state, a);
      auto it = index_.find(next.key());
      if (it == index_.end()) continue;
      const SearchNode& n = nodes_[it->second];
      if (n.depth != nodes_[node].depth + 1 || !n.on_shortest_path) continue;
      if (done()) {
        truncated_ = true;
        return;
      }
      prefix_.push_back(a);
      enumerate(it->second, goal_depth, step);
      prefix_.pop_back();
    }
  }

  std::vector<MoveSequence> take() { return std::move(result_); }
  bool truncated() const { return truncated_; }

 private:
  bool done() const { return max_plans_ != 0 && result_.size() >= max_plans_; }

  const std::vector<SearchNode>& nodes_;
  const std::unordered_map<std::uint32_t, std::uint32_t>& index_;
  std::size_t max_plans_;
  std::vector<Action> prefix_;
  std::vector<MoveSequence> result_;
  bool truncated_ = false;
};

}  // namespace detail

// Generic minimal-plan search. `step(state, action)` returns the successor
// of a legal action; the default is the logic engine, learned theories plug
// in their own transition model.
template <class Step>
PlanResult search_plans(const Configuration& src, const Configuration& tgt, const PlanOptions& opts, Step&& step) {
  PlanResult result;
  if (!reachable(src, tgt)) return result;
  if (opts.horizon && *opts.horizon < 0) return result;

  const std::uint32_t goal = RelState::from(tgt).stacks_key();
  std::vector<detail::SearchNode> nodes;
  std::unordered_map<std::uint32_t, std::uint32_t> index;
  nodes.push_back({RelState::from(src), 0, {}});
  index.emplace(nodes[0].state.key(), 0U);

  std::vector<std::uint32_t> layer{0};
  std::vector<std::uint32_t> goals;
  std::vector<Action> actions;
  int depth = 0;
  for (;;) {
    for (auto n : layer)
      if (nodes[n].state.stacks_key() == goal) goals.push_back(n);
    if (!goals.empty()) break;
    if (layer.empty() || (opts.horizon && depth >= *opts.horizon)) return result;

    std::vector<std::uint32_t> next_layer;
    for (auto n : layer) {
      const RelState cur = nodes[n].state;
      cur.legal_moves(actions);
      for (const Action& a : actions) {
        const RelState next = step(cur, a);
        auto [it, inserted] = index.try_emplace(next.key(), static_cast<std::uint32_t>(nodes.size()));
        if (inserted) {
          nodes.push_back({next, depth + 1, {}});
          next_layer.push_back(it->second);
        }
        auto& node = nodes[it->second];
        if (node.depth == depth + 1 && (node.preds.empty() || node.preds.back() != n)) node.preds.push_back(n);
      }
    }
    layer = std::move(next_layer);
    ++depth;
  }

  // Mark every state lying on some shortest path to a goal.
  std::vector<std::uint32_t> frontier = goals;
  for (auto g : goals) nodes[g].on_shortest_path = true;
  while (!frontier.empty()) {
    std::vector<std::uint32_t> prev;
    for (auto n : frontier)
      for (auto p : nodes[n].preds)
        if (!nodes[p].on_shortest_path) {
          nodes[p].on_shortest_path = true;
          prev.push_back(p);
        }
    frontier = std::move(prev);
  }

  detail::PlanEnumerator enumerator(nodes, index, opts.max_plans);
  enumerator.enumerate(0, depth, step);
  result.status = PlanResult::Status::Plans;
  result.min_length = depth;
  result.plans = enumerator.take();
  result.truncated = enumerator.truncated();
  return result;
}

struct EngineStep {
  RelState operator()(const RelState& s, const Action& a) const { return s.apply(a); }
};

inline PlanResult plan(const Configuration& src, const Configuration& tgt, const PlanOptions& opts = {}) {
  return search_plans(src, tgt, opts, EngineStep{});
}

// Minimal plan length without materialising plans; stops at the first goal layer.
inline std::optional<int> min_plan_length(const Configuration& src, const Configuration& tgt,
                                          std::optional<int> horizon = kMaxMoves) {
  if (!reachable(src, tgt)) return std::nullopt;
  const std::uint32_t goal = RelState::from(tgt).stacks_key();
  std::unordered_map<std::uint32_t, int> seen;
  std::vector<RelState> layer{RelState::from(src)};
  seen.emplace(layer[0].key(), 0);
  std::vector<Action> actions;
  for (int depth = 0;; ++depth) {
    for (const auto& s : layer)
      if (s.stacks_key() == goal) return depth;
    if (layer.empty() || (horizon && depth >= *horizon)) return std::nullopt;
    std::vector<RelState> next;
    for (const auto& s : layer) {
      s.legal_moves(actions);
      for (const auto& a : actions) {
        const RelState n = s.apply(a);
        if (seen.emplace(n.key(), depth + 1).second) next.push_back(n);
      }
    }
    layer = std::move(next);
  }
}

// Distances from `src` to every reachable state, keyed by stacks_key().
// Used to label many targets against one source.
inline std::unordered_map<std::uint32_t, int> distance_map(const Configuration& src,
                                                           std::optional<int> horizon = kMaxMoves) {
  std::unordered_map<std::uint32_t, int> dist;
  std::unordered_map<std::uint32_t, bool> seen;
  std::vector<RelState> layer{RelState::from(src)};
  seen.emplace(layer[0].key(), true);
  std::vector<Action> actions;
  for (int depth = 0; !layer.empty(); ++depth) {
    for (const auto& s : layer) dist.try_emplace(s.stacks_key(), depth);
    if (horizon && depth >= *horizon) break;
    std::vector<RelState> next;
    for (const auto& s : layer) {
      s.legal_moves(actions);
      for (const auto& a : actions) {
        const RelState n = s.apply(a);
        if (seen.emplace(n.key(), true).second) next.push_back(n);
      }
    }
    layer = std::move(next);
  }
  return dist;
}

}  // namespace ies
