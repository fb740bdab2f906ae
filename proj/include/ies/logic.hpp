#pragma once

// Move legality and the deterministic transition function over
// configurations. Two representations are provided: the ordered
// Configuration (grid order matters) and RelState, a packed relational
// state used by the search code.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ies/core.hpp"

namespace ies {

enum class TransitionError {
  SubjectMissing,
  SubjectOut,
  SubjectNotFree,
  DestMissing,
  DestOut,
  DestNotFree,
  SelfMove,
};

inline const char* to_string(TransitionError e) {
  switch (e) {
    case TransitionError::SubjectMissing: return "SubjectMissing";
    case TransitionError::SubjectOut: return "SubjectOut";
    case TransitionError::SubjectNotFree: return "SubjectNotFree";
    case TransitionError::DestMissing: return "DestMissing";
    case TransitionError::DestOut: return "DestOut";
    case TransitionError::DestNotFree: return "DestNotFree";
    case TransitionError::SelfMove: return "SelfMove";
  }
  return "?";
}

class IllegalMove : public std::runtime_error {
 public:
  IllegalMove(TransitionError kind, const Action& a)
      : std::runtime_error(std::string("illegal move ") + a.to_string() + ": " + to_string(kind)), kind_(kind) {}
  TransitionError kind() const { return kind_; }

 private:
  TransitionError kind_;
};

class RunFailure : public std::runtime_error {
 public:
  RunFailure(std::size_t step, TransitionError kind)
      : std::runtime_error("step " + std::to_string(step) + ": " + to_string(kind)), step_(step), kind_(kind) {}
  std::size_t step() const { return step_; }
  TransitionError kind() const { return kind_; }

 private:
  std::size_t step_;
  TransitionError kind_;
};

// ---------------------------------------------------------------------------
// Configuration level

namespace detail {

struct Location {
  std::size_t stack;
  std::size_t height;
};

inline std::optional<Location> locate(const Configuration& cfg, Color x) {
  for (std::size_t s = 0; s < cfg.stacks.size(); ++s)
    for (std::size_t h = 0; h < cfg.stacks[s].size(); ++h)
      if (cfg.stacks[s][h] == x) return Location{s, h};
  return std::nullopt;
}

inline bool is_out(const Configuration& cfg, Color x) {
  return std::find(cfg.out.begin(), cfg.out.end(), x) != cfg.out.end();
}

}  // namespace detail

// True iff x is the top block of some stack.
inline bool is_free(const Configuration& cfg, Color x) {
  for (const auto& s : cfg.stacks)
    if (!s.empty() && s.back() == x) return true;
  return false;
}

inline std::optional<TransitionError> check_move(const Configuration& cfg, const Action& a) {
  if (a.dest.is_block() && a.dest.block() == a.subject) return TransitionError::SelfMove;
  if (!detail::locate(cfg, a.subject)) {
    return detail::is_out(cfg, a.subject) ? TransitionError::SubjectOut : TransitionError::SubjectMissing;
  }
  if (!is_free(cfg, a.subject)) return TransitionError::SubjectNotFree;
  if (a.dest.is_block()) {
    const Color y = a.dest.block();
    if (!detail::locate(cfg, y))
      return detail::is_out(cfg, y) ? TransitionError::DestOut : TransitionError::DestMissing;
    if (!is_free(cfg, y)) return TransitionError::DestNotFree;
  }
  return std::nullopt;
}

inline bool is_legal(const Configuration& cfg, const Action& a) { return !check_move(cfg, a); }

// Legal (subject, dest) pairs ordered by subject id, then destination
// (colors by id, table, out). Table moves of singleton stacks are omitted.
inline std::vector<Action> legal_moves(const Configuration& cfg) {
  std::vector<Action> out;
  for (Color x : kAllColors) {
    for (int d = 0; d < kNumDestinations; ++d) {
      const Action a{x, Destination::from_index(d)};
      if (!is_legal(cfg, a)) continue;
      if (d == 6) {
        auto loc = detail::locate(cfg, x);
        if (loc && cfg.stacks[loc->stack].size() == 1) continue;
      }
      out.push_back(a);
    }
  }
  return out;
}

inline Configuration apply(Configuration cfg, const Action& a) {
  if (auto err = check_move(cfg, a)) throw IllegalMove(*err, a);
  const auto loc = *detail::locate(cfg, a.subject);
  cfg.stacks[loc.stack].pop_back();
  if (cfg.stacks[loc.stack].empty()) cfg.stacks.erase(cfg.stacks.begin() + static_cast<std::ptrdiff_t>(loc.stack));
  switch (a.dest.kind()) {
    case Destination::Kind::Block:
      cfg.stacks[detail::locate(cfg, a.dest.block())->stack].push_back(a.subject);
      break;
    case Destination::Kind::Table:
      cfg.stacks.push_back({a.subject});
      break;
    case Destination::Kind::Out:
      cfg.out.insert(std::upper_bound(cfg.out.begin(), cfg.out.end(), a.subject), a.subject);
      break;
  }
  return cfg;
}

inline Configuration apply(const Configuration& cfg, const Move& m) { return apply(cfg, m.action()); }

// Left fold of apply; throws RunFailure naming the first failing step.
inline Configuration run(Configuration cfg, const MoveSequence& seq) {
  for (std::size_t i = 0; i < seq.moves.size(); ++i) {
    if (auto err = check_move(cfg, seq.moves[i].action())) throw RunFailure(i, *err);
    cfg = apply(std::move(cfg), seq.moves[i].action());
  }
  return cfg;
}

inline std::optional<Configuration> try_run(const Configuration& cfg, const MoveSequence& seq) {
  try {
    return run(cfg, seq);
  } catch (const RunFailure&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Packed relational state: per color, what it rests on. Stack order is not
// represented, so equal RelStates are exactly the relationally equal
// configurations.

class RelState {
 public:
  static constexpr std::uint8_t kAbsent = 0;  // 1..6: on the block with that id
  static constexpr std::uint8_t kTable = 7;
  static constexpr std::uint8_t kOut = 8;

  constexpr RelState() = default;

  static RelState from(const Configuration& cfg) {
    RelState st;
    for (const auto& s : cfg.stacks)
      for (std::size_t h = 0; h < s.size(); ++h)
        st.set_support(s[h], h == 0 ? kTable : static_cast<std::uint8_t>(id(s[h - 1])));
    for (Color c : cfg.out) st.set_support(c, kOut);
    return st;
  }

  static constexpr RelState from_key(std::uint32_t key) {
    RelState st;
    st.bits_ = key;
    return st;
  }

  // Stacks ordered by the id of their bottom block.
  Configuration to_configuration() const {
    Configuration cfg;
    for (Color bottom : kAllColors) {
      if (support(bottom) != kTable) continue;
      Stack s{bottom};
      for (;;) {
        auto above = block_on(s.back());
        if (!above) break;
        s.push_back(*above);
      }
      cfg.stacks.push_back(std::move(s));
    }
    for (Color c : kAllColors)
      if (support(c) == kOut) cfg.out.push_back(c);
    return cfg;
  }

  constexpr std::uint32_t key() const { return bits_; }

  // Key with the out-set erased: equal iff the stacks are relationally equal.
  constexpr std::uint32_t stacks_key() const {
    std::uint32_t k = bits_;
    for (int i = 0; i < kNumColors; ++i)
      if (((k >> (4 * i)) & 0xF) == kOut) k &= ~(0xFU << (4 * i));
    return k;
  }

  constexpr std::uint8_t support(Color c) const {
    return static_cast<std::uint8_t>((bits_ >> (4 * (id(c) - 1))) & 0xF);
  }
  constexpr void set_support(Color c, std::uint8_t v) {
    const int shift = 4 * (id(c) - 1);
    bits_ = (bits_ & ~(0xFU << shift)) | (static_cast<std::uint32_t>(v) << shift);
  }

  constexpr bool in_scene(Color c) const {
    const auto s = support(c);
    return s != kAbsent && s != kOut;
  }

  std::optional<Color> block_on(Color below) const {
    for (Color c : kAllColors)
      if (support(c) == id(below)) return c;
    return std::nullopt;
  }

  constexpr bool is_free(Color c) const {
    if (!in_scene(c)) return false;
    for (int i = 0; i < kNumColors; ++i)
      if (((bits_ >> (4 * i)) & 0xF) == static_cast<std::uint32_t>(id(c))) return false;
    return true;
  }

  ColorSet scene_colors() const {
    ColorSet cs;
    for (Color c : kAllColors)
      if (in_scene(c)) cs.insert(c);
    return cs;
  }

  std::optional<TransitionError> check(const Action& a) const {
    if (a.dest.is_block() && a.dest.block() == a.subject) return TransitionError::SelfMove;
    const auto s = support(a.subject);
    if (s == kAbsent) return TransitionError::SubjectMissing;
    if (s == kOut) return TransitionError::SubjectOut;
    if (!is_free(a.subject)) return TransitionError::SubjectNotFree;
    if (a.dest.is_block()) {
      const auto d = support(a.dest.block());
      if (d == kAbsent) return TransitionError::DestMissing;
      if (d == kOut) return TransitionError::DestOut;
      if (!is_free(a.dest.block())) return TransitionError::DestNotFree;
    }
    return std::nullopt;
  }

  // Unchecked: callers must only pass legal actions.
  constexpr RelState apply(const Action& a) const {
    RelState next = *this;
    switch (a.dest.kind()) {
      case Destination::Kind::Block: next.set_support(a.subject, static_cast<std::uint8_t>(id(a.dest.block()))); break;
      case Destination::Kind::Table: next.set_support(a.subject, kTable); break;
      case Destination::Kind::Out: next.set_support(a.subject, kOut); break;
    }
    return next;
  }

  // Same order and no-op rule as ies::legal_moves.
  void legal_moves(std::vector<Action>& out) const {
    out.clear();
    ColorSet free;
    for (Color c : kAllColors)
      if (is_free(c)) free.insert(c);
    for (Color x : kAllColors) {
      if (!free.contains(x)) continue;
      for (Color y : kAllColors)
        if (y != x && free.contains(y)) out.push_back({x, Destination::on(y)});
      if (support(x) != kTable) out.push_back({x, Destination::table()});
      out.push_back({x, Destination::out()});
    }
  }

  std::vector<Action> legal_moves() const {
    std::vector<Action> out;
    legal_moves(out);
    return out;
  }

  friend constexpr bool operator==(RelState, RelState) = default;

 private:
  std::uint32_t bits_ = 0;
};

}  // namespace ies
