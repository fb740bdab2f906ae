#pragma once

// Rule induction for move effects. Hypotheses are two-variable clauses with
// at most two body literals; the frame (inertia) and legality rules are
// fixed background knowledge and are never learned.

#include <algorithm>
#include <array>
#include <bitset>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "ies/core.hpp"
#include "ies/dataset.hpp"
#include "ies/logic.hpp"
#include "ies/planner.hpp"

namespace ies {

enum class Pred : std::uint8_t { On, OnTable, Out, Free, Move, MoveTable, MoveOut };
inline constexpr int kNumPreds = 7;

constexpr int arity(Pred p) { return p == Pred::On || p == Pred::Move ? 2 : 1; }
constexpr bool is_head_pred(Pred p) { return p == Pred::On || p == Pred::OnTable || p == Pred::Out; }

inline const char* pred_name(Pred p) {
  switch (p) {
    case Pred::On: return "on";
    case Pred::OnTable: return "ontable";
    case Pred::Out: return "out";
    case Pred::Free: return "free";
    case Pred::Move: return "move";
    case Pred::MoveTable: return "move_table";
    case Pred::MoveOut: return "move_out";
  }
  return "?";
}

inline std::optional<Pred> pred_from_name(std::string_view s) {
  for (int i = 0; i < kNumPreds; ++i)
    if (s == pred_name(static_cast<Pred>(i))) return static_cast<Pred>(i);
  return std::nullopt;
}

// Variables: 0 = X, 1 = Y.
struct Literal {
  Pred pred = Pred::On;
  std::uint8_t a = 0;
  std::uint8_t b = 0;  // unused for unary predicates
  bool next = false;   // t+1 for heads, t for bodies

  bool uses(int var) const { return a == var || (arity(pred) == 2 && b == var); }

  std::string to_string() const {
    std::string s = pred_name(pred);
    s += '(';
    s += a == 0 ? 'X' : 'Y';
    if (arity(pred) == 2) {
      s += ',';
      s += b == 0 ? 'X' : 'Y';
    }
    s += next ? ",t+1)" : ",t)";
    return s;
  }

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal& l, const Literal& r) {
    return std::tuple(static_cast<int>(l.pred), l.a, l.b, l.next) <=>
           std::tuple(static_cast<int>(r.pred), r.a, r.b, r.next);
  }
};

struct Clause {
  Literal head;
  std::vector<Literal> body;

  bool uses(int var) const {
    if (head.uses(var)) return true;
    for (const auto& l : body)
      if (l.uses(var)) return true;
    return false;
  }

  bool range_restricted() const {
    for (int v = 0; v < 2; ++v) {
      if (!head.uses(v)) continue;
      bool found = false;
      for (const auto& l : body) found = found || l.uses(v);
      if (!found) return false;
    }
    return true;
  }

  std::string to_string() const {
    std::string s = head.to_string() + " :- ";
    for (std::size_t i = 0; i < body.size(); ++i) s += (i ? ", " : "") + body[i].to_string();
    return s + ".";
  }

  friend bool operator==(const Clause&, const Clause&) = default;
};

// ---------------------------------------------------------------------------
// Ground facts: one bit per (predicate, a, b) with colors as ids 1..6.

inline constexpr int kFactSlots = kNumPreds * 36;
using FactSet = std::bitset<kFactSlots>;

struct GroundAtom {
  Pred pred;
  Color a;
  Color b;  // == a for unary predicates

  int slot() const { return static_cast<int>(pred) * 36 + (id(a) - 1) * 6 + (id(b) - 1); }

  std::string to_string(bool next) const {
    std::string s = pred_name(pred);
    s += '(';
    s += letter(a);
    if (arity(pred) == 2) {
      s += ',';
      s += letter(b);
    }
    s += next ? ",t+1)" : ",t)";
    return s;
  }

  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

inline GroundAtom atom_from_slot(int slot) {
  const auto pred = static_cast<Pred>(slot / 36);
  const int rest = slot % 36;
  return {pred, static_cast<Color>(rest / 6 + 1), static_cast<Color>(rest % 6 + 1)};
}

// Colors that exist in the state (scene or out).
inline std::vector<Color> universe(const RelState& s) {
  std::vector<Color> u;
  for (Color c : kAllColors)
    if (s.support(c) != RelState::kAbsent) u.push_back(c);
  return u;
}

// Location facts (on/ontable/out) plus free, at one time point.
inline FactSet state_facts(const RelState& s) {
  FactSet f;
  for (Color c : kAllColors) {
    const auto sup = s.support(c);
    if (sup == RelState::kAbsent) continue;
    if (sup == RelState::kTable) f.set(GroundAtom{Pred::OnTable, c, c}.slot());
    else if (sup == RelState::kOut) f.set(GroundAtom{Pred::Out, c, c}.slot());
    else f.set(GroundAtom{Pred::On, c, static_cast<Color>(sup)}.slot());
    if (s.is_free(c)) f.set(GroundAtom{Pred::Free, c, c}.slot());
  }
  return f;
}

inline GroundAtom action_atom(const Action& a) {
  switch (a.dest.kind()) {
    case Destination::Kind::Block: return {Pred::Move, a.subject, a.dest.block()};
    case Destination::Kind::Table: return {Pred::MoveTable, a.subject, a.subject};
    case Destination::Kind::Out: return {Pred::MoveOut, a.subject, a.subject};
  }
  return {Pred::Move, a.subject, a.subject};
}

inline FactSet body_facts(const RelState& s, const Action& a) {
  FactSet f = state_facts(s);
  f.set(action_atom(a).slot());
  return f;
}

namespace detail {

inline GroundAtom ground(const Literal& l, Color x, Color y) {
  const Color a = l.a == 0 ? x : y;
  const Color b = arity(l.pred) == 2 ? (l.b == 0 ? x : y) : a;
  return {l.pred, a, b};
}

// Calls fn(x, y) for every binding with distinct constants for distinct
// variables. Clauses that never mention Y bind only X.
template <class Fn>
void for_each_binding(const Clause& c, const std::vector<Color>& u, Fn&& fn) {
  const bool two = c.uses(1);
  for (Color x : u) {
    if (!two) {
      fn(x, x);
      continue;
    }
    for (Color y : u)
      if (y != x) fn(x, y);
  }
}

}  // namespace detail

// Head atoms (at t+1) derived by one clause from body facts at t.
inline FactSet derive(const Clause& c, const FactSet& facts, const std::vector<Color>& u) {
  FactSet out;
  detail::for_each_binding(c, u, [&](Color x, Color y) {
    for (const auto& l : c.body)
      if (!facts.test(detail::ground(l, x, y).slot())) return;
    out.set(detail::ground(c.head, x, y).slot());
  });
  return out;
}

// Every head atom that can be grounded over the universe.
inline FactSet groundable_heads(const std::vector<Color>& u) {
  FactSet f;
  for (Color a : u) {
    f.set(GroundAtom{Pred::OnTable, a, a}.slot());
    f.set(GroundAtom{Pred::Out, a, a}.slot());
    for (Color b : u)
      if (a != b) f.set(GroundAtom{Pred::On, a, b}.slot());
  }
  return f;
}

// ---------------------------------------------------------------------------
// Examples

struct Transition {
  Configuration before;
  Action action;
  Configuration after;
};

struct TransitionExamples {
  RelState state;
  Action action{Color::R, Destination::table()};
  FactSet body;       // facts at t plus the action atom
  FactSet positives;  // effects not carried by inertia
  FactSet negatives;  // groundable heads false at t+1
};

struct ExampleSet {
  std::vector<TransitionExamples> items;

  std::size_t positive_count() const {
    std::size_t n = 0;
    for (const auto& e : items) n += e.positives.count();
    return n;
  }
  std::size_t negative_count() const {
    std::size_t n = 0;
    for (const auto& e : items) n += e.negatives.count();
    return n;
  }
};

// Inertia is background knowledge, so a true fact about a block other than
// the moved one is not an example either way. Everything observed true about
// the subject is positive; every groundable head atom false at t+1 is
// negative.
inline ExampleSet make_examples(const std::vector<Transition>& transitions) {
  ExampleSet ex;
  for (const auto& t : transitions) {
    TransitionExamples e;
    e.state = RelState::from(t.before);
    e.action = t.action;
    e.body = body_facts(e.state, t.action);
    const RelState after = RelState::from(t.after);
    const FactSet true_next = state_facts(after);
    const FactSet heads = groundable_heads(universe(e.state));
    for (int s = 0; s < kFactSlots; ++s) {
      if (!heads.test(static_cast<std::size_t>(s))) continue;
      const GroundAtom g = atom_from_slot(s);
      if (!true_next.test(static_cast<std::size_t>(s))) e.negatives.set(static_cast<std::size_t>(s));
      else if (g.a == t.action.subject) e.positives.set(static_cast<std::size_t>(s));
    }
    ex.items.push_back(e);
  }
  return ex;
}

// Every (state, action) step of every stored plan, deduplicated.
inline std::vector<Transition> transitions_from_records(const std::vector<PairRecord>& records) {
  std::vector<Transition> out;
  std::set<std::pair<std::uint32_t, int>> seen;
  for (const auto& r : records)
    for (const auto& p : r.plans) {
      Configuration cur = r.src;
      for (const auto& m : p.moves) {
        const Action a = m.action();
        Configuration next = apply(cur, a);
        const int akey = id(a.subject) * 8 + a.dest.index();
        if (seen.emplace(RelState::from(cur).key(), akey).second) out.push_back({cur, a, next});
        cur = std::move(next);
      }
    }
  return out;
}

// n random legal transitions from configurations with up to max_blocks blocks.
inline std::vector<Transition> random_transitions(std::size_t n, std::uint64_t seed, int max_blocks = kMaxBlocks) {
  const auto configs = enumerate_configs(max_blocks);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, configs.size() - 1);
  std::vector<Transition> out;
  while (out.size() < n) {
    const auto& c = configs[pick(rng)];
    const auto moves = legal_moves(c);
    if (moves.empty()) continue;
    const Action a = moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng)];
    out.push_back({c, a, apply(c, a)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hypothesis space

// Heads are fixed to on(X,Y), ontable(X), out(X); every other head is a
// renaming of one of these, so the list is free of renaming duplicates.
// Binary body literals use distinct variables. Order: body size, head, body.
inline std::vector<Clause> enumerate_clauses(int max_body = 2) {
  std::vector<Literal> heads{{Pred::On, 0, 1, true}, {Pred::OnTable, 0, 0, true}, {Pred::Out, 0, 0, true}};
  std::vector<Literal> lits;
  for (int p = 0; p < kNumPreds; ++p) {
    const auto pred = static_cast<Pred>(p);
    if (arity(pred) == 2) {
      lits.push_back({pred, 0, 1, false});
      lits.push_back({pred, 1, 0, false});
    } else {
      lits.push_back({pred, 0, 0, false});
      lits.push_back({pred, 1, 1, false});
    }
  }
  std::vector<Clause> out;
  for (int size = 1; size <= max_body; ++size)
    for (const auto& h : heads) {
      std::vector<std::size_t> idx(static_cast<std::size_t>(size));
      // combinations of `size` distinct literals in list order
      auto rec = [&](auto&& self, std::size_t pos, std::size_t from) -> void {
        if (pos == idx.size()) {
          Clause c{h, {}};
          for (auto i : idx) c.body.push_back(lits[i]);
          if (c.range_restricted()) out.push_back(std::move(c));
          return;
        }
        for (std::size_t i = from; i < lits.size(); ++i) {
          idx[pos] = i;
          self(self, pos + 1, i + 1);
        }
      };
      rec(rec, 0, 0);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Theories

struct Theory {
  std::vector<Clause> clauses;

  bool contains(const Clause& c) const { return std::find(clauses.begin(), clauses.end(), c) != clauses.end(); }

  // Union of all clause heads for one transition.
  FactSet derive(const RelState& s, const Action& a) const {
    const FactSet body = body_facts(s, a);
    const auto u = universe(s);
    FactSet out;
    for (const auto& c : clauses) out |= ies::derive(c, body, u);
    return out;
  }

  friend bool operator==(const Theory&, const Theory&) = default;
};

class Incomplete : public std::runtime_error {
 public:
  explicit Incomplete(std::size_t uncovered)
      : std::runtime_error("induction stalled with " + std::to_string(uncovered) + " uncovered positive examples"),
        uncovered_(uncovered) {}
  std::size_t uncovered() const { return uncovered_; }

 private:
  std::size_t uncovered_;
};

class InconsistentTheory : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// True iff the theory derives every positive and no negative example.
inline bool consistent(const Theory& th, const ExampleSet& ex) {
  for (const auto& e : ex.items) {
    const FactSet d = th.derive(e.state, e.action);
    if ((d & e.positives) != e.positives || (d & e.negatives).any()) return false;
  }
  return true;
}

// Greedy cover: take the clause that covers the most still-uncovered
// positives among those covering no negative; ties go to enumeration order.
inline Theory induce(const ExampleSet& ex, const std::vector<Clause>& space = enumerate_clauses()) {
  if (ex.positive_count() == 0) throw std::invalid_argument("induce: no positive examples");

  struct Candidate {
    const Clause* clause;
    std::vector<FactSet> covers;  // positives covered, per transition
  };
  std::vector<Candidate> candidates;
  for (const auto& c : space) {
    Candidate cand{&c, {}};
    bool clean = true;
    for (const auto& e : ex.items) {
      const FactSet d = derive(c, e.body, universe(e.state));
      if ((d & e.negatives).any()) {
        clean = false;
        break;
      }
      cand.covers.push_back(d & e.positives);
    }
    if (clean) candidates.push_back(std::move(cand));
  }

  std::vector<FactSet> uncovered;
  for (const auto& e : ex.items) uncovered.push_back(e.positives);
  std::size_t remaining = ex.positive_count();

  Theory th;
  while (remaining > 0) {
    const Candidate* best = nullptr;
    std::size_t best_gain = 0;
    for (const auto& cand : candidates) {
      std::size_t gain = 0;
      for (std::size_t i = 0; i < uncovered.size(); ++i) gain += (cand.covers[i] & uncovered[i]).count();
      if (gain > best_gain) {
        best_gain = gain;
        best = &cand;
      }
    }
    if (!best) throw Incomplete(remaining);
    th.clauses.push_back(*best->clause);
    for (std::size_t i = 0; i < uncovered.size(); ++i) uncovered[i] &= ~best->covers[i];
    remaining -= best_gain;
  }
  if (!consistent(th, ex)) throw std::logic_error("induced theory is inconsistent with its examples");
  return th;
}

inline Theory induce(const std::vector<Transition>& transitions) { return induce(make_examples(transitions)); }

// ---------------------------------------------------------------------------
// Prediction with a theory plus background inertia

// Each block keeps its location unless the theory derives a location for
// it. The moved block must receive exactly one; the result must be a
// well-formed configuration.
inline RelState predict_next(const Theory& th, const RelState& s, const Action& a) {
  if (auto err = s.check(a)) throw IllegalMove(*err, a);
  const FactSet derived = th.derive(s, a);
  RelState next = s;
  for (Color c : kAllColors) {
    if (s.support(c) == RelState::kAbsent) continue;
    std::optional<std::uint8_t> loc;
    auto set_loc = [&](std::uint8_t v) {
      if (loc && *loc != v)
        throw InconsistentTheory(std::string("conflicting locations derived for ") + letter(c));
      loc = v;
    };
    if (derived.test(GroundAtom{Pred::OnTable, c, c}.slot())) set_loc(RelState::kTable);
    if (derived.test(GroundAtom{Pred::Out, c, c}.slot())) set_loc(RelState::kOut);
    for (Color b : kAllColors)
      if (b != c && derived.test(GroundAtom{Pred::On, c, b}.slot())) set_loc(static_cast<std::uint8_t>(id(b)));
    if (!loc) {
      if (c == a.subject) throw InconsistentTheory(std::string("no location derived for moved block ") + letter(c));
      continue;
    }
    if (s.support(c) == RelState::kOut && *loc != RelState::kOut)
      throw InconsistentTheory(std::string("block ") + letter(c) + " re-enters the scene");
    next.set_support(c, *loc);
  }
  // Well-formedness: supports exist and are in scene, one block per support,
  // no cycles.
  for (Color c : kAllColors) {
    const auto sup = next.support(c);
    if (sup == RelState::kAbsent || sup == RelState::kTable || sup == RelState::kOut) continue;
    const Color below = static_cast<Color>(sup);
    if (!next.in_scene(below)) throw InconsistentTheory(std::string(1, letter(c)) + " rests on a block not in the scene");
    for (Color d : kAllColors)
      if (d != c && next.support(d) == sup)
        throw InconsistentTheory(std::string("two blocks on ") + letter(below));
    Color cur = c;
    for (int steps = 0;; ++steps) {
      const auto up = next.support(cur);
      if (up == RelState::kTable) break;
      if (up == RelState::kOut || up == RelState::kAbsent) throw InconsistentTheory("stack rests on a missing block");
      if (steps > kNumColors) throw InconsistentTheory("cyclic stack");
      cur = static_cast<Color>(up);
    }
  }
  return next;
}

inline Configuration predict_next(const Theory& th, const Configuration& cfg, const Action& a) {
  return predict_next(th, RelState::from(cfg), a).to_configuration();
}

// Planner search with the theory as transition model (memoised per run).
inline PlanResult plan_with_theory(const Theory& th, const Configuration& src, const Configuration& tgt,
                                   const PlanOptions& opts = {.horizon = std::nullopt, .max_plans = 0}) {
  std::unordered_map<std::uint64_t, RelState> memo;
  auto step = [&](const RelState& s, const Action& a) {
    const std::uint64_t k = (static_cast<std::uint64_t>(s.key()) << 8) |
                            static_cast<std::uint64_t>(id(a.subject) * 8 + a.dest.index());
    auto it = memo.find(k);
    if (it != memo.end()) return it->second;
    const RelState n = predict_next(th, s, a);
    memo.emplace(k, n);
    return n;
  };
  return search_plans(src, tgt, opts, step);
}

// ---------------------------------------------------------------------------
// Theory text: one clause per line, `head :- body1, body2.`

namespace detail {

class ClauseParser {
 public:
  explicit ClauseParser(std::string_view s) : s_(s) {}

  Clause parse() {
    Clause c;
    c.head = literal();
    skip_ws();
    expect(":-");
    do {
      skip_ws();
      c.body.push_back(literal());
      skip_ws();
    } while (accept(','));
    expect(".");
    skip_ws();
    if (pos_ != s_.size()) fail("trailing text");
    if (!is_head_pred(c.head.pred) || !c.head.next) fail("head must be on/ontable/out at t+1");
    for (const auto& l : c.body)
      if (l.next) fail("body literals must be at t");
    if (c.body.size() > 2) fail("at most two body literals");
    if (!c.range_restricted()) fail("head variable missing from body");
    return c;
  }

 private:
  Literal literal() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const auto p = pred_from_name(s_.substr(start, pos_ - start));
    if (!p) fail("unknown predicate");
    Literal l;
    l.pred = *p;
    expect("(");
    l.a = var();
    if (arity(*p) == 2) {
      expect(",");
      l.b = var();
      if (l.a == l.b) fail("binary literal needs distinct variables");
    } else {
      l.b = l.a;
    }
    expect(",");
    expect("t");
    if (accept('+')) {
      expect("1");
      l.next = true;
    }
    expect(")");
    return l;
  }

  std::uint8_t var() {
    skip_ws();
    if (accept('X')) return 0;
    if (accept('Y')) return 1;
    fail("expected variable X or Y");
  }

  void skip_ws() {
    while (pos_ < s_.size() && s_[pos_] == ' ') ++pos_;
  }
  bool accept(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) != tok) fail("expected '" + std::string(tok) + "'");
    pos_ += tok.size();
  }
  [[noreturn]] void fail(const std::string& what) { throw ParseError(pos_, what); }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Clause parse_clause(std::string_view text) { return detail::ClauseParser(text).parse(); }

inline void write_theory(std::ostream& os, const Theory& th) {
  for (const auto& c : th.clauses) os << c.to_string() << '\n';
}

inline Theory read_theory(std::istream& is) {
  Theory th;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty() || line[0] == '%') continue;
    try {
      th.clauses.push_back(parse_clause(line));
    } catch (const ParseError& e) {
      throw RecordError(n, e.what());
    }
  }
  return th;
}

inline void write_theory(const std::string& path, const Theory& th) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_theory(os, th);
}

inline Theory read_theory(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_theory(is);
}

}  // namespace ies
