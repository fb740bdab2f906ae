#pragma once

// Domain types for blocksworld scenes: colors, configurations, moves and
// the fixed-width bit encodings consumed by the sequencers.

#include <algorithm>
#include <array>
#include <bit>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ies {

inline constexpr int kNumColors = 6;
inline constexpr int kMaxBlocks = 5;
inline constexpr int kMaxMoves = 8;
inline constexpr int kMoveBits = 16;
inline constexpr int kSequenceBits = kMoveBits * kMaxMoves;

// ---------------------------------------------------------------------------
// Errors

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : std::runtime_error("parse error at " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class InvalidConfiguration : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class InconsistentEncoding : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Color

enum class Color : std::uint8_t { R = 1, G = 2, B = 3, Y = 4, O = 5, P = 6 };

inline constexpr std::array<Color, kNumColors> kAllColors = {Color::R, Color::G, Color::B,
                                                             Color::Y, Color::O, Color::P};

constexpr int id(Color c) { return static_cast<int>(c); }

// 3-bit code; 000 is reserved for "absent".
constexpr std::uint8_t code(Color c) { return static_cast<std::uint8_t>(c); }

constexpr char letter(Color c) {
  constexpr char kLetters[] = "?RGBYOP";
  return kLetters[id(c)];
}

constexpr std::optional<Color> color_from_letter(char ch) {
  switch (ch) {
    case 'R': return Color::R;
    case 'G': return Color::G;
    case 'B': return Color::B;
    case 'Y': return Color::Y;
    case 'O': return Color::O;
    case 'P': return Color::P;
    default: return std::nullopt;
  }
}

constexpr std::optional<Color> color_from_code(std::uint8_t c) {
  if (c < 1 || c > kNumColors) return std::nullopt;
  return static_cast<Color>(c);
}

// Small bitmask over the palette (bit id-1).
class ColorSet {
 public:
  constexpr ColorSet() = default;
  constexpr explicit ColorSet(std::uint8_t bits) : bits_(bits & 0x3F) {}

  constexpr bool contains(Color c) const { return (bits_ >> (id(c) - 1)) & 1U; }
  constexpr void insert(Color c) { bits_ |= static_cast<std::uint8_t>(1U << (id(c) - 1)); }
  constexpr void erase(Color c) { bits_ &= static_cast<std::uint8_t>(~(1U << (id(c) - 1))); }
  constexpr int size() const { return std::popcount(static_cast<unsigned>(bits_)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool subset_of(ColorSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr std::uint8_t bits() const { return bits_; }

  std::vector<Color> to_vector() const {
    std::vector<Color> out;
    for (Color c : kAllColors)
      if (contains(c)) out.push_back(c);
    return out;
  }

  friend constexpr bool operator==(ColorSet, ColorSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

// ---------------------------------------------------------------------------
// Destination: one of 6 colors, the table, or out of the scene.

class Destination {
 public:
  enum class Kind : std::uint8_t { Block, Table, Out };

  static constexpr Destination on(Color c) { return Destination(Kind::Block, c); }
  static constexpr Destination table() { return Destination(Kind::Table, Color::R); }
  static constexpr Destination out() { return Destination(Kind::Out, Color::R); }

  // One-hot position: colors at 0..5 (id-1), table = 6, out = 7.
  static constexpr Destination from_index(int i) {
    if (i == 6) return table();
    if (i == 7) return out();
    return on(static_cast<Color>(i + 1));
  }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_block() const { return kind_ == Kind::Block; }
  constexpr Color block() const { return block_; }

  constexpr int index() const {
    switch (kind_) {
      case Kind::Table: return 6;
      case Kind::Out: return 7;
      default: return id(block_) - 1;
    }
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::Table: return "table";
      case Kind::Out: return "out";
      default: return std::string(1, letter(block_));
    }
  }

  friend constexpr bool operator==(const Destination& a, const Destination& b) {
    return a.index() == b.index();
  }
  friend constexpr auto operator<=>(const Destination& a, const Destination& b) {
    return a.index() <=> b.index();
  }

 private:
  constexpr Destination(Kind k, Color c) : kind_(k), block_(c) {}
  Kind kind_;
  Color block_;
};

inline constexpr int kNumDestinations = 8;

// ---------------------------------------------------------------------------
// Configuration

using Stack = std::vector<Color>;  // bottom -> top

struct Configuration {
  std::vector<Stack> stacks;  // left -> right
  std::vector<Color> out;     // kept sorted by id

  Configuration() = default;
  Configuration(std::vector<Stack> s, std::vector<Color> o = {})
      : stacks(std::move(s)), out(std::move(o)) {
    std::sort(out.begin(), out.end());
  }

  int block_count() const {
    int n = 0;
    for (const auto& s : stacks) n += static_cast<int>(s.size());
    return n;
  }

  ColorSet scene_colors() const {
    ColorSet cs;
    for (const auto& s : stacks)
      for (Color c : s) cs.insert(c);
    return cs;
  }

  ColorSet out_colors() const {
    ColorSet cs;
    for (Color c : out) cs.insert(c);
    return cs;
  }

  bool empty() const { return stacks.empty() && out.empty(); }

  // Throws InvalidConfiguration on any violated invariant.
  void validate() const {
    if (static_cast<int>(stacks.size()) > kMaxBlocks)
      throw InvalidConfiguration("more than 5 stacks");
    ColorSet seen;
    auto add = [&](Color c) {
      if (id(c) < 1 || id(c) > kNumColors) throw InvalidConfiguration("unknown color");
      if (seen.contains(c))
        throw InvalidConfiguration(std::string("duplicate color ") + letter(c));
      seen.insert(c);
    };
    for (const auto& s : stacks) {
      if (s.empty()) throw InvalidConfiguration("empty stack");
      for (Color c : s) add(c);
    }
    for (Color c : out) add(c);
    if (block_count() > kMaxBlocks) throw InvalidConfiguration("more than 5 blocks on table");
    if (!std::is_sorted(out.begin(), out.end()))
      throw InvalidConfiguration("out set not sorted");
  }

  bool valid() const {
    try {
      validate();
      return true;
    } catch (const InvalidConfiguration&) {
      return false;
    }
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

// ---------------------------------------------------------------------------
// Config text: stacks "R.G|B", optional ";out=Y.O", empty scene "-".

inline std::string format_stack(const Stack& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += '.';
    out += letter(s[i]);
  }
  return out;
}

inline std::string format_config(const Configuration& cfg) {
  std::string text;
  if (cfg.stacks.empty()) {
    text = "-";
  } else {
    for (std::size_t i = 0; i < cfg.stacks.size(); ++i) {
      if (i) text += '|';
      text += format_stack(cfg.stacks[i]);
    }
  }
  if (!cfg.out.empty()) text += ";out=" + format_stack(cfg.out);
  return text;
}

namespace detail {

class ConfigParser {
 public:
  explicit ConfigParser(std::string_view text) : text_(text) {}

  Configuration parse() {
    Configuration cfg;
    if (peek() == '-') {
      ++pos_;
    } else {
      cfg.stacks.push_back(parse_colors());
      while (peek() == '|') {
        ++pos_;
        cfg.stacks.push_back(parse_colors());
      }
    }
    if (peek() == ';') {
      ++pos_;
      constexpr std::string_view kOut = "out=";
      if (text_.substr(pos_, kOut.size()) != kOut) fail("expected 'out='");
      pos_ += kOut.size();
      cfg.out = parse_colors();
    }
    if (pos_ != text_.size()) fail(std::string("unexpected character '") + text_[pos_] + "'");

    ColorSet seen;
    for (const auto& s : cfg.stacks)
      for (Color c : s) {
        if (seen.contains(c)) fail(std::string("duplicate color ") + letter(c));
        seen.insert(c);
      }
    for (Color c : cfg.out) {
      if (seen.contains(c)) fail(std::string("duplicate color ") + letter(c));
      seen.insert(c);
    }
    std::sort(cfg.out.begin(), cfg.out.end());
    if (cfg.block_count() > kMaxBlocks) fail("more than 5 blocks on table");
    return cfg;
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }

  std::vector<Color> parse_colors() {
    std::vector<Color> out;
    out.push_back(parse_color());
    while (peek() == '.') {
      ++pos_;
      out.push_back(parse_color());
    }
    return out;
  }

  Color parse_color() {
    auto c = color_from_letter(peek());
    if (!c) fail(pos_ < text_.size() ? std::string("bad color '") + text_[pos_] + "'"
                                     : std::string("unexpected end of input"));
    ++pos_;
    return *c;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Configuration parse_config(std::string_view text) {
  return detail::ConfigParser(text).parse();
}

// ---------------------------------------------------------------------------
// Canonical keys

enum class CanonicalMode { Relational, Grid };

// Stacks sorted by their text form; left-right order is erased.
inline Configuration relational_normal_form(Configuration cfg) {
  std::sort(cfg.stacks.begin(), cfg.stacks.end(),
            [](const Stack& a, const Stack& b) { return format_stack(a) < format_stack(b); });
  return cfg;
}

// The relational key is itself valid config text.
inline std::string canonical(const Configuration& cfg, CanonicalMode mode) {
  if (mode == CanonicalMode::Grid) return format_config(cfg);
  return format_config(relational_normal_form(cfg));
}

inline bool same_stacks_relational(const Configuration& a, const Configuration& b) {
  return canonical(Configuration(a.stacks), CanonicalMode::Relational) ==
         canonical(Configuration(b.stacks), CanonicalMode::Relational);
}

// ---------------------------------------------------------------------------
// Arrangement / color vectors

struct ArrangementVector {
  // grid[r][c]: row r = height (0 = table level), column c = stack index.
  std::array<std::array<std::uint8_t, kMaxBlocks>, kMaxBlocks> grid{};

  int ones() const {
    int n = 0;
    for (const auto& row : grid)
      for (auto v : row) n += v ? 1 : 0;
    return n;
  }
  friend bool operator==(const ArrangementVector&, const ArrangementVector&) = default;
};

struct ColorVector {
  std::array<std::uint8_t, kMaxBlocks> slots{};  // 3-bit codes, 0 = unused

  int nonzero() const {
    return static_cast<int>(std::count_if(slots.begin(), slots.end(), [](auto s) { return s != 0; }));
  }
  friend bool operator==(const ColorVector&, const ColorVector&) = default;
};

inline ArrangementVector encode_arrangement(const Configuration& cfg) {
  ArrangementVector arr;
  for (std::size_t c = 0; c < cfg.stacks.size() && c < kMaxBlocks; ++c)
    for (std::size_t r = 0; r < cfg.stacks[c].size() && r < kMaxBlocks; ++r) arr.grid[r][c] = 1;
  return arr;
}

inline ColorVector encode_colors(const Configuration& cfg) {
  ColorVector col;
  std::size_t slot = 0;
  for (const auto& s : cfg.stacks)
    for (Color c : s)
      if (slot < kMaxBlocks) col.slots[slot++] = code(c);
  return col;
}

inline Configuration decode_config(const ArrangementVector& arr, const ColorVector& col) {
  const int ones = arr.ones();
  if (ones != col.nonzero())
    throw InconsistentEncoding("arrangement has " + std::to_string(ones) + " blocks but color vector has " +
                               std::to_string(col.nonzero()));
  Configuration cfg;
  std::size_t slot = 0;
  bool ended = false;
  ColorSet seen;
  for (int c = 0; c < kMaxBlocks; ++c) {
    int height = 0;
    while (height < kMaxBlocks && arr.grid[height][c]) ++height;
    for (int r = height; r < kMaxBlocks; ++r)
      if (arr.grid[r][c]) throw InconsistentEncoding("floating block in column " + std::to_string(c));
    if (height == 0) {
      ended = true;
      continue;
    }
    if (ended) throw InconsistentEncoding("gap before column " + std::to_string(c));
    Stack s;
    for (int r = 0; r < height; ++r) {
      auto color = color_from_code(col.slots[slot]);
      if (!color) throw InconsistentEncoding("invalid color code in slot " + std::to_string(slot));
      if (seen.contains(*color)) throw InconsistentEncoding("repeated color code in slot " + std::to_string(slot));
      seen.insert(*color);
      s.push_back(*color);
      ++slot;
    }
    cfg.stacks.push_back(std::move(s));
  }
  for (std::size_t i = slot; i < kMaxBlocks; ++i)
    if (col.slots[i] != 0) throw InconsistentEncoding("color slots are not packed");
  return cfg;
}

// 40 input bits per configuration: 25 arrangement bits (row-major) then
// 5 slots x 3 code bits (most significant first).
inline constexpr int kConfigBits = kMaxBlocks * kMaxBlocks + kMaxBlocks * 3;

inline std::array<std::uint8_t, kConfigBits> config_bits(const Configuration& cfg) {
  std::array<std::uint8_t, kConfigBits> bits{};
  const auto arr = encode_arrangement(cfg);
  const auto col = encode_colors(cfg);
  for (int r = 0; r < kMaxBlocks; ++r)
    for (int c = 0; c < kMaxBlocks; ++c) bits[r * kMaxBlocks + c] = arr.grid[r][c];
  for (int s = 0; s < kMaxBlocks; ++s)
    for (int b = 0; b < 3; ++b) bits[25 + s * 3 + b] = (col.slots[s] >> (2 - b)) & 1U;
  return bits;
}

// ---------------------------------------------------------------------------
// Moves

struct Action {
  Color subject;
  Destination dest;

  std::string to_string() const { return std::string(1, letter(subject)) + "," + dest.to_string(); }
  friend constexpr bool operator==(const Action&, const Action&) = default;
  friend constexpr auto operator<=>(const Action& a, const Action& b) {
    if (auto c = id(a.subject) <=> id(b.subject); c != 0) return c;
    return a.dest <=> b.dest;
  }
};

struct Move {
  Color subject;
  Destination dest;
  int time = 0;

  Action action() const { return {subject, dest}; }
  bool valid() const {
    return time >= 0 && time < kMaxMoves && !(dest.is_block() && dest.block() == subject);
  }
  std::string to_string() const {
    return "move(" + std::string(1, letter(subject)) + "," + dest.to_string() + "," + std::to_string(time) + ")";
  }
  friend constexpr bool operator==(const Move&, const Move&) = default;
};

struct MoveSequence {
  std::vector<Move> moves;

  MoveSequence() = default;
  explicit MoveSequence(std::vector<Move> m) : moves(std::move(m)) {}

  static MoveSequence from_actions(std::span<const Action> actions) {
    MoveSequence seq;
    for (std::size_t i = 0; i < actions.size(); ++i)
      seq.moves.push_back({actions[i].subject, actions[i].dest, static_cast<int>(i)});
    return seq;
  }

  std::size_t size() const { return moves.size(); }
  bool empty() const { return moves.empty(); }

  bool valid() const {
    if (moves.size() > static_cast<std::size_t>(kMaxMoves)) return false;
    for (std::size_t i = 0; i < moves.size(); ++i)
      if (!moves[i].valid() || moves[i].time != static_cast<int>(i)) return false;
    return true;
  }

  std::vector<Action> actions() const {
    std::vector<Action> out;
    out.reserve(moves.size());
    for (const auto& m : moves) out.push_back(m.action());
    return out;
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < moves.size(); ++i) {
      if (i) out += ',';
      out += moves[i].to_string();
    }
    return out;
  }

  friend bool operator==(const MoveSequence&, const MoveSequence&) = default;
  friend auto operator<=>(const MoveSequence& a, const MoveSequence& b) {
    return std::lexicographical_compare_three_way(
        a.moves.begin(), a.moves.end(), b.moves.begin(), b.moves.end(),
        [](const Move& x, const Move& y) { return x.action() <=> y.action(); });
  }
};

// Parses "move(R,G,0)" atoms starting at `pos`; advances pos past the atom.
inline Move parse_move_atom(std::string_view text, std::size_t& pos) {
  auto expect = [&](std::string_view lit) {
    if (text.substr(pos, lit.size()) != lit) throw ParseError(pos, "expected '" + std::string(lit) + "'");
    pos += lit.size();
  };
  expect("move(");
  auto subject = pos < text.size() ? color_from_letter(text[pos]) : std::nullopt;
  if (!subject) throw ParseError(pos, "bad subject color");
  ++pos;
  expect(",");
  std::optional<Destination> dest;
  if (text.substr(pos, 5) == "table") {
    dest = Destination::table();
    pos += 5;
  } else if (text.substr(pos, 3) == "out") {
    dest = Destination::out();
    pos += 3;
  } else if (pos < text.size() && color_from_letter(text[pos])) {
    dest = Destination::on(*color_from_letter(text[pos]));
    ++pos;
  } else {
    throw ParseError(pos, "bad destination");
  }
  expect(",");
  const std::size_t start = pos;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  if (pos == start || pos - start > 2) throw ParseError(start, "bad time step");
  const int t = std::stoi(std::string(text.substr(start, pos - start)));
  expect(")");
  Move m{*subject, *dest, t};
  if (!m.valid()) throw ParseError(start, "invalid move " + m.to_string());
  return m;
}

// Comma-separated move atoms; empty text is the empty sequence.
inline MoveSequence parse_sequence(std::string_view text) {
  MoveSequence seq;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (!seq.moves.empty()) {
      if (text[pos] != ',') throw ParseError(pos, "expected ','");
      ++pos;
    }
    seq.moves.push_back(parse_move_atom(text, pos));
  }
  if (!seq.valid()) throw ParseError(0, "move times must be consecutive from 0 and at most 8 moves");
  return seq;
}

// ---------------------------------------------------------------------------
// Move / sequence bit encodings

using MoveBits = std::bitset<kMoveBits>;
using SequenceBits = std::bitset<kSequenceBits>;

inline MoveBits encode_move(const Move& m) {
  MoveBits bits;
  bits.set(id(m.subject) - 1);
  bits.set(8 + m.dest.index());
  return bits;
}

inline SequenceBits encode_sequence(const MoveSequence& s) {
  SequenceBits bits;
  for (std::size_t t = 0; t < s.moves.size() && t < kMaxMoves; ++t) {
    const auto mb = encode_move(s.moves[t]);
    for (int j = 0; j < kMoveBits; ++j)
      if (mb[j]) bits.set(t * kMoveBits + j);
  }
  return bits;
}

inline std::array<double, kSequenceBits> to_reals(const SequenceBits& bits) {
  std::array<double, kSequenceBits> out{};
  for (int i = 0; i < kSequenceBits; ++i) out[i] = bits[i] ? 1.0 : 0.0;
  return out;
}

// Per slot: X = argmax over positions 0..5, Y = argmax over positions 8..15
// excluding X's own block (lowest index wins ties). A slot is a move only if
// both maxima reach 0.5; decoding stops at the first slot that is not.
inline MoveSequence decode_sequence(std::span<const double, kSequenceBits> values) {
  MoveSequence seq;
  for (int t = 0; t < kMaxMoves; ++t) {
    const double* slot = values.data() + t * kMoveBits;
    int best_x = 0;
    for (int i = 1; i < kNumColors; ++i)
      if (slot[i] > slot[best_x]) best_x = i;
    int best_y = best_x == 0 ? 1 : 0;
    for (int i = best_y + 1; i < kNumDestinations; ++i)
      if (i != best_x && slot[8 + i] > slot[8 + best_y]) best_y = i;
    if (slot[best_x] < 0.5 || slot[8 + best_y] < 0.5) break;
    seq.moves.push_back({static_cast<Color>(best_x + 1), Destination::from_index(best_y), t});
  }
  return seq;
}

inline MoveSequence decode_sequence(const SequenceBits& bits) {
  const auto reals = to_reals(bits);
  return decode_sequence(std::span<const double, kSequenceBits>(reals));
}

// Hex form: bit 0 is the most significant bit of the first digit.
template <std::size_t N>
std::string to_hex(const std::bitset<N>& bits) {
  static_assert(N % 4 == 0);
  constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < N; i += 4) {
    int v = (bits[i] << 3) | (bits[i + 1] << 2) | (bits[i + 2] << 1) | bits[i + 3];
    out += kDigits[v];
  }
  return out;
}

template <std::size_t N>
std::bitset<N> from_hex(std::string_view hex) {
  static_assert(N % 4 == 0);
  if (hex.size() != N / 4) throw ParseError(0, "expected " + std::to_string(N / 4) + " hex digits");
  std::bitset<N> bits;
  for (std::size_t k = 0; k < hex.size(); ++k) {
    const char ch = hex[k];
    int v;
    if (ch >= '0' && ch <= '9') v = ch - '0';
    else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
    else throw ParseError(k, "bad hex digit");
    for (int b = 0; b < 4; ++b) bits[k * 4 + b] = (v >> (3 - b)) & 1;
  }
  return bits;
}

}  // namespace ies
