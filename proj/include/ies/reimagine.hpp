#pragma once

// Detection files -> blocksworld configurations.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ies/core.hpp"
#include "ies/dataset.hpp"

namespace ies {

struct Box {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;  // pixels, y grows downward
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  friend bool operator==(const Box&, const Box&) = default;
};

struct Detection {
  std::string label;
  Box box;
  double score = 0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

using ClassMap = std::map<std::string, Color>;

// Lists the offending (upper, lower) label pairs.
class AmbiguityError : public std::runtime_error {
 public:
  using Pair = std::pair<std::string, std::string>;
  explicit AmbiguityError(std::vector<Pair> pairs)
      : std::runtime_error(describe(pairs)), pairs_(std::move(pairs)) {}
  const std::vector<Pair>& pairs() const { return pairs_; }

 private:
  static std::string describe(const std::vector<Pair>& ps) {
    std::string s = "ambiguous stacking:";
    for (const auto& [a, b] : ps) s += " " + a + " on " + b + ";";
    s.pop_back();
    return s;
  }
  std::vector<Pair> pairs_;
};

struct ReimagineOptions {
  double min_score = 0.5;
  double overlap = 0.5;  // fraction of the upper box's width
  double gap = 0.1;      // fraction of the lower box's height
  std::size_t max_detections = static_cast<std::size_t>(kMaxBlocks);
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

inline std::optional<double> parse_double(const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline bool skippable(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line.empty() || line.front() == '#';
}

}  // namespace detail

inline std::vector<Detection> load_detections(std::istream& in) {
  std::vector<Detection> dets;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (detail::skippable(line)) continue;
    auto f = detail::split_tabs(line);
    if (f.size() != 6) throw RecordError(row, "expected 6 tab-separated fields, got " + std::to_string(f.size()));
    if (f[0].empty()) throw RecordError(row, "empty label");
    double v[5];
    for (int i = 0; i < 5; ++i) {
      auto x = detail::parse_double(f[static_cast<std::size_t>(i) + 1]);
      if (!x) throw RecordError(row, "bad number '" + f[static_cast<std::size_t>(i) + 1] + "'");
      v[i] = *x;
    }
    Detection d{f[0], {v[0], v[1], v[2], v[3]}, v[4]};
    if (!(d.box.width() > 0) || !(d.box.height() > 0)) throw RecordError(row, "box has non-positive area");
    if (!(d.score >= 0 && d.score <= 1)) throw RecordError(row, "score outside [0,1]");
    dets.push_back(std::move(d));
  }
  return dets;
}

inline std::vector<Detection> load_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_detections(in);
}

inline ClassMap load_class_map(std::istream& in) {
  ClassMap map;
  std::vector<bool> used(kNumColors + 1, false);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (detail::skippable(line)) continue;
    auto f = detail::split_tabs(line);
    if (f.size() != 2 || f[0].empty()) throw RecordError(row, "expected 'label<TAB>color'");
    auto c = f[1].size() == 1 ? color_from_letter(f[1][0]) : std::nullopt;
    if (!c) throw RecordError(row, "bad color '" + f[1] + "'");
    if (map.count(f[0])) throw RecordError(row, "label '" + f[0] + "' mapped twice");
    if (used[static_cast<std::size_t>(id(*c))]) throw RecordError(row, std::string("color ") + letter(*c) + " used twice");
    used[static_cast<std::size_t>(id(*c))] = true;
    map.emplace(f[0], *c);
  }
  return map;
}

inline ClassMap load_class_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_class_map(in);
}

// Score filter, then the highest-scoring few; stable on ties.
inline std::vector<Detection> filter_detections(std::vector<Detection> dets, const ReimagineOptions& opts = {}) {
  std::erase_if(dets, [&](const Detection& d) { return d.score < opts.min_score; });
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
  if (dets.size() > opts.max_detections) dets.resize(opts.max_detections);
  return dets;
}

inline bool rests_on(const Box& a, const Box& b, const ReimagineOptions& opts = {}) {
  const double ov = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  return ov >= opts.overlap * a.width() && std::abs(a.y_max - b.y_min) <= opts.gap * b.height();
}

inline Configuration to_blocks(const std::vector<Detection>& raw, const ClassMap& map, const ReimagineOptions& opts = {}) {
  const auto dets = filter_detections(raw, opts);
  const std::size_t n = dets.size();
  std::vector<Color> color(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = map.find(dets[i].label);
    if (it == map.end()) throw std::invalid_argument("label '" + dets[i].label + "' not in class map");
    color[i] = it->second;
    for (std::size_t j = 0; j < i; ++j)
      if (color[j] == color[i]) throw std::invalid_argument("label '" + dets[i].label + "' detected twice");
  }

  std::vector<std::vector<std::size_t>> below(n), above(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && rests_on(dets[a].box, dets[b].box, opts)) {
        below[a].push_back(b);
        above[b].push_back(a);
      }

  std::vector<AmbiguityError::Pair> bad;
  auto flag = [&](std::size_t a, std::size_t b) {
    AmbiguityError::Pair p{dets[a].label, dets[b].label};
    if (std::find(bad.begin(), bad.end(), p) == bad.end()) bad.push_back(p);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (below[i].size() > 1)
      for (auto b : below[i]) flag(i, b);
    if (above[i].size() > 1)
      for (auto a : above[i]) flag(a, i);
  }
  if (!bad.empty()) throw AmbiguityError(std::move(bad));

  // now every block has at most one support and carries at most one block
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i)
    if (below[i].empty()) roots.push_back(i);
  std::stable_sort(roots.begin(), roots.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].box.x_min < dets[b].box.x_min; });

  Configuration cfg;
  std::vector<bool> placed(n, false);
  for (auto r : roots) {
    Stack s;
    for (std::size_t cur = r;;) {
      s.push_back(color[cur]);
      placed[cur] = true;
      if (above[cur].empty()) break;
      cur = above[cur].front();
    }
    cfg.stacks.push_back(std::move(s));
  }
  // whatever is left sits on a support chain that never reaches the table
  for (std::size_t i = 0; i < n; ++i)
    if (!placed[i]) flag(i, below[i].front());
  if (!bad.empty()) throw AmbiguityError(std::move(bad));
  cfg.validate();
  return cfg;
}

}  // namespace ies
