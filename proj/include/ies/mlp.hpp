#pragma once

// Fully connected sequencer: (source, target) encodings -> 128 independent
// sigmoid outputs, trained with binary cross-entropy and Adam.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ies/core.hpp"
#include "ies/dataset.hpp"

namespace ies {

inline constexpr int kPairInputBits = 2 * kConfigBits;  // 80
inline const std::vector<int> kDefaultMlpWidths{kPairInputBits, 512, 512, 256, 256, kSequenceBits};
inline constexpr double kBceClip = 1e-7;

struct MlpModel {
  std::vector<int> widths;
  std::vector<Eigen::MatrixXd> weights;  // layer l: widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> biases;

  std::size_t layers() const { return weights.size(); }

  static MlpModel zeros(const std::vector<int>& widths) {
    if (widths.size() < 2) throw std::invalid_argument("need at least input and output width");
    MlpModel m;
    m.widths = widths;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      m.weights.push_back(Eigen::MatrixXd::Zero(widths[l + 1], widths[l]));
      m.biases.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
    }
    return m;
  }

  // Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases.
  static MlpModel glorot(const std::vector<int>& widths, std::uint64_t seed) {
    MlpModel m = zeros(widths);
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < m.layers(); ++l) {
      const double limit = std::sqrt(6.0 / static_cast<double>(widths[l] + widths[l + 1]));
      std::uniform_real_distribution<double> dist(-limit, limit);
      auto& w = m.weights[l];
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
    return m;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layers(); ++l) n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    return n;
  }

  // Flat view in checkpoint order: per layer, W row-major then b.
  double& parameter(std::size_t i) {
    for (std::size_t l = 0; l < layers(); ++l) {
      const auto nw = static_cast<std::size_t>(weights[l].size());
      if (i < nw) {
        const auto cols = static_cast<std::size_t>(weights[l].cols());
        return weights[l](static_cast<Eigen::Index>(i / cols), static_cast<Eigen::Index>(i % cols));
      }
      i -= nw;
      const auto nb = static_cast<std::size_t>(biases[l].size());
      if (i < nb) return biases[l](static_cast<Eigen::Index>(i));
      i -= nb;
    }
    throw std::out_of_range("parameter index");
  }
  double parameter(std::size_t i) const { return const_cast<MlpModel*>(this)->parameter(i); }

  friend bool operator==(const MlpModel& a, const MlpModel& b) {
    if (a.widths != b.widths) return false;
    for (std::size_t l = 0; l < a.layers(); ++l)
      if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Encodings

inline Eigen::VectorXd encode_pair(const Configuration& src, const Configuration& tgt) {
  Eigen::VectorXd x(kPairInputBits);
  const auto a = config_bits(src), b = config_bits(tgt);
  for (int i = 0; i < kConfigBits; ++i) {
    x(i) = a[static_cast<std::size_t>(i)];
    x(kConfigBits + i) = b[static_cast<std::size_t>(i)];
  }
  return x;
}

// Training target: the first stored plan (planner order); zeros for
// unreachable pairs.
inline Eigen::VectorXd encode_target(const PairRecord& r) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(kSequenceBits);
  if (r.plans.empty()) return y;
  const auto bits = encode_sequence(r.plans.front());
  for (int i = 0; i < kSequenceBits; ++i) y(i) = bits[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  return y;
}

struct TrainingSet {
  Eigen::MatrixXd inputs;   // in x N
  Eigen::MatrixXd targets;  // out x N

  std::size_t size() const { return static_cast<std::size_t>(inputs.cols()); }

  static TrainingSet from_records(const std::vector<PairRecord>& records) {
    TrainingSet ts;
    ts.inputs.resize(kPairInputBits, static_cast<Eigen::Index>(records.size()));
    ts.targets.resize(kSequenceBits, static_cast<Eigen::Index>(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i) {
      ts.inputs.col(static_cast<Eigen::Index>(i)) = encode_pair(records[i].src, records[i].tgt);
      ts.targets.col(static_cast<Eigen::Index>(i)) = encode_target(records[i]);
    }
    return ts;
  }
};

// ---------------------------------------------------------------------------
// Forward / loss

namespace detail {

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

struct ForwardTrace {
  std::vector<Eigen::MatrixXd> pre;  // z per layer
  std::vector<Eigen::MatrixXd> act;  // act[0] = input, act[l+1] = output of layer l
};

inline ForwardTrace forward_trace(const MlpModel& m, const Eigen::MatrixXd& x) {
  ForwardTrace tr;
  tr.act.push_back(x);
  for (std::size_t l = 0; l < m.layers(); ++l) {
    Eigen::MatrixXd z = m.weights[l] * tr.act.back();
    z.colwise() += m.biases[l];
    tr.pre.push_back(z);
    if (l + 1 == m.layers()) tr.act.push_back(sigmoid(z));
    else tr.act.push_back(z.cwiseMax(0.0));
  }
  return tr;
}

// Mean over outputs and columns of clipped binary cross-entropy.
inline double bce(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y) {
  double total = 0.0;
  for (Eigen::Index c = 0; c < p.cols(); ++c)
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      const double q = std::clamp(p(r, c), kBceClip, 1.0 - kBceClip);
      total -= y(r, c) * std::log(q) + (1.0 - y(r, c)) * std::log(1.0 - q);
    }
  return total / static_cast<double>(p.size());
}

struct Gradients {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

inline Gradients backward(const MlpModel& m, const ForwardTrace& tr, const Eigen::MatrixXd& y) {
  Gradients g;
  g.w.resize(m.layers());
  g.b.resize(m.layers());
  const Eigen::MatrixXd& p = tr.act.back();
  const double scale = 1.0 / static_cast<double>(p.size());
  // d loss / d z for sigmoid + clipped BCE: (p - y), zero where clipped.
  Eigen::MatrixXd delta(p.rows(), p.cols());
  for (Eigen::Index c = 0; c < p.cols(); ++c)
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      const double v = p(r, c);
      delta(r, c) = (v < kBceClip || v > 1.0 - kBceClip) ? 0.0 : (v - y(r, c)) * scale;
    }
  for (std::size_t l = m.layers(); l-- > 0;) {
    g.w[l] = delta * tr.act[l].transpose();
    g.b[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = m.weights[l].transpose() * delta;
    delta = back.cwiseProduct(tr.pre[l - 1].unaryExpr([](double z) { return z > 0.0 ? 1.0 : 0.0; }));
  }
  return g;
}

}  // namespace detail

inline Eigen::VectorXd forward(const MlpModel& m, const Eigen::VectorXd& input) {
  return detail::forward_trace(m, input).act.back().col(0);
}

inline double bce_loss(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty()) throw std::invalid_argument("bce_loss: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double q = std::clamp(pred[i], kBceClip, 1.0 - kBceClip);
    total -= truth[i] * std::log(q) + (1.0 - truth[i]) * std::log(1.0 - q);
  }
  return total / static_cast<double>(pred.size());
}

inline MoveSequence predict(const MlpModel& m, const Configuration& src, const Configuration& tgt) {
  const Eigen::VectorXd out = forward(m, encode_pair(src, tgt));
  std::array<double, kSequenceBits> v{};
  for (int i = 0; i < kSequenceBits; ++i) v[static_cast<std::size_t>(i)] = out(i);
  return decode_sequence(std::span<const double, kSequenceBits>(v));
}

// ---------------------------------------------------------------------------
// Training

struct MlpTrainOptions {
  int epochs = 30;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch = 64;
  std::uint64_t seed = 0;  // shuffling order
  std::optional<double> stop_loss;  // stop once an epoch's mean loss is at or below this
};

struct MlpTrainResult {
  std::vector<double> loss_curve;  // mean training loss per epoch
};

inline MlpTrainResult train(MlpModel& m, const TrainingSet& data, const MlpTrainOptions& opts) {
  MlpTrainResult result;
  const std::size_t n = data.size();
  if (n == 0 || opts.epochs <= 0) return result;

  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  for (std::size_t l = 0; l < m.layers(); ++l) {
    mw.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
    vw.push_back(mw.back());
    mb.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
    vb.push_back(mb.back());
  }

  std::mt19937_64 rng(opts.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  long step = 0;
  const std::size_t batch = std::max<std::size_t>(1, opts.batch);

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      Eigen::MatrixXd x(data.inputs.rows(), static_cast<Eigen::Index>(len));
      Eigen::MatrixXd y(data.targets.rows(), static_cast<Eigen::Index>(len));
      for (std::size_t k = 0; k < len; ++k) {
        x.col(static_cast<Eigen::Index>(k)) = data.inputs.col(static_cast<Eigen::Index>(order[start + k]));
        y.col(static_cast<Eigen::Index>(k)) = data.targets.col(static_cast<Eigen::Index>(order[start + k]));
      }
      const auto tr = detail::forward_trace(m, x);
      epoch_loss += detail::bce(tr.act.back(), y) * static_cast<double>(len);
      const auto g = detail::backward(m, tr, y);

      ++step;
      const double c1 = 1.0 - std::pow(opts.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(opts.beta2, static_cast<double>(step));
      auto adam = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
        mom = opts.beta1 * mom + (1.0 - opts.beta1) * grad;
        vel = opts.beta2 * vel + (1.0 - opts.beta2) * grad.cwiseProduct(grad);
        param.array() -= opts.lr * (mom.array() / c1) / ((vel.array() / c2).sqrt() + opts.adam_eps);
      };
      for (std::size_t l = 0; l < m.layers(); ++l) {
        adam(m.weights[l], mw[l], vw[l], g.w[l]);
        adam(m.biases[l], mb[l], vb[l], g.b[l]);
      }
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(n));
    if (opts.stop_loss && result.loss_curve.back() <= *opts.stop_loss) break;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Gradient check

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_parameter = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // perturbation crossed a ReLU kink
  std::vector<std::size_t> failing;  // parameters above the tolerance
};

// Central differences (step h) against backprop for every parameter.
// Relative error is |a - n| / max(|a|, |n|, 1e-6). Parameters whose +-h
// perturbation flips any ReLU (|z| within reach of the kink) are skipped.
inline GradCheckResult grad_check(const MlpModel& model, const Eigen::VectorXd& input, const Eigen::VectorXd& truth,
                                  double h = 1e-5, double tolerance = 1e-4) {
  MlpModel m = model;
  auto pattern = [](const detail::ForwardTrace& tr) {
    std::vector<bool> p;
    for (std::size_t l = 0; l + 1 < tr.pre.size(); ++l)
      for (Eigen::Index i = 0; i < tr.pre[l].size(); ++i) p.push_back(tr.pre[l](i) > 0.0);
    return p;
  };
  const auto base = detail::forward_trace(m, input);
  const auto base_pattern = pattern(base);
  const auto g = detail::backward(m, base, truth);

  std::vector<double> analytic;
  for (std::size_t l = 0; l < m.layers(); ++l) {
    for (Eigen::Index r = 0; r < g.w[l].rows(); ++r)
      for (Eigen::Index c = 0; c < g.w[l].cols(); ++c) analytic.push_back(g.w[l](r, c));
    for (Eigen::Index r = 0; r < g.b[l].size(); ++r) analytic.push_back(g.b[l](r));
  }

  GradCheckResult res;
  for (std::size_t i = 0; i < m.parameter_count(); ++i) {
    double& p = m.parameter(i);
    const double orig = p;
    p = orig + h;
    const auto plus = detail::forward_trace(m, input);
    p = orig - h;
    const auto minus = detail::forward_trace(m, input);
    p = orig;
    if (pattern(plus) != base_pattern || pattern(minus) != base_pattern) {
      ++res.skipped;
      continue;
    }
    const double numeric = (detail::bce(plus.act.back(), truth) - detail::bce(minus.act.back(), truth)) / (2.0 * h);
    const double a = analytic[i];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    ++res.checked;
    if (rel > tolerance) res.failing.push_back(i);
    if (rel > res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst_parameter = i;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Checkpoint: "IESM" magic, u32 version, u32 width count, u32 widths, then
// every parameter (checkpoint order) as a little-endian IEEE-754 double.

class CheckpointError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class T>
void write_le(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw CheckpointError("truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace detail

inline constexpr std::uint32_t kMlpCheckpointVersion = 1;

inline void save_mlp(std::ostream& os, const MlpModel& m) {
  os.write("IESM", 4);
  detail::write_le<std::uint32_t>(os, kMlpCheckpointVersion);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.widths.size()));
  for (int w : m.widths) detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(w));
  for (std::size_t i = 0; i < m.parameter_count(); ++i) detail::write_le<double>(os, m.parameter(i));
}

inline MlpModel load_mlp(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "IESM", 4) != 0) throw CheckpointError("bad checkpoint magic");
  const auto version = detail::read_le<std::uint32_t>(is);
  if (version != kMlpCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const auto count = detail::read_le<std::uint32_t>(is);
  if (count < 2 || count > 64) throw CheckpointError("bad layer count");
  std::vector<int> widths;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto w = detail::read_le<std::uint32_t>(is);
    if (w == 0 || w > (1U << 16)) throw CheckpointError("bad layer width");
    widths.push_back(static_cast<int>(w));
  }
  MlpModel m = MlpModel::zeros(widths);
  for (std::size_t i = 0; i < m.parameter_count(); ++i) m.parameter(i) = detail::read_le<double>(is);
  if (is.peek() != std::char_traits<char>::eof()) throw CheckpointError("trailing bytes in checkpoint");
  return m;
}

inline void save_mlp(const std::string& path, const MlpModel& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot open " + path);
  save_mlp(os, m);
}

inline MlpModel load_mlp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open " + path);
  return load_mlp(is);
}

}  // namespace ies
