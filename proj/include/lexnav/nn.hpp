// Copyright 2026 The lexnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lexnav/error.hpp"
#include "lexnav/rng.hpp"

namespace lexnav::nn {

/// Fully connected layer. Weights are stored input-major (w[i * out + o])
/// so that forward and the weight gradient are axpy loops that skip zero
/// inputs; serialization uses the conventional out x in row-major order.
struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;
  std::vector<double> b;

  double& weight(std::size_t o, std::size_t i) { return w[i * out + o]; }
  double weight(std::size_t o, std::size_t i) const { return w[i * out + o]; }
};

/// ReLU on every hidden layer, linear output.
class DenseNet {
 public:
  DenseNet() = default;

  explicit DenseNet(std::span<const std::size_t> sizes) {
    if (sizes.size() < 2) throw UsageError("DenseNet needs at least input and output sizes");
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
      if (sizes[k] == 0 || sizes[k + 1] == 0) throw UsageError("DenseNet: zero layer size");
      layers_.push_back({sizes[k], sizes[k + 1], std::vector<double>(sizes[k] * sizes[k + 1], 0.0),
                         std::vector<double>(sizes[k + 1], 0.0)});
    }
  }

  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s{input_dim()};
    for (const auto& l : layers_) s.push_back(l.out);
    return s;
  }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.w.size() + l.b.size();
    return n;
  }

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  bool same_shape(const DenseNet& other) const { return sizes() == other.sizes(); }

  friend bool operator==(const DenseNet& a, const DenseNet& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t k = 0; k < a.layers_.size(); ++k) {
      if (a.layers_[k].w != b.layers_[k].w || a.layers_[k].b != b.layers_[k].b) return false;
    }
    return true;
  }

 private:
  std::vector<Layer> layers_;
};

/// Gradients share the network's shape.
using Gradients = DenseNet;

inline DenseNet zero_like(const DenseNet& net) {
  const auto s = net.sizes();
  return DenseNet(std::span<const std::size_t>(s));
}

/// Glorot-uniform weights, zero biases.
inline DenseNet init_net(std::span<const std::size_t> sizes, Rng& rng) {
  DenseNet net(sizes);
  for (auto& l : net.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    // Row-major draw order keeps the stream independent of storage layout.
    for (std::size_t o = 0; o < l.out; ++o) {
      for (std::size_t i = 0; i < l.in; ++i) l.weight(o, i) = uniform_real(rng, -limit, limit);
    }
  }
  return net;
}

/// Pre-activations and activations per layer, kept for backward.
struct ForwardTrace {
  std::vector<std::vector<double>> activations;  // [0] = input, [k+1] = output of layer k
};

namespace detail {

inline void layer_forward(const Layer& l, std::span<const double> x, std::vector<double>& y,
                          bool relu) {
  y.assign(l.b.begin(), l.b.end());
  for (std::size_t i = 0; i < l.in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = l.w.data() + i * l.out;
    for (std::size_t o = 0; o < l.out; ++o) y[o] += xi * row[o];
  }
  if (relu) {
    for (auto& v : y) v = v > 0.0 ? v : 0.0;
  }
}

}  // namespace detail

inline void forward(const DenseNet& net, std::span<const double> input, ForwardTrace& trace) {
  if (input.size() != net.input_dim()) {
    throw UsageError("forward: input length " + std::to_string(input.size()) + ", expected " +
                     std::to_string(net.input_dim()));
  }
  const auto& layers = net.layers();
  trace.activations.resize(layers.size() + 1);
  trace.activations[0].assign(input.begin(), input.end());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    detail::layer_forward(layers[k], trace.activations[k], trace.activations[k + 1],
                          k + 1 < layers.size());
  }
}

inline std::vector<double> forward(const DenseNet& net, std::span<const double> input) {
  ForwardTrace trace;
  forward(net, input, trace);
  return std::move(trace.activations.back());
}

/// Accumulates d(output . output_gradient)/d(params) into `grads`.
/// `trace` must come from forward() on the same net.
inline void backward(const DenseNet& net, const ForwardTrace& trace,
                     std::span<const double> output_gradient, Gradients& grads) {
  if (output_gradient.size() != net.output_dim()) {
    throw UsageError("backward: output gradient length " + std::to_string(output_gradient.size()) +
                     ", expected " + std::to_string(net.output_dim()));
  }
  if (!grads.same_shape(net)) throw UsageError("backward: gradient buffer shape mismatch");
  const auto& layers = net.layers();
  std::vector<double> delta(output_gradient.begin(), output_gradient.end());
  std::vector<double> prev;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const Layer& l = layers[k];
    Layer& g = grads.layers()[k];
    const auto& x = trace.activations[k];
    for (std::size_t o = 0; o < l.out; ++o) g.b[o] += delta[o];
    for (std::size_t i = 0; i < l.in; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      double* row = g.w.data() + i * l.out;
      for (std::size_t o = 0; o < l.out; ++o) row[o] += xi * delta[o];
    }
    if (k == 0) break;
    prev.assign(l.in, 0.0);
    for (std::size_t i = 0; i < l.in; ++i) {
      // ReLU derivative: the previous layer's activation is zero exactly
      // when its pre-activation was non-positive.
      if (x[i] <= 0.0) continue;
      const double* row = l.w.data() + i * l.out;
      double s = 0.0;
      for (std::size_t o = 0; o < l.out; ++o) s += row[o] * delta[o];
      prev[i] = s;
    }
    delta.swap(prev);
  }
}

inline Gradients backward(const DenseNet& net, std::span<const double> input,
                          std::span<const double> output_gradient) {
  ForwardTrace trace;
  forward(net, input, trace);
  Gradients grads = zero_like(net);
  backward(net, trace, output_gradient, grads);
  return grads;
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  DenseNet first_moment;
  DenseNet second_moment;
  long step = 0;

  OptimizerState() = default;
  OptimizerState(const DenseNet& net, AdamConfig cfg)
      : config(cfg), first_moment(zero_like(net)), second_moment(zero_like(net)) {}
};

inline void adam_step(DenseNet& net, const Gradients& grads, OptimizerState& opt) {
  if (!grads.same_shape(net) || !opt.first_moment.same_shape(net)) {
    throw UsageError("adam_step: shape mismatch");
  }
  ++opt.step;
  const auto& c = opt.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(opt.step));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  };
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    auto& l = net.layers()[k];
    const auto& g = grads.layers()[k];
    auto& m = opt.first_moment.layers()[k];
    auto& v = opt.second_moment.layers()[k];
    update(l.w, g.w, m.w, v.w);
    update(l.b, g.b, m.b, v.b);
  }
}

struct HuberResult {
  double loss;
  double gradient;  // d loss / d prediction
};

inline HuberResult huber(double prediction, double target, double delta = 1.0) {
  const double e = prediction - target;
  if (std::abs(e) <= delta) return {0.5 * e * e, e};
  return {delta * (std::abs(e) - 0.5 * delta), e > 0 ? delta : -delta};
}

inline constexpr const char* kNetMagic = "lexnav-net";

/// Text checkpoint: a header line `lexnav-net v1 <input_dim> <layer sizes>`,
/// then per layer `out` rows of `in` weights and one row of biases.
inline void save_net(const DenseNet& net, std::ostream& sink) {
  sink << kNetMagic << " v1";
  for (auto s : net.sizes()) sink << ' ' << s;
  sink << '\n';
  char buf[32];
  for (const auto& l : net.layers()) {
    for (std::size_t o = 0; o < l.out; ++o) {
      for (std::size_t i = 0; i < l.in; ++i) {
        std::snprintf(buf, sizeof buf, i == 0 ? "%.17g" : " %.17g", l.weight(o, i));
        sink << buf;
      }
      sink << '\n';
    }
    for (std::size_t o = 0; o < l.out; ++o) {
      std::snprintf(buf, sizeof buf, o == 0 ? "%.17g" : " %.17g", l.b[o]);
      sink << buf;
    }
    sink << "\n\n";
  }
}

inline DenseNet load_net(std::istream& source) {
  std::string header;
  while (header.empty() && std::getline(source, header)) {
  }
  std::istringstream h(header);
  std::string magic, version;
  h >> magic >> version;
  if (magic != kNetMagic) throw ParseError("not a network checkpoint: '" + header + "'");
  if (version != "v1") throw ParseError("unsupported network checkpoint version '" + version + "'");
  std::vector<std::size_t> sizes;
  std::size_t s = 0;
  while (h >> s) sizes.push_back(s);
  if (!h.eof() || sizes.size() < 2) throw ParseError("bad network checkpoint header '" + header + "'");
  DenseNet net{std::span<const std::size_t>(sizes)};
  auto read = [&](double& v) {
    std::string tok;
    if (!(source >> tok)) throw ParseError("network checkpoint truncated");
    std::size_t used = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ParseError("bad number '" + tok + "' in network checkpoint");
  };
  for (auto& l : net.layers()) {
    for (std::size_t o = 0; o < l.out; ++o) {
      for (std::size_t i = 0; i < l.in; ++i) read(l.weight(o, i));
    }
    for (auto& b : l.b) read(b);
  }
  return net;
}

}  // namespace lexnav::nn
