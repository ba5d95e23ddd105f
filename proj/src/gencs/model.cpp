/*
Copyright 2026 The gencs Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "gencs/model.hpp"

#include "gencs/binary_io.hpp"
#include "gencs/error.hpp"

#include <algorithm>
#include <cmath>

namespace gencs {

Activation Activation::leaky_relu(double slope) {
  require(slope > 0.0 && slope < 1.0, ErrorCode::InvalidArgument,
          "LeakyReLU slope must lie in (0, 1), got " + std::to_string(slope));
  return {ActivationKind::LeakyReLU, slope};
}

bool Activation::piecewise_linear() const noexcept { return pieces() > 0; }

int Activation::pieces() const noexcept {
  switch (kind) {
    case ActivationKind::Identity:
      return 1;
    case ActivationKind::ReLU:
    case ActivationKind::LeakyReLU:
      return 2;
    default:
      return 0;
  }
}

double Activation::lipschitz() const noexcept {
  switch (kind) {
    case ActivationKind::Sigmoid:
      return 0.25;
    default:
      return 1.0;  // slope < 1 keeps LeakyReLU at 1
  }
}

double Activation::apply(double x) const noexcept {
  switch (kind) {
    case ActivationKind::Identity:
      return x;
    case ActivationKind::ReLU:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::LeakyReLU:
      return x > 0.0 ? x : slope * x;
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::Sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
  }
  return x;
}

double Activation::derivative(double x) const noexcept {
  switch (kind) {
    case ActivationKind::Identity:
      return 1.0;
    case ActivationKind::ReLU:
      return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::LeakyReLU:
      return x > 0.0 ? 1.0 : slope;
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

std::string Activation::name() const {
  switch (kind) {
    case ActivationKind::Identity:
      return "identity";
    case ActivationKind::ReLU:
      return "relu";
    case ActivationKind::LeakyReLU:
      return "leaky_relu";
    case ActivationKind::Tanh:
      return "tanh";
    case ActivationKind::Sigmoid:
      return "sigmoid";
  }
  return "unknown";
}

std::optional<Activation> parse_activation(const std::string& name, double slope) {
  if (name == "identity" || name == "linear") return Activation::identity();
  if (name == "relu") return Activation::relu();
  if (name == "leaky_relu" || name == "leakyrelu") return Activation::leaky_relu(slope);
  if (name == "tanh") return Activation::tanh();
  if (name == "sigmoid") return Activation::sigmoid();
  return std::nullopt;
}

GeneratorNet::GeneratorNet(std::vector<Layer> layers) : layers_(std::move(layers)) {
  require(!layers_.empty(), ErrorCode::InvalidArgument, "generator needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    const std::string tag = "layer " + std::to_string(i);
    require(l.in_dim() >= 1 && l.out_dim() >= 1, ErrorCode::DimensionInconsistency, tag + " has an empty dimension");
    require(l.bias.size() == l.out_dim(), ErrorCode::DimensionInconsistency,
            tag + ": bias length " + std::to_string(l.bias.size()) + " != out_dim " + std::to_string(l.out_dim()));
    if (i > 0) {
      require(l.in_dim() == layers_[i - 1].out_dim(), ErrorCode::DimensionInconsistency,
              tag + ": in_dim " + std::to_string(l.in_dim()) + " does not match previous out_dim " +
                  std::to_string(layers_[i - 1].out_dim()));
    }
    require(l.weights.all_finite() && all_finite(l.bias), ErrorCode::NonFinite, tag + " has non-finite parameters");
    if (l.activation.kind == ActivationKind::LeakyReLU) {
      require(l.activation.slope > 0.0 && l.activation.slope < 1.0, ErrorCode::InvalidArgument,
              tag + ": LeakyReLU slope outside (0, 1)");
    }
  }
}

std::size_t GeneratorNet::max_width() const noexcept {
  std::size_t c = input_dim();
  for (const auto& l : layers_) {
    c = std::max(c, l.out_dim());
  }
  return c;
}

GeneratorNet::Trace GeneratorNet::forward_trace(std::span<const double> z) const {
  require(z.size() == input_dim(), ErrorCode::DimensionMismatch,
          "forward: latent has " + std::to_string(z.size()) + " entries, generator expects " +
              std::to_string(input_dim()));
  Trace trace;
  trace.pre.reserve(layers_.size());
  Vector h(z.begin(), z.end());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    Vector pre = matvec(l.weights, h);
    for (std::size_t j = 0; j < pre.size(); ++j) {
      pre[j] += l.bias[j];
    }
    h.resize(pre.size());
    for (std::size_t j = 0; j < pre.size(); ++j) {
      h[j] = l.activation.apply(pre[j]);
    }
    if (!all_finite(h)) {
      fail(ErrorCode::NonFinite, "forward: non-finite activation in layer " + std::to_string(i));
    }
    trace.pre.push_back(std::move(pre));
  }
  trace.output = std::move(h);
  return trace;
}

Vector GeneratorNet::backprop(const Trace& trace, std::span<const double> cotangent) const {
  require(cotangent.size() == output_dim(), ErrorCode::DimensionMismatch,
          "vjp: cotangent has " + std::to_string(cotangent.size()) + " entries, generator output is " +
              std::to_string(output_dim()));
  Vector g(cotangent.begin(), cotangent.end());
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Layer& l = layers_[i];
    const Vector& pre = trace.pre[i];
    for (std::size_t j = 0; j < g.size(); ++j) {
      g[j] *= l.activation.derivative(pre[j]);
    }
    g = matvec_transposed(l.weights, g);
    if (!all_finite(g)) {
      fail(ErrorCode::NonFinite, "vjp: non-finite gradient in layer " + std::to_string(i));
    }
  }
  return g;
}

Vector GeneratorNet::forward(std::span<const double> z) const { return forward_trace(z).output; }

Vector GeneratorNet::vjp(std::span<const double> z, std::span<const double> cotangent) const {
  return backprop(forward_trace(z), cotangent);
}

LipschitzBound lipschitz_bound(const GeneratorNet& g) {
  LipschitzBound out;
  out.product = 1.0;
  double m_max = 0.0;
  double w_max = 0.0;
  for (const auto& l : g.layers()) {
    const double m = l.activation.lipschitz();
    const double c = static_cast<double>(std::max(l.in_dim(), l.out_dim()));
    const double w = l.weights.max_abs();
    out.per_layer.push_back(m * c * w);
    out.product *= m * c * w;
    m_max = std::max(m_max, m);
    w_max = std::max(w_max, w);
  }
  out.uniform = std::pow(m_max * static_cast<double>(g.max_width()) * w_max, static_cast<double>(g.depth()));
  return out;
}

std::vector<std::uint8_t> encode_weights(const GeneratorNet& g) {
  binary::Writer w;
  w.bytes("GENW");
  w.put<std::uint32_t>(kGenwVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.depth()));
  for (const auto& l : g.layers()) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(l.in_dim()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(l.out_dim()));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(l.activation.kind));
    w.put<float>(static_cast<float>(l.activation.slope));
    for (double v : l.weights.data()) {
      w.put<float>(static_cast<float>(v));
    }
    for (double v : l.bias) {
      w.put<float>(static_cast<float>(v));
    }
  }
  w.seal();
  return w.buffer();
}

GeneratorNet decode_weights(std::vector<std::uint8_t> bytes, const std::string& origin) {
  binary::Reader r(std::move(bytes), origin);
  r.expect_magic("GENW");
  const auto version = r.get<std::uint32_t>();
  require(version == kGenwVersion, ErrorCode::MalformedFile,
          origin + ": unsupported GENW version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  require(count >= 1, ErrorCode::MalformedFile, origin + ": zero layers");

  struct RawLayer {
    std::size_t in, out;
    Activation act;
    std::vector<double> w;
    Vector b;
  };
  std::vector<RawLayer> raw;
  std::size_t prev_out = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string tag = origin + ": layer " + std::to_string(i);
    const auto in = r.get<std::uint32_t>();
    const auto out = r.get<std::uint32_t>();
    const auto code = r.get<std::uint8_t>();
    const auto slope = r.get<float>();
    require(in >= 1 && out >= 1, ErrorCode::DimensionInconsistency, tag + " has an empty dimension");
    if (i > 0 && in != prev_out) {
      fail(ErrorCode::DimensionInconsistency, tag + ": declares " + std::to_string(in) + " -> " +
                                                  std::to_string(out) + " after a layer producing " +
                                                  std::to_string(prev_out));
    }
    if (code > static_cast<std::uint8_t>(ActivationKind::Sigmoid)) {
      fail(ErrorCode::UnsupportedActivation, tag + ": unsupported activation code " + std::to_string(code));
    }
    Activation act{static_cast<ActivationKind>(code), 0.0};
    if (act.kind == ActivationKind::LeakyReLU) {
      require(slope > 0.0f && slope < 1.0f, ErrorCode::UnsupportedActivation, tag + ": LeakyReLU slope outside (0, 1)");
      act.slope = slope;
    }
    const std::size_t n_weights = std::size_t{in} * out;
    r.need((n_weights + out) * sizeof(float));
    std::vector<double> w(n_weights);
    for (auto& v : w) {
      v = r.get<float>();
    }
    Vector b(out);
    for (auto& v : b) {
      v = r.get<float>();
    }
    raw.push_back(RawLayer{in, out, act, std::move(w), std::move(b)});
    prev_out = out;
  }
  r.verify_seal();
  // After the seal, so flipped bytes report as a checksum mismatch.
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto& l = raw[i];
    require(all_finite(l.w) && all_finite(l.b), ErrorCode::MalformedFile,
            origin + ": layer " + std::to_string(i) + " has non-finite parameters");
    layers.push_back(Layer{Matrix(l.out, l.in, std::move(l.w)), std::move(l.b), l.act});
  }
  return GeneratorNet(std::move(layers));
}

void save_weights(const GeneratorNet& g, const std::filesystem::path& path) {
  binary::write_file(path, encode_weights(g));
}

GeneratorNet load_weights(const std::filesystem::path& path) {
  return decode_weights(binary::read_file(path), path.string());
}

GeneratorNet random_net(Rng& rng, const RandomNetSpec& spec) {
  require(spec.k >= 1 && spec.n >= 1 && spec.depth >= 1 && spec.width >= 1, ErrorCode::InvalidArgument,
          "random_net: k, n, depth and width must be >= 1");
  require(spec.weight_scale > 0.0 && spec.bias_scale >= 0.0, ErrorCode::InvalidArgument,
          "random_net: weight_scale must be positive and bias_scale non-negative");
  const auto f32 = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  std::vector<Layer> layers;
  std::size_t in = spec.k;
  for (std::size_t i = 0; i < spec.depth; ++i) {
    const bool last = i + 1 == spec.depth;
    const std::size_t out = last ? spec.n : spec.width;
    const double stddev = spec.weight_scale / std::sqrt(static_cast<double>(in));
    Matrix w(out, in);
    for (auto& v : w.data()) {
      v = f32(stddev * rng.normal());
    }
    Vector b(out, 0.0);
    if (spec.bias_scale > 0.0) {
      for (auto& v : b) {
        v = f32(spec.bias_scale * rng.normal());
      }
    }
    Activation act = last ? spec.output : spec.hidden;
    act.slope = f32(act.slope);
    layers.push_back(Layer{std::move(w), std::move(b), act});
    in = out;
  }
  return GeneratorNet(std::move(layers));
}

}  // namespace gencs
