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

#pragma once

#include "gencs/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gencs {

// Codes are the GENW activation byte.
enum class ActivationKind : std::uint8_t {
  Identity = 0,
  ReLU = 1,
  LeakyReLU = 2,
  Tanh = 3,
  Sigmoid = 4,
};

struct Activation {
  ActivationKind kind = ActivationKind::Identity;
  double slope = 0.0;  // LeakyReLU only, in (0, 1)

  static Activation identity() { return {ActivationKind::Identity, 0.0}; }
  static Activation relu() { return {ActivationKind::ReLU, 0.0}; }
  static Activation leaky_relu(double slope);
  static Activation tanh() { return {ActivationKind::Tanh, 0.0}; }
  static Activation sigmoid() { return {ActivationKind::Sigmoid, 0.0}; }

  /// ReLU, LeakyReLU and Identity: at most two linear pieces.
  bool piecewise_linear() const noexcept;
  /// Number of linear pieces; 0 for smooth activations.
  int pieces() const noexcept;
  double lipschitz() const noexcept;

  double apply(double x) const noexcept;
  /// Derivative at x. Kinks at exactly 0 take the inactive branch.
  double derivative(double x) const noexcept;

  std::string name() const;

  friend bool operator==(const Activation&, const Activation&) = default;
};

std::optional<Activation> parse_activation(const std::string& name, double slope = 0.2);

struct Layer {
  Matrix weights;  // out × in
  Vector bias;     // out
  Activation activation;

  std::size_t in_dim() const noexcept { return weights.cols(); }
  std::size_t out_dim() const noexcept { return weights.rows(); }

  friend bool operator==(const Layer&, const Layer&) = default;
};

// G: R^k -> R^n as a stack of affine layers, each followed by a pointwise
// activation. Immutable once built; forward and vjp are safe to call from
// many threads.
class GeneratorNet {
public:
  explicit GeneratorNet(std::vector<Layer> layers);

  std::size_t input_dim() const noexcept { return layers_.front().in_dim(); }
  std::size_t output_dim() const noexcept { return layers_.back().out_dim(); }
  std::size_t depth() const noexcept { return layers_.size(); }
  /// Largest layer width, counting the input.
  std::size_t max_width() const noexcept;
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  Vector forward(std::span<const double> z) const;

  /// Jᵀ·cotangent with J = ∂G/∂z at z.
  Vector vjp(std::span<const double> z, std::span<const double> cotangent) const;

  struct Trace {
    std::vector<Vector> pre;  // pre-activations per layer
    Vector output;
  };

  /// Forward pass keeping the pre-activations; pair with backprop() to get
  /// value and gradient from a single evaluation.
  Trace forward_trace(std::span<const double> z) const;
  Vector backprop(const Trace& trace, std::span<const double> cotangent) const;

  friend bool operator==(const GeneratorNet&, const GeneratorNet&) = default;

private:
  std::vector<Layer> layers_;
};

struct LipschitzBound {
  std::vector<double> per_layer;  // M_i · c_i · w_max,i
  double product = 0.0;           // ∏ per_layer
  double uniform = 0.0;           // (M c w_max)^d with global maxima
};

/// Per-layer factor uses c_i = max(in_i, out_i), which dominates ‖W_i‖₂.
LipschitzBound lipschitz_bound(const GeneratorNet& g);

// ---------------------------------------------------------------------------
// GENW weight files. Layout (little-endian):
//   "GENW" | u32 version = 1 | u32 layer_count
//   per layer: u32 in_dim | u32 out_dim | u8 activation | f32 leaky_slope
//              | out_dim*in_dim f32 weights (row-major) | out_dim f32 biases
//   u64 FNV-1a-64 of every preceding byte, magic included
// Values are stored as f32; nets with f32-representable parameters round-trip
// bit-exactly.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kGenwVersion = 1;

std::vector<std::uint8_t> encode_weights(const GeneratorNet& g);
GeneratorNet decode_weights(std::vector<std::uint8_t> bytes, const std::string& origin = "GENW");
void save_weights(const GeneratorNet& g, const std::filesystem::path& path);
GeneratorNet load_weights(const std::filesystem::path& path);

struct RandomNetSpec {
  std::size_t k = 5;
  std::size_t n = 256;
  std::size_t depth = 2;
  std::size_t width = 32;
  Activation hidden = Activation::relu();
  Activation output = Activation::identity();
  /// Weights ~ N(0, (weight_scale)² / fan_in).
  double weight_scale = std::sqrt(2.0);
  /// Biases ~ N(0, bias_scale²); 0 gives a bias-free net.
  double bias_scale = 0.1;
};

/// Parameters are rounded to f32 so the net survives a GENW round trip.
GeneratorNet random_net(Rng& rng, const RandomNetSpec& spec);

}  // namespace gencs
