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

#include "gencs/measurement.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gencs {

// Sparsifying bases for the Lasso baselines. All are orthonormal, so the
// synthesis operator is the transpose of the analysis operator. Images use
// the channel-major layout of MeasurementOp; transforms act per channel.

enum class BasisKind { Pixel, DCT2D, DB1Wavelet2D };

struct SparsifyingBasis {
  BasisKind kind = BasisKind::Pixel;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::size_t levels = 0;  // DB1 only

  static SparsifyingBasis pixel(std::size_t n) { return {BasisKind::Pixel, 1, n, 1, 0}; }
  static SparsifyingBasis dct(std::size_t h, std::size_t w, std::size_t c) { return {BasisKind::DCT2D, h, w, c, 0}; }
  /// levels == 0 selects the deepest decomposition the image size allows.
  static SparsifyingBasis db1(std::size_t h, std::size_t w, std::size_t c, std::size_t levels = 0);

  std::size_t size() const noexcept { return height * width * channels; }

  Vector analysis(std::span<const double> x) const;
  Vector synthesis(std::span<const double> w) const;

  std::string name() const;
};

/// Largest L with both dimensions divisible by 2^L.
std::size_t max_dyadic_levels(std::size_t h, std::size_t w);

/// Orthonormal 2D DCT-II per channel.
Vector dct2(std::span<const double> image, std::size_t h, std::size_t w, std::size_t c = 1);
Vector idct2(std::span<const double> coeffs, std::size_t h, std::size_t w, std::size_t c = 1);

/// Orthonormal 2D Haar analysis, recursing on the low-pass quadrant. After
/// one level a 2×2 block [a b; c d] becomes [(a+b+c+d)/2 (a-b+c-d)/2;
/// (a+b-c-d)/2 (a-b-c+d)/2].
Vector db1_2d(std::span<const double> image, std::size_t h, std::size_t w, std::size_t c, std::size_t levels);
Vector idb1_2d(std::span<const double> coeffs, std::size_t h, std::size_t w, std::size_t c, std::size_t levels);

enum class LassoSolver { ISTA, FISTA };

struct LassoConfig {
  double shrinkage = 0.1;
  std::size_t max_iters = 5000;
  double tolerance = 1e-10;
  LassoSolver solver = LassoSolver::FISTA;
  std::size_t power_iters = 20;
};

struct LassoResult {
  Vector x_hat;
  Vector w_hat;
  std::size_t iterations = 0;
  bool converged = false;
  /// Set when max_iters ran out before the tolerance was met.
  bool warning = false;
  double objective = 0.0;
  double step = 0.0;
  std::vector<double> objective_trace;  // after every iteration
};

/// min_w ‖A·Φᵀw − y‖² + shrinkage·‖w‖₁ by proximal gradient (ISTA or FISTA)
/// with step 1/L from a power-iteration estimate of L, halved whenever the
/// sufficient-decrease test fails.
LassoResult lasso_recover(const MeasurementOp& op, std::span<const double> y, const SparsifyingBasis& basis,
                          const LassoConfig& config);

/// Largest violation of the Lasso optimality conditions at w: on the support
/// |g_i + s·sign(w_i)|, off it max(0, |g_i| − s), with g = 2Bᵀ(Bw − y).
double lasso_kkt_residual(const MeasurementOp& op, std::span<const double> y, const SparsifyingBasis& basis,
                          std::span<const double> w, double shrinkage);

double lasso_objective(const MeasurementOp& op, std::span<const double> y, const SparsifyingBasis& basis,
                       std::span<const double> w, double shrinkage);

double soft_threshold(double v, double t) noexcept;

}  // namespace gencs
