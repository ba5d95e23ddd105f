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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace gencs {

enum class MeasurementKind : std::uint8_t {
  Identity = 0,
  Gaussian = 1,
  SuperRes = 2,
  Dense = 3,
};

// Image vectors are laid out channel-major, then row-major within a channel:
// index = ch·H·W + row·W + col.
struct SuperResParams {
  std::size_t pool_h = 2;
  std::size_t pool_w = 2;
  std::size_t stride = 2;
  std::size_t height = 28;
  std::size_t width = 28;
  std::size_t channels = 1;
};

// A materialized m×n measurement matrix together with how it was produced,
// so it can be re-created from a few parameters.
class MeasurementOp {
public:
  static MeasurementOp identity(std::size_t n);
  /// Entries IID N(0, 1/m) drawn from Rng(seed).
  static MeasurementOp gaussian(std::uint64_t seed, std::size_t m, std::size_t n);
  static MeasurementOp superres(const SuperResParams& p);
  static MeasurementOp dense(Matrix a);

  MeasurementKind kind() const noexcept { return kind_; }
  std::size_t m() const noexcept { return matrix_.rows(); }
  std::size_t n() const noexcept { return matrix_.cols(); }
  const Matrix& matrix() const noexcept { return matrix_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const SuperResParams& superres_params() const noexcept { return superres_; }

  Vector apply(std::span<const double> x) const { return matvec(matrix_, x); }
  Vector apply_transposed(std::span<const double> r) const { return matvec_transposed(matrix_, r); }

  std::string describe() const;

private:
  MeasurementOp(MeasurementKind kind, Matrix matrix) : kind_(kind), matrix_(std::move(matrix)) {}

  MeasurementKind kind_;
  Matrix matrix_;
  std::uint64_t seed_ = 0;
  SuperResParams superres_{};
};

using MeasurementOpPtr = std::shared_ptr<const MeasurementOp>;

struct NoiseModel {
  /// Target √E[‖η‖²].
  double level = 0.0;
  std::uint64_t seed = 0;
};

struct Observation {
  Vector y;
  MeasurementOpPtr op;
  NoiseModel noise;
  /// Kept for evaluation only; recovery never reads these.
  std::optional<Vector> truth;
  std::optional<Vector> eta;
};

/// y = A·x* + η, with η IID N(0, level²/m) so E[‖η‖²] = level².
Observation sense(MeasurementOpPtr op, std::span<const double> x_star, const NoiseModel& noise, Rng& rng);
Observation sense(MeasurementOpPtr op, std::span<const double> x_star, const NoiseModel& noise);

/// Fraction of `draws` trials (fresh x and fresh N(0, 1/m) matrix each time)
/// where ‖Ax‖ > factor·‖x‖.
double norm_expansion_fraction(Rng& rng, std::size_t m, std::size_t n, std::size_t draws, double factor = 2.0);

// ---------------------------------------------------------------------------
// Observation files. Layout (little-endian):
//   "GOBS" | u32 version = 1 | u8 kind | u32 m | u32 n
//   kind parameters: Gaussian u64 seed; SuperRes 6×u32 (pool_h, pool_w,
//   stride, height, width, channels); Dense m·n f64 row-major; Identity none
//   f64 noise level | u64 noise seed | m f64 y
//   u8 has_truth [n f64] | u8 has_eta [m f64]
//   u64 FNV-1a-64 of every preceding byte
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kObservationVersion = 1;

std::vector<std::uint8_t> encode_observation(const Observation& obs);
Observation decode_observation(std::vector<std::uint8_t> bytes, const std::string& origin = "GOBS");
void save_observation(const Observation& obs, const std::filesystem::path& path);
Observation load_observation(const std::filesystem::path& path);

}  // namespace gencs
