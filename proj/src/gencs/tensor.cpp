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

#include "gencs/tensor.hpp"

#include "gencs/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace gencs {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, ErrorCode::DimensionMismatch,
          "matrix data has " + std::to_string(data_.size()) + " entries, expected " +
              std::to_string(rows_ * cols_));
  require(all_finite(), ErrorCode::NonFinite, "matrix has non-finite entries");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

bool Matrix::all_finite() const noexcept { return gencs::all_finite(data_); }

double Matrix::max_abs() const noexcept {
  double best = 0.0;
  for (double v : data_) {
    best = std::max(best, std::abs(v));
  }
  return best;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), ErrorCode::DimensionMismatch,
          "matvec: matrix has " + std::to_string(a.cols()) + " columns but vector has " +
              std::to_string(x.size()) + " entries");
  Vector y(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* row = a.data().data() + r * a.cols();
    double acc = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      acc += row[c] * x[c];
    }
    y[r] = acc;
  }
  return y;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), ErrorCode::DimensionMismatch,
          "matvec_transposed: matrix has " + std::to_string(a.rows()) + " rows but vector has " +
              std::to_string(x.size()) + " entries");
  Vector y(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) {
      continue;
    }
    const double* row = a.data().data() + r * a.cols();
    for (std::size_t c = 0; c < a.cols(); ++c) {
      y[c] += row[c] * xr;
    }
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

double squared_norm(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) {
    acc += v * v;
  }
  return acc;
}

double norm2(std::span<const double> x) {
  // Scaled accumulation so huge or tiny entries do not over/underflow.
  double scale = 0.0;
  for (double v : x) {
    scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    return scale;
  }
  double acc = 0.0;
  for (double v : x) {
    const double t = v / scale;
    acc += t * t;
  }
  return scale * std::sqrt(acc);
}

bool all_finite(std::span<const double> x) noexcept {
  for (double v : x) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t state = seed ^ 0x6a09e667f3bcc909ULL;
  const std::uint64_t a = splitmix64(state);
  state = a ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  splitmix64(state);
  return splitmix64(state);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) noexcept : seed_(seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) {
    word = splitmix64(state);
  }
}

std::uint64_t Rng::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - u lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Vector Rng::normal_vector(std::size_t len, double stddev) {
  Vector v(len);
  for (auto& x : v) {
    x = stddev * normal();
  }
  return v;
}

Matrix gaussian_matrix(Rng& rng, std::size_t m, std::size_t n, double variance) {
  require(m >= 1 && n >= 1, ErrorCode::InvalidArgument, "gaussian_matrix: m and n must be >= 1");
  require(variance > 0.0 && std::isfinite(variance), ErrorCode::InvalidArgument,
          "gaussian_matrix: variance must be positive");
  const double stddev = std::sqrt(variance);
  Matrix a(m, n);
  for (auto& v : a.data()) {
    v = stddev * rng.normal();
  }
  return a;
}

}  // namespace gencs
