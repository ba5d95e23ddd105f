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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gencs {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool all_finite() const noexcept;
  double max_abs() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// y = a·x, summed left to right along each row so results are reproducible bit for bit.
Vector matvec(const Matrix& a, std::span<const double> x);

/// y = aᵀ·x, accumulated row by row in index order.
Vector matvec_transposed(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> x);
double squared_norm(std::span<const double> x);
bool all_finite(std::span<const double> x) noexcept;

// ---------------------------------------------------------------------------
// Randomness
//
// Generator: xoshiro256** 1.0, state expanded from the 64-bit seed with
// splitmix64. Uniform doubles take the top 53 bits. Normal deviates use the
// Box-Muller transform, both outputs consumed in order (cos branch first).
// The stream is a pure function of the seed.
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Seed for the i-th child stream of `seed`. Used to hand independent
/// streams to restarts, trials and workers.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

class Rng {
public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1).
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  Vector normal_vector(std::size_t len, double stddev = 1.0);

  Rng child(std::uint64_t index) const noexcept { return Rng(derive_seed(seed_, index)); }

private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// IID N(0, variance) entries, drawn row by row.
Matrix gaussian_matrix(Rng& rng, std::size_t m, std::size_t n, double variance);

}  // namespace gencs
