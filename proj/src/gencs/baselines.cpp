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

#include "gencs/baselines.hpp"

#include "gencs/error.hpp"

#include <cmath>
#include <numbers>

namespace gencs {

namespace {

// Row k holds the k-th orthonormal DCT-II basis vector of length n.
Matrix dct_matrix(std::size_t n) {
  Matrix d(n, n);
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) * static_cast<double>(k) /
                           (2.0 * static_cast<double>(n));
      d(k, i) = (k == 0 ? scale0 : scale) * std::cos(angle);
    }
  }
  return d;
}

void check_image(std::size_t len, std::size_t h, std::size_t w, std::size_t c, const char* what) {
  require(h >= 1 && w >= 1 && c >= 1, ErrorCode::InvalidArgument, std::string(what) + ": empty image dims");
  require(len == h * w * c, ErrorCode::DimensionMismatch,
          std::string(what) + ": got " + std::to_string(len) + " values for a " + std::to_string(c) + "x" +
              std::to_string(h) + "x" + std::to_string(w) + " image");
}

// out = L·X·Rᵀ for each h×w channel plane; with `transpose`, out = Lᵀ·X·R.
Vector separable(std::span<const double> in, std::size_t h, std::size_t w, std::size_t c, const Matrix& left,
                 const Matrix& right, bool transpose) {
  Vector out(in.size());
  Vector tmp(h * w);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* x = in.data() + ch * h * w;
    double* y = out.data() + ch * h * w;
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t k = 0; k < w; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < w; ++j) {
          acc += x[r * w + j] * (transpose ? right(j, k) : right(k, j));
        }
        tmp[r * w + k] = acc;
      }
    }
    for (std::size_t k = 0; k < h; ++k) {
      for (std::size_t col = 0; col < w; ++col) {
        double acc = 0.0;
        for (std::size_t r = 0; r < h; ++r) {
          acc += (transpose ? left(r, k) : left(k, r)) * tmp[r * w + col];
        }
        y[k * w + col] = acc;
      }
    }
  }
  return out;
}

// One Haar step along a strided line of 2·half samples.
void haar_forward_line(double* data, std::size_t half, std::size_t stride, Vector& scratch) {
  constexpr double f = std::numbers::sqrt2 / 2.0;
  scratch.resize(2 * half);
  for (std::size_t i = 0; i < half; ++i) {
    const double a = data[(2 * i) * stride];
    const double b = data[(2 * i + 1) * stride];
    scratch[i] = (a + b) * f;
    scratch[half + i] = (a - b) * f;
  }
  for (std::size_t i = 0; i < 2 * half; ++i) {
    data[i * stride] = scratch[i];
  }
}

void haar_inverse_line(double* data, std::size_t half, std::size_t stride, Vector& scratch) {
  constexpr double f = std::numbers::sqrt2 / 2.0;
  scratch.resize(2 * half);
  for (std::size_t i = 0; i < half; ++i) {
    const double s = data[i * stride];
    const double d = data[(half + i) * stride];
    scratch[2 * i] = (s + d) * f;
    scratch[2 * i + 1] = (s - d) * f;
  }
  for (std::size_t i = 0; i < 2 * half; ++i) {
    data[i * stride] = scratch[i];
  }
}

void check_levels(std::size_t h, std::size_t w, std::size_t levels) {
  const std::size_t block = std::size_t{1} << levels;
  require(h % block == 0 && w % block == 0, ErrorCode::InvalidArgument,
          "db1: " + std::to_string(h) + "x" + std::to_string(w) + " image is not divisible by 2^" +
              std::to_string(levels));
}

}  // namespace

std::size_t max_dyadic_levels(std::size_t h, std::size_t w) {
  std::size_t levels = 0;
  while (h % 2 == 0 && w % 2 == 0 && h > 1 && w > 1) {
    h /= 2;
    w /= 2;
    ++levels;
  }
  return levels;
}

Vector dct2(std::span<const double> image, std::size_t h, std::size_t w, std::size_t c) {
  check_image(image.size(), h, w, c, "dct2");
  return separable(image, h, w, c, dct_matrix(h), dct_matrix(w), false);
}

Vector idct2(std::span<const double> coeffs, std::size_t h, std::size_t w, std::size_t c) {
  check_image(coeffs.size(), h, w, c, "idct2");
  return separable(coeffs, h, w, c, dct_matrix(h), dct_matrix(w), true);
}

Vector db1_2d(std::span<const double> image, std::size_t h, std::size_t w, std::size_t c, std::size_t levels) {
  check_image(image.size(), h, w, c, "db1_2d");
  check_levels(h, w, levels);
  Vector out(image.begin(), image.end());
  Vector scratch;
  for (std::size_t ch = 0; ch < c; ++ch) {
    double* plane = out.data() + ch * h * w;
    std::size_t ch_h = h;
    std::size_t ch_w = w;
    for (std::size_t l = 0; l < levels; ++l) {
      for (std::size_t r = 0; r < ch_h; ++r) {
        haar_forward_line(plane + r * w, ch_w / 2, 1, scratch);
      }
      for (std::size_t col = 0; col < ch_w; ++col) {
        haar_forward_line(plane + col, ch_h / 2, w, scratch);
      }
      ch_h /= 2;
      ch_w /= 2;
    }
  }
  return out;
}

Vector idb1_2d(std::span<const double> coeffs, std::size_t h, std::size_t w, std::size_t c, std::size_t levels) {
  check_image(coeffs.size(), h, w, c, "idb1_2d");
  check_levels(h, w, levels);
  Vector out(coeffs.begin(), coeffs.end());
  Vector scratch;
  for (std::size_t ch = 0; ch < c; ++ch) {
    double* plane = out.data() + ch * h * w;
    for (std::size_t l = levels; l-- > 0;) {
      const std::size_t ch_h = h >> l;
      const std::size_t ch_w = w >> l;
      for (std::size_t col = 0; col < ch_w; ++col) {
        haar_inverse_line(plane + col, ch_h / 2, w, scratch);
      }
      for (std::size_t r = 0; r < ch_h; ++r) {
        haar_inverse_line(plane + r * w, ch_w / 2, 1, scratch);
      }
    }
  }
  return out;
}

SparsifyingBasis SparsifyingBasis::db1(std::size_t h, std::size_t w, std::size_t c, std::size_t levels) {
  if (levels == 0) {
    levels = max_dyadic_levels(h, w);
  }
  check_levels(h, w, levels);
  return {BasisKind::DB1Wavelet2D, h, w, c, levels};
}

Vector SparsifyingBasis::analysis(std::span<const double> x) const {
  switch (kind) {
    case BasisKind::Pixel:
      check_image(x.size(), height, width, channels, "pixel basis");
      return Vector(x.begin(), x.end());
    case BasisKind::DCT2D:
      return dct2(x, height, width, channels);
    case BasisKind::DB1Wavelet2D:
      return db1_2d(x, height, width, channels, levels);
  }
  return {};
}

Vector SparsifyingBasis::synthesis(std::span<const double> w) const {
  switch (kind) {
    case BasisKind::Pixel:
      check_image(w.size(), height, width, channels, "pixel basis");
      return Vector(w.begin(), w.end());
    case BasisKind::DCT2D:
      return idct2(w, height, width, channels);
    case BasisKind::DB1Wavelet2D:
      return idb1_2d(w, height, width, channels, levels);
  }
  return {};
}

std::string SparsifyingBasis::name() const {
  switch (kind) {
    case BasisKind::Pixel:
      return "pixel";
    case BasisKind::DCT2D:
      return "dct";
    case BasisKind::DB1Wavelet2D:
      return "db1";
  }
  return "unknown";
}

double soft_threshold(double v, double t) noexcept {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

namespace {

// B = A·Φᵀ, built row by row: row i of B is Φ applied to row i of A.
Matrix effective_matrix(const MeasurementOp& op, const SparsifyingBasis& basis) {
  require(basis.size() == op.n(), ErrorCode::DimensionMismatch,
          "lasso: basis size " + std::to_string(basis.size()) + " != operator n " + std::to_string(op.n()));
  if (basis.kind == BasisKind::Pixel) {
    return op.matrix();
  }
  Matrix b(op.m(), op.n());
  for (std::size_t r = 0; r < op.m(); ++r) {
    const Vector row = basis.analysis(op.matrix().row(r));
    std::copy(row.begin(), row.end(), b.row(r).begin());
  }
  return b;
}

Vector residual_of(const Matrix& b, std::span<const double> w, std::span<const double> y) {
  Vector r = matvec(b, w);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] -= y[i];
  }
  return r;
}

double l1(std::span<const double> w) {
  double acc = 0.0;
  for (double v : w) acc += std::abs(v);
  return acc;
}

double spectral_norm_sq(const Matrix& b, std::size_t iters) {
  Vector v(b.cols());
  // Deterministic start with no special alignment to any basis vector.
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0);
  }
  double estimate = 0.0;
  for (std::size_t it = 0; it < std::max<std::size_t>(iters, 1); ++it) {
    const double nv = norm2(v);
    if (nv == 0.0) {
      return 0.0;
    }
    for (auto& x : v) x /= nv;
    v = matvec_transposed(b, matvec(b, v));
    estimate = norm2(v);
  }
  return estimate;
}

double lasso_objective_b(const Matrix& b, std::span<const double> y, std::span<const double> w, double s) {
  return squared_norm(residual_of(b, w, y)) + s * l1(w);
}

}  // namespace

LassoResult lasso_recover(const MeasurementOp& op, std::span<const double> y, const SparsifyingBasis& basis,
                          const LassoConfig& config) {
  require(config.shrinkage > 0.0 && std::isfinite(config.shrinkage), ErrorCode::InvalidArgument,
          "lasso: shrinkage must be positive");
  require(config.tolerance > 0.0, ErrorCode::InvalidArgument, "lasso: tolerance must be positive");
  require(y.size() == op.m(), ErrorCode::DimensionMismatch, "lasso: y length != operator m");
  const Matrix b = effective_matrix(op, basis);
  const double s = config.shrinkage;
  const std::size_t n = b.cols();

  // Smooth part f(w) = ‖Bw − y‖², ∇f = 2Bᵀ(Bw − y), Lipschitz constant 2‖B‖².
  const double lipschitz = 2.0 * spectral_norm_sq(b, config.power_iters);
  double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  LassoResult out;
  Vector w(n, 0.0);
  Vector anchor = w;  // FISTA extrapolation point; equals w for ISTA
  double momentum = 1.0;

  for (std::size_t it = 0; it < config.max_iters; ++it) {
    const Vector r = residual_of(b, anchor, y);
    const double f_anchor = squared_norm(r);
    Vector grad = matvec_transposed(b, r);
    for (auto& g : grad) g *= 2.0;

    Vector next(n);
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) {
        next[i] = soft_threshold(anchor[i] - step * grad[i], step * s);
      }
      // Sufficient decrease: f(next) ≤ f(anchor) + ⟨∇f, d⟩ + ‖d‖²/(2·step).
      double lin = 0.0;
      double quad = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = next[i] - anchor[i];
        lin += grad[i] * d;
        quad += d * d;
      }
      const double f_next = squared_norm(residual_of(b, next, y));
      if (f_next <= f_anchor + lin + quad / (2.0 * step) + 1e-12 * std::max(1.0, f_anchor)) {
        break;
      }
      step *= 0.5;
    }

    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = next[i] - w[i];
      change += d * d;
    }
    change = std::sqrt(change);
    const double scale = std::max(1.0, norm2(w));

    if (config.solver == LassoSolver::FISTA) {
      const double next_momentum = (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
      const double beta = (momentum - 1.0) / next_momentum;
      for (std::size_t i = 0; i < n; ++i) {
        anchor[i] = next[i] + beta * (next[i] - w[i]);
      }
      momentum = next_momentum;
    } else {
      anchor = next;
    }
    w = std::move(next);
    out.iterations = it + 1;
    out.objective_trace.push_back(lasso_objective_b(b, y, w, s));

    if (change <= config.tolerance * scale) {
      out.converged = true;
      break;
    }
  }
  out.warning = !out.converged;
  out.step = step;
  out.objective = lasso_objective_b(b, y, w, s);
  out.x_hat = basis.synthesis(w);
  out.w_hat = std::move(w);
  return out;
}

double lasso_objective(const MeasurementOp& op, std::span<const double> y, const SparsifyingBasis& basis,
                       std::span<const double> w, double shrinkage) {
  return lasso_objective_b(effective_matrix(op, basis), y, w, shrinkage);
}

double lasso_kkt_residual(const MeasurementOp& op, std::span<const double> y, const SparsifyingBasis& basis,
                          std::span<const double> w, double shrinkage) {
  const Matrix b = effective_matrix(op, basis);
  Vector g = matvec_transposed(b, residual_of(b, w, y));
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double gi = 2.0 * g[i];
    const double v = w[i] == 0.0 ? std::max(0.0, std::abs(gi) - shrinkage)
                                 : std::abs(gi + shrinkage * (w[i] > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace gencs
