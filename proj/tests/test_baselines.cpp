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

#include <doctest.h>

#include "gencs/baselines.hpp"
#include "gencs/error.hpp"

#include <cmath>
#include <numbers>

using namespace gencs;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

double max_diff(const Vector& a, const Vector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Textbook orthonormal DCT-II on one axis, evaluated from the cosine formula.
double dct_basis(std::size_t k, std::size_t i, std::size_t n) {
  const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
  return scale * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * n));
}

}  // namespace

TEST_CASE("dct2 of a constant image is DC only") {
  const double v = 0.375;
  const Vector c = dct2(Vector(16, v), 4, 4);
  CHECK(c[0] == doctest::Approx(4.0 * v).epsilon(1e-14));
  for (std::size_t i = 1; i < 16; ++i) CHECK(std::abs(c[i]) <= 1e-14);
}

TEST_CASE("dct2 matches the cosine formula") {
  Rng rng(3);
  const std::size_t h = 3, w = 5;
  const Vector x = rng.normal_vector(h * w);
  const Vector c = dct2(x, h, w);
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      double s = 0.0;
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) s += dct_basis(u, i, h) * dct_basis(v, j, w) * x[i * w + j];
      CHECK(c[u * w + v] == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("dct2 is orthonormal") {
  Rng rng(4);
  for (auto [h, w, ch] : {std::tuple{4, 4, 1}, std::tuple{28, 28, 1}, std::tuple{8, 6, 3}}) {
    const Vector x = rng.normal_vector(h * w * ch);
    const Vector c = dct2(x, h, w, ch);
    CHECK(std::abs(norm2(c) - norm2(x)) <= 1e-10);
    CHECK(max_diff(idct2(c, h, w, ch), x) <= 1e-10);
  }
  CHECK(code_of([] { dct2(Vector(10), 3, 3); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("db1 2x2 hand-computed oracle") {
  const double a = 1, b = 2, c = 4, d = 7;
  const Vector out = db1_2d(Vector{a, b, c, d}, 2, 2, 1, 1);
  CHECK(out[0] == doctest::Approx((a + b + c + d) / 2));
  CHECK(out[1] == doctest::Approx((a - b + c - d) / 2));
  CHECK(out[2] == doctest::Approx((a + b - c - d) / 2));
  CHECK(out[3] == doctest::Approx((a - b - c + d) / 2));
}

TEST_CASE("db1 is orthonormal and kills constants") {
  Rng rng(5);
  for (auto [h, w, ch, levels] : {std::tuple{8, 8, 1, 3}, std::tuple{28, 28, 1, 2}, std::tuple{16, 8, 3, 2}}) {
    const Vector x = rng.normal_vector(h * w * ch);
    const Vector c = db1_2d(x, h, w, ch, levels);
    CHECK(std::abs(norm2(c) - norm2(x)) <= 1e-10);
    CHECK(max_diff(idb1_2d(c, h, w, ch, levels), x) <= 1e-10);

    const Vector k = db1_2d(Vector(h * w * ch, 2.5), h, w, ch, levels);
    // Only the coarsest LL block of each channel survives.
    const std::size_t lh = h >> levels, lw = w >> levels;
    for (std::size_t cc = 0; cc < static_cast<std::size_t>(ch); ++cc) {
      for (std::size_t r = 0; r < static_cast<std::size_t>(h); ++r) {
        for (std::size_t col = 0; col < static_cast<std::size_t>(w); ++col) {
          const double v = k[cc * h * w + r * w + col];
          if (r < lh && col < lw) {
            CHECK(v == doctest::Approx(2.5 * std::pow(2.0, levels)));
          } else {
            CHECK(std::abs(v) <= 1e-12);
          }
        }
      }
    }
  }
  CHECK(code_of([] { db1_2d(Vector(36), 6, 6, 1, 2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("db1 depth defaults to the deepest dyadic level") {
  CHECK(max_dyadic_levels(28, 28) == 2);
  CHECK(max_dyadic_levels(64, 64) == 6);
  CHECK(max_dyadic_levels(16, 8) == 3);
  CHECK(max_dyadic_levels(7, 7) == 0);
  CHECK(SparsifyingBasis::db1(28, 28, 1).levels == 2);
  CHECK(SparsifyingBasis::db1(64, 64, 3).levels == 6);
}

TEST_CASE("basis analysis and synthesis are inverse") {
  Rng rng(6);
  const SparsifyingBasis bases[] = {SparsifyingBasis::pixel(48), SparsifyingBasis::dct(4, 4, 3),
                                    SparsifyingBasis::db1(4, 4, 3)};
  for (const auto& b : bases) {
    CHECK(b.size() == 48);
    const Vector x = rng.normal_vector(48);
    CHECK(max_diff(b.synthesis(b.analysis(x)), x) <= 1e-10);
    CHECK(std::abs(norm2(b.analysis(x)) - norm2(x)) <= 1e-10);
  }
}

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-1.0, 1.0) == 0.0);
}

TEST_CASE("lasso with A = I has the closed-form prox solution") {
  // min ‖w − y‖² + s‖w‖₁ is solved by soft-thresholding y at s/2.
  Rng rng(7);
  const Vector y = rng.normal_vector(30);
  const auto op = MeasurementOp::identity(30);
  LassoConfig c;
  c.shrinkage = 0.6;
  for (auto solver : {LassoSolver::ISTA, LassoSolver::FISTA}) {
    c.solver = solver;
    const auto r = lasso_recover(op, y, SparsifyingBasis::pixel(30), c);
    CHECK(r.converged);
    for (std::size_t i = 0; i < 30; ++i) CHECK(r.x_hat[i] == doctest::Approx(soft_threshold(y[i], 0.3)).epsilon(1e-12));
  }
}

TEST_CASE("lasso with huge shrinkage returns zero") {
  Rng rng(8);
  const auto op = MeasurementOp::gaussian(1, 20, 40);
  const Vector y = rng.normal_vector(20);
  LassoConfig c;
  c.shrinkage = 1e6;
  const auto r = lasso_recover(op, y, SparsifyingBasis::pixel(40), c);
  CHECK(squared_norm(r.x_hat) == 0.0);
  CHECK(squared_norm(r.w_hat) == 0.0);
}

TEST_CASE("lasso recovers a 5-sparse vector") {
  Rng rng(9);
  Vector x(200, 0.0);
  for (int i = 0; i < 5; ++i) x[rng.next_u64() % 200] = rng.normal() + (i % 2 ? 2.0 : -2.0);
  const auto op = MeasurementOp::gaussian(10, 80, 200);
  const Vector y = op.apply(x);
  LassoConfig c;
  c.shrinkage = 1e-4;
  c.max_iters = 20000;
  const auto r = lasso_recover(op, y, SparsifyingBasis::pixel(200), c);
  Vector d = r.x_hat;
  for (std::size_t i = 0; i < 200; ++i) d[i] -= x[i];
  CHECK(norm2(d) / norm2(x) <= 1e-2);
  CHECK(r.converged);
  CHECK(lasso_kkt_residual(op, y, SparsifyingBasis::pixel(200), r.w_hat, c.shrinkage) <= 1e-6);
}

TEST_CASE("ISTA objective is monotone and FISTA ends lower") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto op = MeasurementOp::gaussian(derive_seed(seed, 1), 30, 64);
    const Vector y = rng.normal_vector(30);
    const auto basis = SparsifyingBasis::dct(8, 8, 1);
    LassoConfig c;
    c.shrinkage = 0.05;
    c.max_iters = 60;
    c.tolerance = 1e-300;
    c.solver = LassoSolver::ISTA;
    const auto ista = lasso_recover(op, y, basis, c);
    REQUIRE(ista.objective_trace.size() == 60);
    for (std::size_t i = 1; i < ista.objective_trace.size(); ++i) {
      CHECK(ista.objective_trace[i] <= ista.objective_trace[i - 1] + 1e-12);
    }
    CHECK(ista.warning);
    CHECK_FALSE(ista.converged);
    c.solver = LassoSolver::FISTA;
    const auto fista = lasso_recover(op, y, basis, c);
    CHECK(fista.objective <= ista.objective);
    CHECK(fista.objective == doctest::Approx(lasso_objective(op, y, basis, fista.w_hat, c.shrinkage)));
  }
}

TEST_CASE("lasso argument checks") {
  const auto op = MeasurementOp::identity(4);
  LassoConfig c;
  c.shrinkage = 0.0;
  CHECK(code_of([&] { lasso_recover(op, Vector(4), SparsifyingBasis::pixel(4), c); }) == ErrorCode::InvalidArgument);
  c.shrinkage = 0.1;
  CHECK(code_of([&] { lasso_recover(op, Vector(4), SparsifyingBasis::pixel(5), c); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { lasso_recover(op, Vector(3), SparsifyingBasis::pixel(4), c); }) ==
        ErrorCode::DimensionMismatch);
}
