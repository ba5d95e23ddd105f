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

#include "gencs/error.hpp"
#include "gencs/recovery.hpp"

#include <cmath>

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

MeasurementOpPtr share(MeasurementOp op) { return std::make_shared<const MeasurementOp>(std::move(op)); }

GeneratorNet identity_net(std::size_t n) {
  return GeneratorNet({Layer{Matrix::identity(n), Vector(n, 0.0), Activation::identity()}});
}

struct Instance {
  GeneratorNet g;
  Observation obs;
};

Instance in_range(std::uint64_t seed, std::size_t m, double noise, RandomNetSpec spec = {}) {
  Rng rng(seed);
  auto g = random_net(rng, spec);
  const Vector x = g.forward(rng.normal_vector(spec.k));
  auto obs = sense(share(MeasurementOp::gaussian(derive_seed(seed, 1), m, spec.n)), x,
                   NoiseModel{noise, derive_seed(seed, 2)});
  return {std::move(g), std::move(obs)};
}

}  // namespace

TEST_CASE("loss: identity generator and op, y = 0") {
  const auto g = identity_net(3);
  const auto op = MeasurementOp::identity(3);
  const Vector z{1, -2, 0.5};
  const auto e = loss(g, op, Vector(3, 0.0), z, 0.0);
  CHECK(e.value == squared_norm(z));
  CHECK(e.grad == Vector{2, -4, 1});
  CHECK(e.measurement_error == e.value);
}

TEST_CASE("loss: z = 0 with a regularizer") {
  const auto g = identity_net(3);
  const auto op = MeasurementOp::identity(3);
  const Vector y{1, 2, -3};
  const auto e = loss(g, op, y, Vector(3, 0.0), 0.7);
  CHECK(e.value == squared_norm(y));
  CHECK(e.grad == Vector{-2, -4, 6});
}

TEST_CASE("loss gradient matches finite differences") {
  Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    const auto g = random_net(rng, {4, 30, 3, 12, Activation::tanh(), Activation::identity(), 1.3, 0.2});
    const auto op = MeasurementOp::gaussian(derive_seed(31, t), 10, 30);
    const Vector y = rng.normal_vector(10);
    const Vector z = rng.normal_vector(4);
    const double lambda = 0.05 * t;
    const auto e = loss(g, op, y, z, lambda);
    const double h = 1e-6;
    Vector diff(4);
    for (std::size_t i = 0; i < 4; ++i) {
      Vector zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double fd = (loss(g, op, y, zp, lambda).value - loss(g, op, y, zm, lambda).value) / (2 * h);
      diff[i] = fd - e.grad[i];
    }
    CHECK(norm2(diff) <= 1e-6 * std::max(1.0, norm2(e.grad)));
  }
}

TEST_CASE("loss dimension checks") {
  const auto g = identity_net(3);
  CHECK(code_of([&] { loss(g, MeasurementOp::identity(4), Vector(4), Vector(3), 0.0); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { loss(g, MeasurementOp::identity(3), Vector(2), Vector(3), 0.0); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("config validation and profiles") {
  RecoveryConfig c;
  CHECK(c.adam_beta1 == 0.9);
  CHECK(c.adam_beta2 == 0.999);
  CHECK(c.adam_eps == 1e-8);
  CHECK(c.lambda == 0.0);
  const auto mnist = RecoveryConfig::mnist_profile();
  CHECK(mnist.lambda == 0.1);
  CHECK(mnist.restarts == 10);
  CHECK(mnist.steps_per_restart == 1000);
  const auto celeba = RecoveryConfig::celeba_profile();
  CHECK(celeba.lambda == 0.001);
  CHECK(celeba.restarts == 2);
  CHECK(celeba.steps_per_restart == 500);

  auto bad = c;
  bad.learning_rate = 0.0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
  bad = c;
  bad.restarts = 0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
  bad = c;
  bad.adam_beta1 = 1.0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
  bad = c;
  bad.lambda = -1.0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
  bad = c;
  bad.latent_constraint = LatentBallConstraint{0.0};
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("recover: convex identity case") {
  const auto g = identity_net(4);
  const Vector x{0.3, -1.2, 2.0, 0.7};
  const auto obs = sense(share(MeasurementOp::identity(4)), x, NoiseModel{0.0, 0});
  RecoveryConfig c;
  c.restarts = 3;
  const auto r = recover(g, obs, c);
  REQUIRE(r.reconstruction_error.has_value());
  CHECK(*r.reconstruction_error <= 1e-8);
  CHECK(r.per_restart_trace.size() == 3);
  CHECK(r.measurement_error == doctest::Approx(r.eps_hat * r.eps_hat).epsilon(1e-12));
  CHECK(r.x_hat == g.forward(r.z_hat));
}

TEST_CASE("recover: in-range instance, descent sanity and determinism") {
  auto inst = in_range(5, 50, 0.0);
  RecoveryConfig c;
  c.restarts = 4;
  c.steps_per_restart = 600;
  c.seed = 3;
  const auto a = recover(inst.g, inst.obs, c);
  for (const auto& t : a.per_restart_trace) {
    CHECK_FALSE(t.aborted);
    CHECK(t.final_loss <= t.initial_loss);
  }
  c.workers = 4;
  const auto b = recover(inst.g, inst.obs, c);
  CHECK(a.z_hat == b.z_hat);
  CHECK(a.x_hat == b.x_hat);
  CHECK(a.best_restart == b.best_restart);
  CHECK(a.measurement_error == b.measurement_error);
  // The reported restart is the first one attaining the minimum.
  double best = INFINITY;
  std::size_t first = 0;
  for (const auto& t : a.per_restart_trace) {
    if (t.measurement_error < best) {
      best = t.measurement_error;
      first = t.index;
    }
  }
  CHECK(a.best_restart == first);
}

TEST_CASE("recover: ties go to the lowest restart index") {
  // G(z) = relu(z) with y = 0: every restart starting at z < 0 has exactly zero error.
  const auto g = GeneratorNet({Layer{Matrix::identity(1), Vector{0.0}, Activation::relu()}});
  const auto obs = sense(share(MeasurementOp::identity(1)), Vector{0.0}, NoiseModel{0.0, 0});
  RecoveryConfig c;
  c.restarts = 8;
  c.steps_per_restart = 50;
  c.seed = 1;
  const auto r = recover(g, obs, c);
  std::size_t first_zero = 8;
  for (const auto& t : r.per_restart_trace) {
    if (t.measurement_error == 0.0 && first_zero == 8) first_zero = t.index;
  }
  REQUIRE(first_zero < 8);
  CHECK(r.best_restart == first_zero);
}

TEST_CASE("recover: latent ball projection") {
  auto inst = in_range(8, 30, 0.0);
  RecoveryConfig c;
  c.restarts = 2;
  c.steps_per_restart = 200;
  c.latent_constraint = LatentBallConstraint{0.5};
  const auto r = recover(inst.g, inst.obs, c);
  CHECK(norm2(r.z_hat) <= 0.5 * (1.0 + 1e-12));
}

TEST_CASE("recover: uniform init is supported and seeded") {
  auto inst = in_range(9, 30, 0.0);
  RecoveryConfig c;
  c.restarts = 2;
  c.steps_per_restart = 100;
  c.init = LatentInit::Uniform;
  CHECK(recover(inst.g, inst.obs, c).z_hat == recover(inst.g, inst.obs, c).z_hat);
}

TEST_CASE("recover: a larger lambda never grows the latent norm") {
  auto inst = in_range(21, 100, 0.1, {20, 784, 2, 64, Activation::relu(), Activation::identity(), std::sqrt(2.0), 0.1});
  RecoveryConfig c;
  c.restarts = 3;
  c.steps_per_restart = 500;
  c.learning_rate = 0.05;
  c.seed = 4;
  double prev = INFINITY;
  for (double lambda : {0.0, 0.01, 0.1, 1.0}) {
    c.lambda = lambda;
    const double norm = norm2(recover(inst.g, inst.obs, c).z_hat);
    CHECK(norm <= prev * (1.0 + 1e-9));
    prev = norm;
  }
}

TEST_CASE("recover: non-finite restarts are aborted, others continue") {
  // G(z) = 1e200·relu(z): positive starts overflow, negative starts are flat.
  const auto g = GeneratorNet({Layer{Matrix(1, 1, {1e200}), Vector{0.0}, Activation::relu()}});
  const auto obs = sense(share(MeasurementOp::identity(1)), Vector{0.0}, NoiseModel{0.0, 0});
  RecoveryConfig c;
  c.restarts = 16;
  c.steps_per_restart = 5;
  const auto r = recover(g, obs, c);
  std::size_t aborted = 0;
  for (const auto& t : r.per_restart_trace) {
    if (t.aborted) {
      ++aborted;
      CHECK_FALSE(t.abort_reason.empty());
    }
  }
  CHECK(aborted > 0);
  CHECK(aborted < 16);
  CHECK_FALSE(r.per_restart_trace[r.best_restart].aborted);

  const auto huge = GeneratorNet({Layer{Matrix(1, 1, {1e200}), Vector{1e200}, Activation::identity()}});
  CHECK(code_of([&] { recover(huge, obs, c); }) == ErrorCode::AllRestartsFailed);
}

TEST_CASE("recover: dimension mismatch") {
  const auto obs = sense(share(MeasurementOp::identity(3)), Vector(3, 1.0), NoiseModel{0.0, 0});
  CHECK(code_of([&] { recover(identity_net(4), obs, RecoveryConfig{}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("bound check: exact noiseless recovery passes") {
  auto inst = in_range(5, 50, 0.0);
  RecoveryConfig c;
  c.restarts = 4;
  c.steps_per_restart = 1000;
  const auto r = recover(inst.g, inst.obs, c);
  const auto check = theorem_bound_check(r, inst.obs);
  CHECK(check.status != BoundStatus::Fail);
  CHECK(check.eta_norm == 0.0);
  CHECK(check.rhs == doctest::Approx(2.0 * r.eps_hat));
}

TEST_CASE("bound check: noisy recovery") {
  auto inst = in_range(6, 50, 0.1);
  RecoveryConfig c;
  c.restarts = 4;
  const auto r = recover(inst.g, inst.obs, c);
  const auto check = theorem_bound_check(r, inst.obs);
  CHECK(check.eta_norm == doctest::Approx(norm2(*inst.obs.eta)).epsilon(1e-9));
  CHECK(check.lhs <= check.rhs);
  CHECK(check.margin == doctest::Approx(check.rhs - check.lhs));
  CHECK(check.status == BoundStatus::Pass);
}

TEST_CASE("bound check: unoptimized z reports a large eps_hat instead of failing") {
  auto inst = in_range(7, 50, 0.0);
  Rng rng(1);
  RecoveryResult bad;
  bad.z_hat = rng.normal_vector(inst.g.input_dim());
  bad.x_hat = inst.g.forward(bad.z_hat);
  Vector res = inst.obs.op->apply(bad.x_hat);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] -= inst.obs.y[i];
  bad.measurement_error = squared_norm(res);
  bad.eps_hat = norm2(res);
  const auto check = theorem_bound_check(bad, inst.obs);
  CHECK(check.eps_hat == bad.eps_hat);
  CHECK(check.eps_hat > 0.1);
  CHECK(check.status != BoundStatus::Fail);
}

TEST_CASE("bound check needs truth") {
  auto inst = in_range(7, 20, 0.0);
  inst.obs.truth.reset();
  RecoveryResult r;
  r.x_hat = Vector(256, 0.0);
  CHECK(code_of([&] { theorem_bound_check(r, inst.obs); }) == ErrorCode::MissingTruth);
  CHECK(to_string(BoundStatus::Uninformative) == "uninformative");
}
