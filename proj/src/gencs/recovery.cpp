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

#include "gencs/recovery.hpp"

#include "gencs/error.hpp"
#include "gencs/parallel.hpp"

#include <cmath>

namespace gencs {

RecoveryConfig RecoveryConfig::mnist_profile() {
  RecoveryConfig c;
  c.lambda = 0.1;
  c.learning_rate = 0.01;
  c.restarts = 10;
  c.steps_per_restart = 1000;
  return c;
}

RecoveryConfig RecoveryConfig::celeba_profile() {
  RecoveryConfig c;
  c.lambda = 0.001;
  c.learning_rate = 0.1;
  c.restarts = 2;
  c.steps_per_restart = 500;
  return c;
}

void RecoveryConfig::validate() const {
  require(lambda >= 0.0 && std::isfinite(lambda), ErrorCode::InvalidArgument, "lambda must be finite and >= 0");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorCode::InvalidArgument,
          "learning_rate must be positive");
  require(restarts >= 1, ErrorCode::InvalidArgument, "restarts must be >= 1");
  require(adam_beta1 > 0.0 && adam_beta1 < 1.0 && adam_beta2 > 0.0 && adam_beta2 < 1.0,
          ErrorCode::InvalidArgument, "Adam betas must lie in (0, 1)");
  require(adam_eps > 0.0, ErrorCode::InvalidArgument, "adam_eps must be positive");
  if (latent_constraint) {
    require(latent_constraint->radius > 0.0, ErrorCode::InvalidArgument, "latent radius must be positive");
  }
}

LossEval loss(const GeneratorNet& g, const MeasurementOp& op, std::span<const double> y,
              std::span<const double> z, double lambda) {
  require(g.output_dim() == op.n(), ErrorCode::DimensionMismatch,
          "loss: generator output " + std::to_string(g.output_dim()) + " != operator n " + std::to_string(op.n()));
  require(y.size() == op.m(), ErrorCode::DimensionMismatch, "loss: y length != operator m");
  auto trace = g.forward_trace(z);
  Vector residual = op.apply(trace.output);
  for (std::size_t i = 0; i < residual.size(); ++i) {
    residual[i] -= y[i];
  }
  LossEval out;
  out.measurement_error = squared_norm(residual);
  out.value = out.measurement_error + lambda * squared_norm(z);

  Vector cot = op.apply_transposed(residual);
  for (auto& v : cot) {
    v *= 2.0;
  }
  out.grad = g.backprop(trace, cot);
  for (std::size_t i = 0; i < z.size(); ++i) {
    out.grad[i] += 2.0 * lambda * z[i];
  }
  out.x = std::move(trace.output);
  return out;
}

namespace {

class Adam {
public:
  Adam(std::size_t dim, const RecoveryConfig& c)
      : lr_(c.learning_rate), b1_(c.adam_beta1), b2_(c.adam_beta2), eps_(c.adam_eps), m_(dim, 0.0), v_(dim, 0.0) {}

  void step(Vector& z, const Vector& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < z.size(); ++i) {
      m_[i] = b1_ * m_[i] + (1.0 - b1_) * grad[i];
      v_[i] = b2_ * v_[i] + (1.0 - b2_) * grad[i] * grad[i];
      const double m_hat = m_[i] / c1;
      const double v_hat = v_[i] / c2;
      z[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }

private:
  double lr_, b1_, b2_, eps_;
  Vector m_, v_;
  std::size_t t_ = 0;
};

void project_to_ball(Vector& z, double radius) {
  const double norm = norm2(z);
  if (norm > radius) {
    const double scale = radius / norm;
    for (auto& v : z) {
      v *= scale;
    }
  }
}

struct RestartOutcome {
  RestartTrace trace;
  Vector z;
};

RestartOutcome run_restart(const GeneratorNet& g, const Observation& obs, const RecoveryConfig& config,
                           std::size_t index) {
  RestartOutcome out;
  out.trace.index = index;
  Rng rng(derive_seed(config.seed, index));
  const std::size_t k = g.input_dim();
  Vector z(k);
  for (auto& v : z) {
    v = config.init == LatentInit::GaussianPrior ? rng.normal() : rng.uniform(-1.0, 1.0);
  }
  if (config.latent_constraint) {
    project_to_ball(z, config.latent_constraint->radius);
  }

  try {
    LossEval eval = loss(g, *obs.op, obs.y, z, config.lambda);
    if (!std::isfinite(eval.value)) {
      fail(ErrorCode::NonFinite, "non-finite initial loss");
    }
    out.trace.initial_loss = eval.value;
    Vector best_z = z;
    double best_value = eval.value;
    double best_meas = eval.measurement_error;

    Adam adam(k, config);
    for (std::size_t step = 0; step < config.steps_per_restart; ++step) {
      adam.step(z, eval.grad);
      if (config.latent_constraint) {
        project_to_ball(z, config.latent_constraint->radius);
      }
      eval = loss(g, *obs.op, obs.y, z, config.lambda);
      if (!std::isfinite(eval.value) || !all_finite(eval.grad)) {
        fail(ErrorCode::NonFinite, "non-finite loss at step " + std::to_string(step + 1));
      }
      if (eval.value < best_value) {
        best_value = eval.value;
        best_meas = eval.measurement_error;
        best_z = z;
      }
    }
    out.trace.final_loss = best_value;
    out.trace.measurement_error = best_meas;
    out.z = std::move(best_z);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonFinite) {
      throw;
    }
    out.trace.aborted = true;
    out.trace.abort_reason = e.what();
    out.trace.final_loss = std::numeric_limits<double>::quiet_NaN();
    out.trace.measurement_error = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace

RecoveryResult recover(const GeneratorNet& g, const Observation& obs, const RecoveryConfig& config) {
  config.validate();
  require(obs.op != nullptr, ErrorCode::InvalidArgument, "recover: observation has no operator");
  require(g.output_dim() == obs.op->n(), ErrorCode::DimensionMismatch,
          "recover: generator output " + std::to_string(g.output_dim()) + " != operator n " +
              std::to_string(obs.op->n()));
  require(obs.y.size() == obs.op->m(), ErrorCode::DimensionMismatch, "recover: y length != operator m");

  std::vector<RestartOutcome> outcomes(config.restarts);
  parallel_for(config.restarts, config.workers,
               [&](std::size_t i) { outcomes[i] = run_restart(g, obs, config, i); });

  RecoveryResult result;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& t = outcomes[i].trace;
    result.per_restart_trace.push_back(t);
    if (t.aborted) {
      continue;
    }
    if (!best || t.measurement_error < outcomes[*best].trace.measurement_error) {
      best = i;
    }
  }
  if (!best) {
    fail(ErrorCode::AllRestartsFailed, "recover: all " + std::to_string(config.restarts) + " restarts aborted");
  }
  result.best_restart = *best;
  result.z_hat = outcomes[*best].z;
  result.x_hat = g.forward(result.z_hat);
  Vector residual = obs.op->apply(result.x_hat);
  for (std::size_t i = 0; i < residual.size(); ++i) {
    residual[i] -= obs.y[i];
  }
  result.measurement_error = squared_norm(residual);
  result.eps_hat = std::sqrt(result.measurement_error);
  if (obs.truth) {
    Vector diff = result.x_hat;
    for (std::size_t i = 0; i < diff.size(); ++i) {
      diff[i] -= (*obs.truth)[i];
    }
    result.reconstruction_error = squared_norm(diff);
  }
  return result;
}

std::string to_string(BoundStatus s) {
  switch (s) {
    case BoundStatus::Pass:
      return "pass";
    case BoundStatus::Fail:
      return "fail";
    case BoundStatus::Uninformative:
      return "uninformative";
  }
  return "unknown";
}

BoundCheck theorem_bound_check(const RecoveryResult& result, const Observation& obs, double slack_multiplier) {
  require(obs.truth.has_value(), ErrorCode::MissingTruth, "theorem_bound_check: observation has no truth");
  require(obs.op != nullptr, ErrorCode::InvalidArgument, "theorem_bound_check: observation has no operator");
  const Vector& truth = *obs.truth;
  Vector eta = obs.op->apply(truth);
  for (std::size_t i = 0; i < eta.size(); ++i) {
    eta[i] = obs.y[i] - eta[i];
  }
  Vector diff = result.x_hat;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] -= truth[i];
  }
  BoundCheck c;
  c.eta_norm = norm2(eta);
  c.eps_hat = result.eps_hat;
  c.lhs = norm2(diff);
  c.rhs = slack_multiplier * (3.0 * c.eta_norm + 2.0 * c.eps_hat);
  c.margin = c.rhs - c.lhs;
  if (c.lhs <= c.rhs) {
    c.status = c.rhs >= norm2(result.x_hat) + norm2(truth) ? BoundStatus::Uninformative : BoundStatus::Pass;
  } else {
    c.status = BoundStatus::Fail;
  }
  return c;
}

}  // namespace gencs
