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
#include "gencs/model.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gencs {

struct LatentBallConstraint {
  double radius = std::numeric_limits<double>::infinity();
};

enum class LatentInit { GaussianPrior, Uniform };

struct RecoveryConfig {
  double lambda = 0.0;
  double learning_rate = 0.01;
  std::size_t steps_per_restart = 1000;
  std::size_t restarts = 10;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Radial projection onto ‖z‖ ≤ r after every step when set.
  std::optional<LatentBallConstraint> latent_constraint;
  LatentInit init = LatentInit::GaussianPrior;
  std::uint64_t seed = 0;
  /// 0 picks default_workers(). Does not affect results.
  std::size_t workers = 1;

  /// λ = 0.1, lr 0.01, 10 restarts × 1000 steps.
  static RecoveryConfig mnist_profile();
  /// λ = 0.001, lr 0.1, 2 restarts × 500 steps.
  static RecoveryConfig celeba_profile();

  void validate() const;
};

struct LossEval {
  double value = 0.0;              // ‖A·G(z) − y‖² + λ‖z‖²
  double measurement_error = 0.0;  // ‖A·G(z) − y‖²
  Vector grad;
  Vector x;  // G(z)
};

/// Objective and gradient: 2·vjp(G, z, Aᵀ(AG(z) − y)) + 2λz.
LossEval loss(const GeneratorNet& g, const MeasurementOp& op, std::span<const double> y,
              std::span<const double> z, double lambda);

struct RestartTrace {
  std::size_t index = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;  // objective at the iterate this restart reports
  double measurement_error = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

struct RecoveryResult {
  Vector z_hat;
  Vector x_hat;
  double measurement_error = 0.0;
  std::optional<double> reconstruction_error;  // ‖G(ẑ) − x*‖²
  double eps_hat = 0.0;  // ‖y − A·G(ẑ)‖
  std::size_t best_restart = 0;
  std::vector<RestartTrace> per_restart_trace;
};

/// Adam on the latent objective from `restarts` independent starts; keeps the
/// lowest-objective iterate of each descent and returns the restart with the
/// smallest measurement error (lowest index on ties).
RecoveryResult recover(const GeneratorNet& g, const Observation& obs, const RecoveryConfig& config);

enum class BoundStatus { Pass, Fail, Uninformative };

std::string to_string(BoundStatus s);

struct BoundCheck {
  BoundStatus status = BoundStatus::Pass;
  double lhs = 0.0;  // ‖G(ẑ) − x*‖
  double rhs = 0.0;  // slack·(3‖η‖ + 2·eps_hat)
  double margin = 0.0;
  double eta_norm = 0.0;
  double eps_hat = 0.0;
};

/// Checks ‖G(ẑ) − x*‖ ≤ 3‖η‖ + 2‖y − A·G(ẑ)‖ for an in-range truth. η is
/// recovered as y − A·x*. When the right side already exceeds ‖x̂‖ + ‖x*‖
/// the inequality carries no information and the check reports Uninformative.
BoundCheck theorem_bound_check(const RecoveryResult& result, const Observation& obs, double slack_multiplier = 1.0);

}  // namespace gencs
