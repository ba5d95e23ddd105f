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
#include "gencs/recovery.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace gencs {

// ---------------------------------------------------------------------------
// Set-restricted eigenvalue estimation.
//
// An S-REC(S, γ, δ) certificate quantifies over all pairs in S and cannot be
// established by sampling. Everything here is an empirical surrogate over
// sampled pairs of generator outputs.
// ---------------------------------------------------------------------------

struct LatentSampler {
  enum class Kind { Prior, Ball } kind = Kind::Prior;
  double radius = 1.0;  // Ball only

  static LatentSampler prior() { return {}; }
  static LatentSampler ball(double r) { return {Kind::Ball, r}; }

  Vector draw(Rng& rng, std::size_t k) const;
};

inline constexpr double kDegeneratePairThreshold = 1e-12;

struct SrecReport {
  std::size_t pair_count = 0;
  std::size_t degenerate_pairs = 0;
  double gamma_hat = 0.0;  // min ‖A·d‖/‖d‖ over sampled differences
  double max_ratio = 0.0;
  double norm_expansion_fraction = 0.0;  // share with ‖A·d‖ > 2‖d‖
  /// Per usable pair: ‖A·d‖ and ‖d‖, d = G(z₁) − G(z₂).
  std::vector<double> measured;
  std::vector<double> distance;

  /// Share of usable pairs with ‖A·d‖ < γ‖d‖ − δ.
  double violation_fraction(double gamma, double delta) const;
  /// Smallest δ ≥ 0 for which violation_fraction(gamma, δ) = 0.
  double certified_delta(double gamma) const;
};

/// Draws `pairs` latent pairs from `sampler` (z₁ then z₂ per pair) and
/// measures how A stretches the differences of their images.
SrecReport estimate_srec(const GeneratorNet& g, const MeasurementOp& op, const LatentSampler& sampler,
                         std::size_t pairs, Rng& rng);

struct SrecSweepConfig {
  std::vector<std::size_t> m_values{5, 10, 20, 40, 80};
  std::size_t pairs = 10000;
  std::size_t seeds = 20;
  std::uint64_t seed = 0;
  LatentSampler sampler;
  std::size_t workers = 1;
};

struct SrecSweep {
  std::vector<std::size_t> m_values;
  /// [seed][m index]
  std::vector<std::vector<double>> gamma_hat;
  std::vector<std::vector<double>> norm_expansion_fraction;
  std::size_t adjacent_comparisons = 0;
  std::size_t nondecreasing = 0;

  double nondecreasing_fraction() const {
    return adjacent_comparisons == 0 ? 1.0 : static_cast<double>(nondecreasing) / adjacent_comparisons;
  }
};

/// γ̂ as a function of m. Within one seed the m-row matrices are nested
/// (first m rows of one N(0,1) draw, scaled by 1/√m) and share the same
/// latent pairs, so differences between m values come from m alone.
SrecSweep srec_sweep(const GeneratorNet& g, const SrecSweepConfig& config);

// ---------------------------------------------------------------------------
// Linear regions of hyperplane arrangements.
// ---------------------------------------------------------------------------

struct Hyperplane {
  Vector normal;
  double offset = 0.0;  // {z : normal·z + offset = 0}
};

struct RegionCount {
  std::size_t k = 0;
  std::size_t c = 0;
  std::uint64_t exact_count = 0;
  std::uint64_t bound = 0;  // Σ_{i=0..k} C(c, i)
};

inline constexpr std::size_t kMaxRegionDim = 4;
inline constexpr std::size_t kMaxRegionPlanes = 12;

/// Σ_{i=0..k} C(c, i): cells of c hyperplanes in general position in R^k.
std::uint64_t general_position_regions(std::size_t c, std::size_t k);

/// Exact number of nonempty open cells. Each sign pattern is tested with a
/// small LP maximizing the distance margin; a cell counts when the margin
/// exceeds 1e-9. Planes are enumerated depth-first so infeasible prefixes
/// prune their subtrees.
RegionCount count_regions(std::size_t k, const std::vector<Hyperplane>& planes);

/// Restricts the arrangement to plane `index`: the other planes, written in
/// coordinates of that (k−1)-dimensional hyperplane.
std::vector<Hyperplane> restrict_to_plane(const std::vector<Hyperplane>& planes, std::size_t index);

struct IncrementalCount {
  std::uint64_t with_plane = 0;     // f(c, k)
  std::uint64_t without_plane = 0;  // f(c−1, k)
  std::uint64_t on_plane = 0;       // f(c−1, k−1) on the added plane
  bool recursion_holds() const noexcept { return with_plane == without_plane + on_plane; }
};

/// Adds the last plane to the others and counts the pieces it creates.
IncrementalCount incremental_count(std::size_t k, const std::vector<Hyperplane>& planes);

std::vector<Hyperplane> random_hyperplanes(Rng& rng, std::size_t k, std::size_t c);

/// Activation regions of the first layer: one hyperplane per node.
RegionCount count_net_regions(const GeneratorNet& g, std::size_t budget = kMaxRegionPlanes);

// ---------------------------------------------------------------------------
// Recovery bounds under an empirically certified (γ̂, δ̂).
// ---------------------------------------------------------------------------

struct RecoveryInstance {
  double error = 0.0;                 // ‖x̂ − x*‖
  double representation_error = 0.0;  // min over the range; 0 for in-range truths
  double eta_norm = 0.0;
  double eps_hat = 0.0;
  /// ‖x̂‖ + ‖x*‖, which bounds the error without any assumptions.
  double trivial_bound = std::numeric_limits<double>::infinity();
};

RecoveryInstance make_instance(const RecoveryResult& result, const Observation& obs);

struct RecoveryBoundCheck {
  BoundStatus status = BoundStatus::Pass;
  double bound = 0.0;
  double slack = 0.0;  // bound − error
};

/// ‖x̂ − x*‖ ≤ (4/γ + 1)·rep + (2‖η‖ + ε + δ)/γ, labelled Uninformative when
/// γ is numerically zero or the bound exceeds the instance's trivial bound.
RecoveryBoundCheck check_recovery_bound(double gamma, double delta, const RecoveryInstance& instance);
std::vector<RecoveryBoundCheck> check_recovery_bound(double gamma, double delta,
                                                     const std::vector<RecoveryInstance>& instances);

struct TwoPointCheck {
  double distance = 0.0;  // ‖x₁ − x₂‖
  double bound = 0.0;     // (ε₁ + ε₂ + δ)/γ
  bool holds() const noexcept { return distance <= bound; }
};

/// Two points whose measurements are within ε₁, ε₂ of y must lie within
/// (ε₁ + ε₂ + δ)/γ of each other when A satisfies S-REC(γ, δ) on them.
TwoPointCheck two_point_check(const MeasurementOp& op, std::span<const double> y, std::span<const double> x1,
                              std::span<const double> x2, double gamma, double delta);

}  // namespace gencs
