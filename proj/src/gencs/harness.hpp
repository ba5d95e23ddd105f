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

#include "gencs/baselines.hpp"
#include "gencs/image_io.hpp"
#include "gencs/measurement.hpp"
#include "gencs/model.hpp"
#include "gencs/recovery.hpp"
#include "gencs/srec.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gencs {

// ---------------------------------------------------------------------------
// Experiment description. The JSON schema is documented in docs/experiment.md.
// ---------------------------------------------------------------------------

struct GeneratorSource {
  std::optional<std::filesystem::path> path;
  RandomNetSpec random;
  std::uint64_t seed = 0;  // for the random net
};

struct DatasetSpec {
  enum class Kind { InRange, ImageDir } kind = Kind::InRange;
  std::size_t count = 25;
  std::uint64_t seed = 0;
  std::filesystem::path path;  // ImageDir
  /// Needed by the DCT/DB1 bases and image loading; in-range data without a
  /// shape is treated as a 1×n image.
  std::optional<ImageShape> shape;
  PixelRange range = PixelRange::Unit;
};

struct TaskSpec {
  enum class Kind { Gaussian, SuperRes, Identity } kind = Kind::Gaussian;
  std::string label;
  std::vector<std::size_t> m_values;  // Gaussian only
  std::vector<double> noise_levels{0.0};
  std::size_t pool = 2;  // SuperRes only
  std::size_t stride = 2;
};

struct AlgorithmSpec {
  enum class Kind { Generative, Lasso } kind = Kind::Generative;
  std::string label;
  RecoveryConfig recovery;
  BasisKind basis = BasisKind::Pixel;
  LassoConfig lasso;
};

struct ExperimentSpec {
  std::string name = "experiment";
  GeneratorSource generator;
  DatasetSpec dataset;
  std::vector<TaskSpec> tasks;
  std::vector<AlgorithmSpec> algorithms;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;  // empty: no files written
  std::size_t workers = 0;           // 0: GENCS_WORKERS or hardware
};

ExperimentSpec parse_experiment(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentSpec load_experiment(const std::filesystem::path& path);

RecoveryConfig parse_recovery_config(const nlohmann::json& j);
nlohmann::json to_json(const RecoveryConfig& c);
LassoConfig parse_lasso_config(const nlohmann::json& j);
RandomNetSpec parse_random_net_spec(const nlohmann::json& j);
SrecSweepConfig parse_srec_config(const nlohmann::json& j);
nlohmann::json to_json(const RecoveryResult& r);
nlohmann::json to_json(const SrecSweep& s);

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct TrialRecord {
  std::string task;
  std::string algorithm;
  std::size_t m = 0;
  double noise = 0.0;
  std::size_t trial = 0;
  double per_pixel_error = 0.0;  // ‖x̂ − x*‖² / n
  double measurement_error = 0.0;
  double wall_ms = 0.0;
  std::string error;  // non-empty when the trial failed
};

struct Aggregate {
  std::string task;
  std::string algorithm;
  std::size_t m = 0;
  double noise = 0.0;
  std::size_t trials = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  /// Normal approximation: mean ± 1.96·SE.
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct SweepResult {
  std::vector<TrialRecord> trials;  // ordered by (task, algorithm, m, noise, trial)
  std::vector<Aggregate> aggregates;
  std::vector<std::string> errors;
  std::size_t signal_dim = 0;  // n
  bool all_ok() const noexcept { return errors.empty(); }
};

/// Runs every (task, m, noise, algorithm, trial) cell. Cells are independent
/// and seeded from (spec seed, task, m, trial), so the result does not depend
/// on the worker count. A failing cell is recorded and the run continues.
/// When output_dir is set, writes raw.csv, agg.csv, timing.csv and
/// plots/*.svg there.
SweepResult run_experiment(const ExperimentSpec& spec);

std::vector<Aggregate> aggregate(const std::vector<TrialRecord>& trials);

/// Wall time is kept out of raw.csv so reruns produce identical bytes.
std::string raw_csv(const SweepResult& r);
std::string aggregate_csv(const SweepResult& r);
std::string timing_csv(const SweepResult& r);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_low;
  std::vector<double> y_high;
};

/// Line chart with CI whiskers; log-scaled y when every value is positive.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

void write_outputs(const SweepResult& r, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

struct SaturationReport {
  std::string task;
  double noise = 0.0;
  std::optional<std::size_t> crossover_m;  // first m where the baseline beats the generative method
  std::optional<std::size_t> plateau_onset_m;
  double plateau_slope = 0.0;  // least-squares slope of mean error vs m from the onset on
  double plateau_level = 0.0;
  bool saturated = false;  // plateau sits above the noise floor
  std::string summary;
};

/// Compares one generative and one baseline algorithm along m for each
/// (task, noise). A plateau starts where every later step improves the mean
/// error by less than 10%; the noise floor is max(noise²/n, 1e-8).
std::vector<SaturationReport> compare_saturation(const SweepResult& r, const std::string& generative,
                                                 const std::string& baseline, std::size_t n);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace gencs
