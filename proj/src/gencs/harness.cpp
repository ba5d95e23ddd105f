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

#include "gencs/harness.hpp"

#include "gencs/error.hpp"
#include "gencs/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace gencs {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

Activation activation_from(const json& j, const std::string& key, Activation fallback) {
  if (!j.contains(key)) return fallback;
  const auto name = j.at(key).get<std::string>();
  const double slope = j.value(key + "_slope", 0.2);
  auto act = parse_activation(name, slope);
  if (!act) fail(ErrorCode::UnsupportedActivation, "unknown activation \"" + name + "\"");
  return *act;
}

BasisKind basis_from(const std::string& name) {
  if (name == "pixel") return BasisKind::Pixel;
  if (name == "dct") return BasisKind::DCT2D;
  if (name == "db1") return BasisKind::DB1Wavelet2D;
  fail(ErrorCode::InvalidArgument, "unknown basis \"" + name + "\" (expected pixel, dct or db1)");
}

std::string basis_name(BasisKind k) {
  switch (k) {
    case BasisKind::Pixel:
      return "pixel";
    case BasisKind::DCT2D:
      return "dct";
    case BasisKind::DB1Wavelet2D:
      return "db1";
  }
  return "pixel";
}

ImageShape shape_from(const json& j) {
  ImageShape s;
  s.height = j.at("height").get<std::size_t>();
  s.width = j.at("width").get<std::size_t>();
  s.channels = j.value("channels", std::size_t{1});
  return s;
}

}  // namespace

RecoveryConfig parse_recovery_config(const json& j) {
  RecoveryConfig c;
  const auto profile = j.value("profile", std::string{});
  if (profile == "mnist") {
    c = RecoveryConfig::mnist_profile();
  } else if (profile == "celeba") {
    c = RecoveryConfig::celeba_profile();
  } else if (!profile.empty()) {
    fail(ErrorCode::InvalidArgument, "unknown recovery profile \"" + profile + "\"");
  }
  c.lambda = j.value("lambda", c.lambda);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.steps_per_restart = j.value("steps_per_restart", c.steps_per_restart);
  c.restarts = j.value("restarts", c.restarts);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  if (j.contains("latent_radius") && !j.at("latent_radius").is_null()) {
    c.latent_constraint = LatentBallConstraint{j.at("latent_radius").get<double>()};
  }
  const auto init = j.value("init", std::string{"gaussian_prior"});
  if (init == "gaussian_prior") {
    c.init = LatentInit::GaussianPrior;
  } else if (init == "uniform") {
    c.init = LatentInit::Uniform;
  } else {
    fail(ErrorCode::InvalidArgument, "unknown init \"" + init + "\"");
  }
  c.validate();
  return c;
}

json to_json(const RecoveryConfig& c) {
  json j{{"lambda", c.lambda},
         {"learning_rate", c.learning_rate},
         {"steps_per_restart", c.steps_per_restart},
         {"restarts", c.restarts},
         {"adam_beta1", c.adam_beta1},
         {"adam_beta2", c.adam_beta2},
         {"adam_eps", c.adam_eps},
         {"init", c.init == LatentInit::GaussianPrior ? "gaussian_prior" : "uniform"},
         {"seed", c.seed}};
  j["latent_radius"] = c.latent_constraint ? json(c.latent_constraint->radius) : json(nullptr);
  return j;
}

LassoConfig parse_lasso_config(const json& j) {
  LassoConfig c;
  c.shrinkage = j.value("shrinkage", c.shrinkage);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.power_iters = j.value("power_iters", c.power_iters);
  const auto solver = j.value("solver", std::string{"fista"});
  if (solver == "fista") {
    c.solver = LassoSolver::FISTA;
  } else if (solver == "ista") {
    c.solver = LassoSolver::ISTA;
  } else {
    fail(ErrorCode::InvalidArgument, "unknown lasso solver \"" + solver + "\"");
  }
  return c;
}

RandomNetSpec parse_random_net_spec(const json& r) {
  RandomNetSpec rs;
  rs.k = r.value("k", rs.k);
  rs.n = r.value("n", rs.n);
  rs.depth = r.value("depth", rs.depth);
  rs.width = r.value("width", rs.width);
  rs.hidden = activation_from(r, "hidden", rs.hidden);
  rs.output = activation_from(r, "output", rs.output);
  rs.weight_scale = r.value("weight_scale", rs.weight_scale);
  rs.bias_scale = r.value("bias_scale", rs.bias_scale);
  return rs;
}

SrecSweepConfig parse_srec_config(const json& j) {
  SrecSweepConfig c;
  if (j.contains("m_values")) c.m_values = j.at("m_values").get<std::vector<std::size_t>>();
  c.pairs = j.value("pairs", c.pairs);
  c.seeds = j.value("seeds", c.seeds);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  if (j.contains("latent_radius") && !j.at("latent_radius").is_null()) {
    c.sampler = LatentSampler::ball(j.at("latent_radius").get<double>());
  }
  return c;
}

json to_json(const RecoveryResult& r) {
  json traces = json::array();
  for (const auto& t : r.per_restart_trace) {
    json e{{"restart", t.index},
           {"initial_loss", t.initial_loss},
           {"final_loss", t.final_loss},
           {"measurement_error", t.measurement_error},
           {"aborted", t.aborted}};
    if (t.aborted) e["abort_reason"] = t.abort_reason;
    traces.push_back(std::move(e));
  }
  json j{{"z_hat", r.z_hat},
         {"x_hat", r.x_hat},
         {"measurement_error", r.measurement_error},
         {"eps_hat", r.eps_hat},
         {"best_restart", r.best_restart},
         {"per_restart_trace", std::move(traces)}};
  j["reconstruction_error"] = r.reconstruction_error ? json(*r.reconstruction_error) : json(nullptr);
  return j;
}

json to_json(const SrecSweep& s) {
  return json{{"m_values", s.m_values},
              {"gamma_hat", s.gamma_hat},
              {"norm_expansion_fraction", s.norm_expansion_fraction},
              {"adjacent_comparisons", s.adjacent_comparisons},
              {"nondecreasing", s.nondecreasing},
              {"nondecreasing_fraction", s.nondecreasing_fraction()}};
}

ExperimentSpec parse_experiment(const json& j, const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };

  ExperimentSpec spec;
  spec.name = j.value("name", spec.name);
  spec.seed = j.value("seed", spec.seed);
  spec.trials = j.value("trials", spec.trials);
  spec.workers = j.value("workers", spec.workers);
  if (j.contains("output_dir")) spec.output_dir = resolve(j.at("output_dir").get<std::string>());
  require(spec.trials >= 1, ErrorCode::InvalidArgument, "experiment: trials must be >= 1");

  const json& g = j.at("generator");
  if (g.contains("path")) {
    spec.generator.path = resolve(g.at("path").get<std::string>());
  } else {
    const json& r = g.at("random");
    spec.generator.random = parse_random_net_spec(r);
    spec.generator.seed = r.value("seed", std::uint64_t{0});
  }

  const json& d = j.at("dataset");
  const auto kind = d.value("kind", std::string{"in_range"});
  if (kind == "in_range") {
    spec.dataset.kind = DatasetSpec::Kind::InRange;
    spec.dataset.count = d.value("count", spec.trials);
  } else if (kind == "image_dir") {
    spec.dataset.kind = DatasetSpec::Kind::ImageDir;
    spec.dataset.path = resolve(d.at("path").get<std::string>());
    spec.dataset.count = d.value("count", std::size_t{25});
    require(d.contains("shape"), ErrorCode::InvalidArgument, "image_dir dataset needs a shape");
  } else {
    fail(ErrorCode::InvalidArgument, "unknown dataset kind \"" + kind + "\"");
  }
  spec.dataset.seed = d.value("seed", std::uint64_t{0});
  if (d.contains("shape")) spec.dataset.shape = shape_from(d.at("shape"));
  const auto range = d.value("range", std::string{"unit"});
  spec.dataset.range = range == "symmetric" ? PixelRange::Symmetric : PixelRange::Unit;
  require(spec.trials <= spec.dataset.count, ErrorCode::InvalidArgument,
          "experiment: trials (" + std::to_string(spec.trials) + ") exceed dataset count (" +
              std::to_string(spec.dataset.count) + ")");

  std::map<std::string, int> label_uses;
  for (const json& t : j.at("tasks")) {
    TaskSpec task;
    const auto tk = t.at("kind").get<std::string>();
    if (tk == "gaussian") {
      task.kind = TaskSpec::Kind::Gaussian;
      task.m_values = t.at("m").get<std::vector<std::size_t>>();
      require(!task.m_values.empty(), ErrorCode::InvalidArgument, "gaussian task needs m values");
    } else if (tk == "superres") {
      task.kind = TaskSpec::Kind::SuperRes;
      task.pool = t.value("pool", task.pool);
      task.stride = t.value("stride", task.pool);
    } else if (tk == "identity") {
      task.kind = TaskSpec::Kind::Identity;
    } else {
      fail(ErrorCode::InvalidArgument, "unknown task kind \"" + tk + "\"");
    }
    if (t.contains("noise")) task.noise_levels = t.at("noise").get<std::vector<double>>();
    require(!task.noise_levels.empty(), ErrorCode::InvalidArgument, "task needs at least one noise level");
    task.label = t.value("label", tk);
    if (label_uses[task.label]++ > 0) task.label += "_" + std::to_string(label_uses[task.label] - 1);
    spec.tasks.push_back(std::move(task));
  }

  label_uses.clear();
  for (const json& a : j.at("algorithms")) {
    AlgorithmSpec alg;
    const auto ak = a.at("kind").get<std::string>();
    if (ak == "generative") {
      alg.kind = AlgorithmSpec::Kind::Generative;
      alg.recovery = parse_recovery_config(a.value("config", json::object()));
      alg.label = a.value("label", std::string{"generative"});
    } else if (ak == "lasso") {
      alg.kind = AlgorithmSpec::Kind::Lasso;
      alg.basis = basis_from(a.value("basis", std::string{"pixel"}));
      alg.lasso = parse_lasso_config(a);
      alg.label = a.value("label", "lasso-" + basis_name(alg.basis));
    } else {
      fail(ErrorCode::InvalidArgument, "unknown algorithm kind \"" + ak + "\"");
    }
    if (label_uses[alg.label]++ > 0) alg.label += "_" + std::to_string(label_uses[alg.label] - 1);
    spec.algorithms.push_back(std::move(alg));
  }
  require(!spec.tasks.empty() && !spec.algorithms.empty(), ErrorCode::InvalidArgument,
          "experiment needs at least one task and one algorithm");
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  json j;
  try {
    in >> j;
    return parse_experiment(j, path.parent_path());
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
}

namespace {

GeneratorNet build_generator(const GeneratorSource& src) {
  if (src.path) return load_weights(*src.path);
  Rng rng(src.seed);
  return random_net(rng, src.random);
}

std::vector<Vector> build_dataset(const DatasetSpec& d, const GeneratorNet& g, std::size_t items) {
  std::vector<Vector> out;
  if (d.kind == DatasetSpec::Kind::InRange) {
    for (std::size_t t = 0; t < items; ++t) {
      Rng rng(derive_seed(d.seed, t));
      out.push_back(g.forward(rng.normal_vector(g.input_dim())));
    }
    return out;
  }
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(d.path)) {
    fail(ErrorCode::Io, "image directory " + d.path.string() + " does not exist");
  }
  for (const auto& entry : std::filesystem::directory_iterator(d.path)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".f32" || ext == ".png" || ext == ".PNG")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  // Seeded Fisher-Yates; the first `count` files form the held-out set.
  Rng rng(d.seed);
  for (std::size_t i = files.size(); i > 1; --i) {
    std::swap(files[i - 1], files[rng.next_u64() % i]);
  }
  require(files.size() >= items, ErrorCode::InvalidArgument,
          d.path.string() + ": needs " + std::to_string(items) + " images, found " + std::to_string(files.size()));
  for (std::size_t t = 0; t < items; ++t) {
    out.push_back(load_image(files[t], *d.shape, d.range));
  }
  return out;
}

struct Cell {
  std::size_t task = 0;
  std::size_t algorithm = 0;
  std::size_t m = 0;
  std::size_t noise_index = 0;
  double noise = 0.0;
  std::size_t trial = 0;
};

TrialRecord run_cell(const ExperimentSpec& spec, const GeneratorNet& g, const std::vector<Vector>& data,
                     const ImageShape& shape, const Cell& cell) {
  const TaskSpec& task = spec.tasks[cell.task];
  const AlgorithmSpec& alg = spec.algorithms[cell.algorithm];
  TrialRecord rec;
  rec.task = task.label;
  rec.algorithm = alg.label;
  rec.m = cell.m;
  rec.noise = cell.noise;
  rec.trial = cell.trial;

  const auto start = std::chrono::steady_clock::now();
  try {
    const Vector& truth = data[cell.trial];
    const std::size_t n = truth.size();
    require(g.output_dim() == n, ErrorCode::DimensionMismatch,
            "generator output " + std::to_string(g.output_dim()) + " != signal length " + std::to_string(n));
    // One key per (task, m, trial): algorithms and noise levels share the
    // operator and the noise direction.
    const std::uint64_t key = derive_seed(derive_seed(derive_seed(spec.seed, cell.task), cell.m), cell.trial);

    MeasurementOpPtr op;
    switch (task.kind) {
      case TaskSpec::Kind::Gaussian:
        require(cell.m <= n, ErrorCode::InvalidArgument,
                "m = " + std::to_string(cell.m) + " exceeds n = " + std::to_string(n));
        op = std::make_shared<const MeasurementOp>(MeasurementOp::gaussian(derive_seed(key, 0), cell.m, n));
        break;
      case TaskSpec::Kind::SuperRes:
        op = std::make_shared<const MeasurementOp>(MeasurementOp::superres(
            {task.pool, task.pool, task.stride, shape.height, shape.width, shape.channels}));
        break;
      case TaskSpec::Kind::Identity:
        op = std::make_shared<const MeasurementOp>(MeasurementOp::identity(n));
        break;
    }
    const Observation obs = sense(op, truth, NoiseModel{cell.noise, derive_seed(key, 1)});

    Vector x_hat;
    if (alg.kind == AlgorithmSpec::Kind::Generative) {
      RecoveryConfig config = alg.recovery;
      config.seed = derive_seed(derive_seed(key, 2), alg.recovery.seed);
      config.workers = 1;
      x_hat = recover(g, obs, config).x_hat;
    } else {
      SparsifyingBasis basis;
      switch (alg.basis) {
        case BasisKind::Pixel:
          basis = SparsifyingBasis::pixel(n);
          break;
        case BasisKind::DCT2D:
          basis = SparsifyingBasis::dct(shape.height, shape.width, shape.channels);
          break;
        case BasisKind::DB1Wavelet2D:
          basis = SparsifyingBasis::db1(shape.height, shape.width, shape.channels);
          break;
      }
      x_hat = lasso_recover(*op, obs.y, basis, alg.lasso).x_hat;
    }
    Vector diff = x_hat;
    for (std::size_t i = 0; i < n; ++i) diff[i] -= truth[i];
    rec.per_pixel_error = squared_norm(diff) / static_cast<double>(n);
    Vector residual = op->apply(x_hat);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= obs.y[i];
    rec.measurement_error = squared_norm(residual);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

SweepResult run_experiment(const ExperimentSpec& spec) {
  SweepResult result;
  std::optional<GeneratorNet> g;
  std::vector<Vector> data;
  try {
    g = build_generator(spec.generator);
    data = build_dataset(spec.dataset, *g, spec.trials);
  } catch (const std::exception& e) {
    result.errors.push_back(std::string("setup: ") + e.what());
    return result;
  }
  result.signal_dim = g->output_dim();
  const ImageShape shape = spec.dataset.shape.value_or(ImageShape{1, g->output_dim(), 1});
  if (shape.size() != g->output_dim()) {
    result.errors.push_back("setup: dataset shape does not match generator output " +
                            std::to_string(g->output_dim()));
    return result;
  }

  // Canonical order: task, algorithm, m, noise, trial.
  std::vector<Cell> cells;
  for (std::size_t ti = 0; ti < spec.tasks.size(); ++ti) {
    const TaskSpec& task = spec.tasks[ti];
    std::vector<std::size_t> ms;
    switch (task.kind) {
      case TaskSpec::Kind::Gaussian:
        ms = task.m_values;
        break;
      case TaskSpec::Kind::SuperRes:
        ms = {shape.channels * (shape.height / std::max<std::size_t>(task.stride, 1)) *
              (shape.width / std::max<std::size_t>(task.stride, 1))};
        break;
      case TaskSpec::Kind::Identity:
        ms = {g->output_dim()};
        break;
    }
    for (std::size_t ai = 0; ai < spec.algorithms.size(); ++ai) {
      for (std::size_t m : ms) {
        for (std::size_t ni = 0; ni < task.noise_levels.size(); ++ni) {
          for (std::size_t t = 0; t < spec.trials; ++t) {
            cells.push_back({ti, ai, m, ni, task.noise_levels[ni], t});
          }
        }
      }
    }
  }

  result.trials.resize(cells.size());
  parallel_for(cells.size(), spec.workers,
               [&](std::size_t i) { result.trials[i] = run_cell(spec, *g, data, shape, cells[i]); });

  std::set<std::string> seen;
  for (const auto& r : result.trials) {
    if (!r.error.empty()) {
      const std::string msg = r.task + "/" + r.algorithm + ": " + r.error;
      if (seen.insert(msg).second) result.errors.push_back(msg);
    }
  }
  result.aggregates = aggregate(result.trials);
  if (!spec.output_dir.empty()) {
    write_outputs(result, spec.output_dir);
  }
  return result;
}

std::vector<Aggregate> aggregate(const std::vector<TrialRecord>& trials) {
  std::vector<Aggregate> out;
  std::size_t i = 0;
  while (i < trials.size()) {
    std::size_t j = i;
    std::vector<double> values;
    while (j < trials.size() && trials[j].task == trials[i].task && trials[j].algorithm == trials[i].algorithm &&
           trials[j].m == trials[i].m && trials[j].noise == trials[i].noise) {
      if (trials[j].error.empty()) values.push_back(trials[j].per_pixel_error);
      ++j;
    }
    Aggregate a;
    a.task = trials[i].task;
    a.algorithm = trials[i].algorithm;
    a.m = trials[i].m;
    a.noise = trials[i].noise;
    a.trials = values.size();
    if (!values.empty()) {
      a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.stderr_mean = std::sqrt(ss / static_cast<double>(values.size() - 1)) /
                        std::sqrt(static_cast<double>(values.size()));
      }
    }
    a.ci_low = a.mean - 1.96 * a.stderr_mean;
    a.ci_high = a.mean + 1.96 * a.stderr_mean;
    out.push_back(a);
    i = j;
  }
  return out;
}

std::string raw_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "task,algorithm,m,noise,trial,per_pixel_error,measurement_error,status\n";
  for (const auto& t : r.trials) {
    os << t.task << ',' << t.algorithm << ',' << t.m << ',' << format_double(t.noise) << ',' << t.trial << ','
       << format_double(t.per_pixel_error) << ',' << format_double(t.measurement_error) << ','
       << (t.error.empty() ? "ok" : "error") << '\n';
  }
  return os.str();
}

std::string aggregate_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "task,algorithm,m,noise,trials,mean_per_pixel_error,stderr,ci95_low,ci95_high\n";
  for (const auto& a : r.aggregates) {
    os << a.task << ',' << a.algorithm << ',' << a.m << ',' << format_double(a.noise) << ',' << a.trials << ','
       << format_double(a.mean) << ',' << format_double(a.stderr_mean) << ',' << format_double(a.ci_low) << ','
       << format_double(a.ci_high) << '\n';
  }
  return os.str();
}

std::string timing_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "task,algorithm,m,noise,trial,wall_ms\n";
  for (const auto& t : r.trials) {
    os << t.task << ',' << t.algorithm << ',' << t.m << ',' << format_double(t.noise) << ',' << t.trial << ','
       << short_double(t.wall_ms) << '\n';
  }
  return os.str();
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
  constexpr double width = 640, height = 420, left = 80, right = 170, top = 40, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  bool all_positive = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      const double lo = s.y_low.empty() ? s.y[i] : s.y_low[i];
      const double hi = s.y_high.empty() ? s.y[i] : s.y_high[i];
      y_min = std::min({y_min, s.y[i], lo});
      y_max = std::max({y_max, s.y[i], hi});
      if (s.y[i] <= 0.0) all_positive = false;
    }
  }
  if (!std::isfinite(x_min)) x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  const bool log_y = all_positive;
  auto ty = [&](double v) {
    if (log_y) return std::log10(std::max(v, 1e-300));
    return v;
  };
  double ly_min, ly_max;
  if (log_y) {
    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
      for (double v : s.y) smallest = std::min(smallest, v);
      for (double v : s.y_low) {
        if (v > 0.0) smallest = std::min(smallest, v);
      }
    }
    ly_min = std::floor(std::log10(smallest));
    ly_max = std::ceil(std::log10(y_max));
  } else {
    ly_min = y_min;
    ly_max = y_max;
  }
  if (ly_max <= ly_min) ly_max = ly_min + 1.0;
  if (x_max <= x_min) x_max = x_min + 1.0;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) {
    const double v = std::clamp(ty(y), ly_min, ly_max);
    return top + (1.0 - (v - ly_min) / (ly_max - ly_min)) * plot_h;
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
       << short_double(xv) << "</text>\n";
    const double yv = ly_min + (ly_max - ly_min) * i / 4.0;
    const double ypos = top + (1.0 - i / 4.0) * plot_h;
    os << "<text x=\"" << left - 6 << "\" y=\"" << ypos + 4 << "\" text-anchor=\"end\">"
       << (log_y ? "1e" + short_double(yv) : short_double(yv)) << "</text>\n";
    os << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << ypos << "\" y2=\"" << ypos
       << "\" stroke=\"#ddd\"/>\n";
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 18 << "\" text-anchor=\"middle\">" << x_label
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << top + plot_h / 2 << ")\">" << y_label << (log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = palette[si % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!s.y_low.empty()) {
        os << "<line x1=\"" << px(s.x[i]) << "\" x2=\"" << px(s.x[i]) << "\" y1=\"" << py(s.y_low[i])
           << "\" y2=\"" << py(s.y_high[i]) << "\" stroke=\"" << color << "\"/>\n";
      }
      os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(si);
    os << "<line x1=\"" << left + plot_w + 12 << "\" x2=\"" << left + plot_w + 32 << "\" y1=\"" << ly - 4
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + plot_w + 38 << "\" y=\"" << ly << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

std::string sanitize(std::string s) {
  for (auto& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  }
  return s;
}

}  // namespace

void write_outputs(const SweepResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "plots");
  write_text(dir / "raw.csv", raw_csv(r));
  write_text(dir / "agg.csv", aggregate_csv(r));
  write_text(dir / "timing.csv", timing_csv(r));

  std::vector<std::string> tasks, algorithms;
  for (const auto& a : r.aggregates) {
    if (std::find(tasks.begin(), tasks.end(), a.task) == tasks.end()) tasks.push_back(a.task);
    if (std::find(algorithms.begin(), algorithms.end(), a.algorithm) == algorithms.end())
      algorithms.push_back(a.algorithm);
  }
  for (const auto& task : tasks) {
    std::set<double> noises;
    std::set<std::size_t> ms;
    for (const auto& a : r.aggregates) {
      if (a.task == task) {
        noises.insert(a.noise);
        ms.insert(a.m);
      }
    }
    auto collect = [&](auto keep, auto x_of) {
      std::vector<Series> out;
      for (const auto& alg : algorithms) {
        Series s;
        s.label = alg;
        for (const auto& a : r.aggregates) {
          if (a.task == task && a.algorithm == alg && a.trials > 0 && keep(a)) {
            s.x.push_back(x_of(a));
            s.y.push_back(a.mean);
            s.y_low.push_back(a.ci_low);
            s.y_high.push_back(a.ci_high);
          }
        }
        if (!s.x.empty()) out.push_back(std::move(s));
      }
      return out;
    };
    if (ms.size() > 1) {
      std::size_t ni = 0;
      for (double noise : noises) {
        auto series = collect([&](const Aggregate& a) { return a.noise == noise; },
                              [](const Aggregate& a) { return static_cast<double>(a.m); });
        write_text(dir / "plots" / (sanitize(task) + "_noise" + std::to_string(ni++) + "_error_vs_m.svg"),
                   svg_line_chart(task + ", noise " + short_double(noise), "measurements m",
                                  "per-pixel reconstruction error", series));
      }
    }
    if (noises.size() > 1) {
      for (std::size_t m : ms) {
        auto series = collect([&](const Aggregate& a) { return a.m == m; },
                              [](const Aggregate& a) { return a.noise; });
        write_text(dir / "plots" / (sanitize(task) + "_m" + std::to_string(m) + "_error_vs_noise.svg"),
                   svg_line_chart(task + ", m = " + std::to_string(m), "noise level sqrt(E|eta|^2)",
                                  "per-pixel reconstruction error", series));
      }
    }
  }
}

std::vector<SaturationReport> compare_saturation(const SweepResult& r, const std::string& generative,
                                                 const std::string& baseline, std::size_t n) {
  std::vector<SaturationReport> out;
  std::vector<std::pair<std::string, double>> keys;
  for (const auto& a : r.aggregates) {
    const auto key = std::make_pair(a.task, a.noise);
    if (a.algorithm == generative && std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [task, noise] : keys) {
    std::map<std::size_t, double> gen, base;
    for (const auto& a : r.aggregates) {
      if (a.task != task || a.noise != noise || a.trials == 0) continue;
      if (a.algorithm == generative) gen[a.m] = a.mean;
      if (a.algorithm == baseline) base[a.m] = a.mean;
    }
    SaturationReport rep;
    rep.task = task;
    rep.noise = noise;
    for (const auto& [m, g] : gen) {
      auto it = base.find(m);
      if (it != base.end() && it->second < g) {
        rep.crossover_m = m;
        break;
      }
    }
    std::vector<std::size_t> ms;
    std::vector<double> means;
    for (const auto& [m, g] : gen) {
      ms.push_back(m);
      means.push_back(g);
    }
    for (std::size_t i = 0; i + 1 < means.size(); ++i) {
      bool flat = true;
      for (std::size_t j = i + 1; j < means.size(); ++j) {
        if (means[j] < 0.9 * means[j - 1]) flat = false;
      }
      if (flat) {
        rep.plateau_onset_m = ms[i];
        const std::size_t cnt = means.size() - i;
        double mx = 0.0, my = 0.0;
        for (std::size_t j = i; j < means.size(); ++j) {
          mx += static_cast<double>(ms[j]);
          my += means[j];
        }
        mx /= static_cast<double>(cnt);
        my /= static_cast<double>(cnt);
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t j = i; j < means.size(); ++j) {
          sxy += (static_cast<double>(ms[j]) - mx) * (means[j] - my);
          sxx += (static_cast<double>(ms[j]) - mx) * (static_cast<double>(ms[j]) - mx);
        }
        rep.plateau_slope = sxx > 0.0 ? sxy / sxx : 0.0;
        rep.plateau_level = my;
        break;
      }
    }
    const double floor = std::max(noise * noise / static_cast<double>(std::max<std::size_t>(n, 1)), 1e-8);
    rep.saturated = rep.plateau_onset_m.has_value() && rep.plateau_level > floor;
    std::ostringstream os;
    os << (rep.crossover_m ? "crossover at m=" + std::to_string(*rep.crossover_m) : std::string("no crossover"));
    if (rep.saturated) {
      os << "; saturates from m=" << *rep.plateau_onset_m << " at " << short_double(rep.plateau_level);
    } else {
      os << "; no saturation above noise floor";
    }
    rep.summary = os.str();
    out.push_back(std::move(rep));
  }
  return out;
}

namespace {
std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}
}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidArgument, "spearman: need two equal-length samples");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace gencs
