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
#include "gencs/harness.hpp"

#include <png.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

using namespace gencs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("gencs_test_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json small_spec() {
  return json::parse(R"({
    "name": "small",
    "seed": 5,
    "trials": 3,
    "generator": {"random": {"k": 4, "n": 64, "depth": 2, "width": 16, "seed": 2}},
    "dataset": {"kind": "in_range", "seed": 7, "shape": {"height": 8, "width": 8}},
    "tasks": [{"kind": "identity"},
              {"kind": "gaussian", "m": [10, 30], "noise": [0.0, 0.05]}],
    "algorithms": [{"kind": "generative", "config": {"restarts": 3, "steps_per_restart": 400, "learning_rate": 0.05}},
                   {"kind": "lasso", "basis": "dct", "shrinkage": 0.01, "max_iters": 300}]
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

TrialRecord record(const std::string& task, const std::string& alg, std::size_t m, double noise, std::size_t t,
                   double err) {
  TrialRecord r;
  r.task = task;
  r.algorithm = alg;
  r.m = m;
  r.noise = noise;
  r.trial = t;
  r.per_pixel_error = err;
  return r;
}

}  // namespace

TEST_CASE("spec parsing fills defaults and labels") {
  const auto spec = parse_experiment(small_spec());
  CHECK(spec.name == "small");
  CHECK(spec.trials == 3);
  CHECK(spec.generator.random.k == 4);
  CHECK(spec.generator.random.hidden == Activation::relu());
  CHECK(spec.dataset.count == 3);
  REQUIRE(spec.tasks.size() == 2);
  CHECK(spec.tasks[0].label == "identity");
  CHECK(spec.tasks[1].m_values == std::vector<std::size_t>{10, 30});
  CHECK(spec.tasks[1].noise_levels == std::vector<double>{0.0, 0.05});
  REQUIRE(spec.algorithms.size() == 2);
  CHECK(spec.algorithms[0].label == "generative");
  CHECK(spec.algorithms[0].recovery.restarts == 3);
  CHECK(spec.algorithms[1].label == "lasso-dct");
  CHECK(spec.algorithms[1].basis == BasisKind::DCT2D);
  CHECK(spec.algorithms[1].lasso.max_iters == 300);
  CHECK(spec.output_dir.empty());
}

TEST_CASE("spec parsing errors") {
  auto j = small_spec();
  j["tasks"][0]["kind"] = "fourier";
  CHECK(code_of([&] { parse_experiment(j); }) == ErrorCode::InvalidArgument);
  j = small_spec();
  j["trials"] = 0;
  CHECK(code_of([&] { parse_experiment(j); }) == ErrorCode::InvalidArgument);
  j = small_spec();
  j["dataset"]["count"] = 2;
  CHECK(code_of([&] { parse_experiment(j); }) == ErrorCode::InvalidArgument);
  j = small_spec();
  j["algorithms"][1]["basis"] = "db4";
  CHECK(code_of([&] { parse_experiment(j); }) == ErrorCode::InvalidArgument);
  j = small_spec();
  j["algorithms"][0]["config"]["profile"] = "imagenet";
  CHECK(code_of([&] { parse_experiment(j); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { load_experiment("/nonexistent/gencs/spec.json"); }) == ErrorCode::Io);
}

TEST_CASE("recovery config json round trip") {
  auto c = parse_recovery_config(json{{"profile", "mnist"}, {"learning_rate", 0.02}, {"latent_radius", 3.0}});
  CHECK(c.lambda == 0.1);
  CHECK(c.learning_rate == 0.02);
  REQUIRE(c.latent_constraint.has_value());
  CHECK(c.latent_constraint->radius == 3.0);
  const auto back = parse_recovery_config(to_json(c));
  CHECK(back.lambda == c.lambda);
  CHECK(back.learning_rate == c.learning_rate);
  CHECK(back.restarts == c.restarts);
  CHECK(back.latent_constraint->radius == 3.0);
  CHECK(parse_recovery_config(json{{"profile", "celeba"}}).restarts == 2);
  CHECK(parse_lasso_config(json{{"solver", "ista"}}).solver == LassoSolver::ISTA);
}

TEST_CASE("in-range identity task recovers almost exactly") {
  auto j = small_spec();
  j["tasks"] = json::array({json{{"kind", "identity"}}});
  j["algorithms"] = json::array({j["algorithms"][0]});
  const auto r = run_experiment(parse_experiment(j));
  CHECK(r.all_ok());
  REQUIRE(r.aggregates.size() == 1);
  CHECK(r.aggregates[0].m == 64);
  CHECK(r.aggregates[0].trials == 3);
  CHECK(r.aggregates[0].mean <= 1e-4);
}

TEST_CASE("runs are byte-deterministic across worker counts") {
  const auto dir = scratch("det");
  auto j = small_spec();
  j["output_dir"] = (dir / "a").string();
  j["workers"] = 1;
  const auto a = run_experiment(parse_experiment(j));
  j["output_dir"] = (dir / "b").string();
  j["workers"] = 4;
  const auto b = run_experiment(parse_experiment(j));
  CHECK(a.all_ok());
  CHECK(raw_csv(a) == raw_csv(b));
  CHECK(aggregate_csv(a) == aggregate_csv(b));
  CHECK(slurp(dir / "a" / "raw.csv") == slurp(dir / "b" / "raw.csv"));
  CHECK(slurp(dir / "a" / "agg.csv") == slurp(dir / "b" / "agg.csv"));
  CHECK(fs::exists(dir / "a" / "timing.csv"));
  CHECK(fs::exists(dir / "a" / "plots" / "gaussian_noise0_error_vs_m.svg"));
  CHECK(fs::exists(dir / "a" / "plots" / "gaussian_m10_error_vs_noise.svg"));
  // identity x 2 algorithms x 3 trials + gaussian x 2 algorithms x 2 m x 2 noise x 3 trials
  CHECK(a.trials.size() == 6 + 24);
  CHECK(a.aggregates.size() == 2 + 8);
  // Canonical order: task, algorithm, m, noise, trial.
  CHECK(a.trials[0].task == "identity");
  CHECK(a.trials[6].task == "gaussian");
  CHECK(a.trials[6].algorithm == "generative");
  CHECK(a.trials[6].m == 10);
  CHECK(a.trials[9].noise == 0.05);
  const std::string raw = raw_csv(a);
  CHECK(raw.rfind("task,algorithm,m,noise,trial,per_pixel_error,measurement_error,status\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("per-task errors are recorded and the run continues") {
  auto j = small_spec();
  j["tasks"] = json::array({json{{"kind", "gaussian"}, {"m", {10, 100}}}, json{{"kind", "identity"}}});
  j["algorithms"] = json::array({j["algorithms"][0]});
  const auto r = run_experiment(parse_experiment(j));
  CHECK_FALSE(r.all_ok());
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].find("exceeds n") != std::string::npos);
  std::size_t ok = 0;
  for (const auto& t : r.trials) ok += t.error.empty() ? 1 : 0;
  CHECK(ok == 6);
  CHECK(raw_csv(r).find(",error\n") != std::string::npos);
}

TEST_CASE("missing generator file is a setup error") {
  auto j = small_spec();
  j["generator"] = json{{"path", "/nonexistent/gencs/g.genw"}};
  const auto r = run_experiment(parse_experiment(j));
  CHECK_FALSE(r.all_ok());
  CHECK(r.trials.empty());
}

TEST_CASE("superres task on an image directory") {
  const auto dir = scratch("images");
  const ImageShape shape{4, 4, 1};
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    std::vector<double> px(16);
    for (auto& v : px) v = rng.uniform();
    save_f32_image(dir / ("img" + std::to_string(i) + ".f32"), px);
  }
  // A PNG is picked up too and scaled to [0, 1].
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = 4;
  img.height = 4;
  img.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> gray(16);
  for (int i = 0; i < 16; ++i) gray[i] = static_cast<png_byte>(i * 17);
  REQUIRE(png_image_write_to_file(&img, (dir / "img5.png").string().c_str(), 0, gray.data(), 0, nullptr));
  const auto loaded = load_image(dir / "img5.png", shape, PixelRange::Unit);
  CHECK(loaded[15] == 1.0);
  CHECK(loaded[1] == doctest::Approx(17.0 / 255.0));
  CHECK(load_image(dir / "img5.png", shape, PixelRange::Symmetric)[0] == -1.0);

  json j{{"trials", 6},
         {"seed", 1},
         {"generator", {{"random", {{"k", 3}, {"n", 16}, {"width", 8}}}}},
         {"dataset", {{"kind", "image_dir"}, {"path", dir.string()}, {"count", 6}, {"seed", 4},
                      {"shape", {{"height", 4}, {"width", 4}}}}},
         {"tasks", {{{"kind", "superres"}, {"pool", 2}, {"stride", 2}}}},
         {"algorithms", {{{"kind", "lasso"}, {"basis", "db1"}, {"shrinkage", 1e-3}},
                         {{"kind", "generative"}, {"config", {{"restarts", 1}, {"steps_per_restart", 50}}}}}}};
  const auto r = run_experiment(parse_experiment(j));
  CHECK(r.all_ok());
  REQUIRE(r.aggregates.size() == 2);
  CHECK(r.aggregates[0].m == 4);
  CHECK(r.aggregates[0].trials == 6);

  j["trials"] = 7;
  j["dataset"]["count"] = 7;
  CHECK_FALSE(run_experiment(parse_experiment(j)).all_ok());
  fs::remove_all(dir);
}

TEST_CASE("aggregate uses the normal approximation") {
  std::vector<TrialRecord> t{record("a", "g", 5, 0.0, 0, 1.0), record("a", "g", 5, 0.0, 1, 2.0),
                             record("a", "g", 5, 0.0, 2, 3.0), record("a", "g", 6, 0.0, 0, 4.0)};
  t.push_back(record("a", "g", 6, 0.0, 1, 0.0));
  t.back().error = "boom";
  const auto agg = aggregate(t);
  REQUIRE(agg.size() == 2);
  CHECK(agg[0].mean == 2.0);
  CHECK(agg[0].stderr_mean == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(agg[0].ci_low == doctest::Approx(2.0 - 1.96 / std::sqrt(3.0)));
  CHECK(agg[0].ci_high == doctest::Approx(2.0 + 1.96 / std::sqrt(3.0)));
  CHECK(agg[1].trials == 1);
  CHECK(agg[1].mean == 4.0);
  CHECK(agg[1].stderr_mean == 0.0);
}

TEST_CASE("saturation report") {
  SweepResult r;
  // Generative plateaus at 0.02 from m = 40; the baseline keeps improving.
  const std::vector<std::size_t> ms{10, 20, 40, 80, 160};
  const std::vector<double> gen{0.5, 0.1, 0.02, 0.0195, 0.0194};
  const std::vector<double> base{0.9, 0.5, 0.2, 0.05, 0.01};
  for (std::size_t i = 0; i < ms.size(); ++i) {
    r.trials.push_back(record("g", "gen", ms[i], 0.0, 0, gen[i]));
  }
  for (std::size_t i = 0; i < ms.size(); ++i) {
    r.trials.push_back(record("g", "lasso", ms[i], 0.0, 0, base[i]));
  }
  r.aggregates = aggregate(r.trials);
  const auto rep = compare_saturation(r, "gen", "lasso", 100);
  REQUIRE(rep.size() == 1);
  REQUIRE(rep[0].crossover_m.has_value());
  CHECK(*rep[0].crossover_m == 160);
  REQUIRE(rep[0].plateau_onset_m.has_value());
  CHECK(*rep[0].plateau_onset_m == 40);
  CHECK(rep[0].saturated);
  CHECK(rep[0].plateau_slope < 0.0);
  CHECK(rep[0].plateau_slope > -1e-5);

  // In-range data: error keeps falling to the floor, the baseline never wins.
  SweepResult clean;
  const std::vector<double> exact{1e-2, 1e-5, 1e-12, 1e-14, 1e-15};
  for (std::size_t i = 0; i < ms.size(); ++i) clean.trials.push_back(record("g", "gen", ms[i], 0.0, 0, exact[i]));
  for (std::size_t i = 0; i < ms.size(); ++i) clean.trials.push_back(record("g", "lasso", ms[i], 0.0, 0, base[i]));
  clean.aggregates = aggregate(clean.trials);
  const auto c = compare_saturation(clean, "gen", "lasso", 100);
  REQUIRE(c.size() == 1);
  CHECK_FALSE(c[0].crossover_m.has_value());
  CHECK_FALSE(c[0].saturated);
  CHECK(c[0].summary.find("no crossover") != std::string::npos);
}

TEST_CASE("spearman") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(spearman(x, std::vector<double>{10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman(x, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman(x, std::vector<double>{1, 3, 2, 4}) == doctest::Approx(0.8));
  // Ties share their average rank: ranks (1.5, 1.5, 3, 4) against (1, 2, 3, 4).
  CHECK(spearman(std::vector<double>{5, 5, 6, 7}, x) == doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)));
  CHECK(code_of([] { spearman(std::vector<double>{1}, std::vector<double>{1}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("svg chart") {
  Series s{"gen", {10, 20, 40}, {0.1, 0.01, 0.001}, {0.05, 0.005, 0.0005}, {0.15, 0.015, 0.0015}};
  const auto svg = svg_line_chart("title", "m", "error", {s});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find(">gen<") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg_line_chart("empty", "x", "y", {}).find("</svg>") != std::string::npos);
}

TEST_CASE("error decreases with m on in-range data") {
  json j{{"trials", 8},
         {"seed", 3},
         {"generator", {{"random", {{"k", 4}, {"n", 100}, {"width", 20}, {"seed", 6}}}}},
         {"dataset", {{"kind", "in_range"}, {"seed", 2}}},
         {"tasks", {{{"kind", "gaussian"}, {"m", {2, 4, 8, 16, 32}}, {"noise", {0.05}}}}},
         {"algorithms", {{{"kind", "generative"}, {"config", {{"restarts", 3}, {"steps_per_restart", 300},
                                                              {"learning_rate", 0.05}}}}}}};
  const auto r = run_experiment(parse_experiment(j));
  REQUIRE(r.all_ok());
  REQUIRE(r.aggregates.size() == 5);
  std::size_t inversions = 0;
  for (std::size_t i = 1; i < 5; ++i) inversions += r.aggregates[i].mean > r.aggregates[i - 1].mean ? 1 : 0;
  CHECK(inversions <= 1);
  CHECK(r.aggregates.back().mean < r.aggregates.front().mean);
}
