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

// gencs command-line tool. Links only the C interface.

#include <gencs/gencs.h>

#include <CLI11.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Failure {
  gencs_status status;
};

void check(gencs_status s) {
  if (s != GENCS_OK) throw Failure{s};
}

struct NetDeleter {
  void operator()(gencs_net* p) const { gencs_net_free(p); }
};
struct OpDeleter {
  void operator()(gencs_op* p) const { gencs_op_free(p); }
};
struct ObsDeleter {
  void operator()(gencs_observation* p) const { gencs_observation_free(p); }
};
using NetPtr = std::unique_ptr<gencs_net, NetDeleter>;
using OpPtr = std::unique_ptr<gencs_op, OpDeleter>;
using ObsPtr = std::unique_ptr<gencs_observation, ObsDeleter>;

NetPtr load_net(const std::string& path) {
  gencs_net* net = nullptr;
  check(gencs_net_load(path.c_str(), &net));
  return NetPtr(net);
}

std::string read_text(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    throw Failure{GENCS_E_IO};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Takes ownership of a library-allocated string.
void write_json(char* text, const std::string& out) {
  std::unique_ptr<char, void (*)(char*)> guard(text, gencs_string_free);
  if (out.empty() || out == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(out, std::ios::trunc);
  if (!f) {
    std::cerr << "error: cannot write " << out << "\n";
    throw Failure{GENCS_E_IO};
  }
  f << text << "\n";
}

std::vector<double> read_f32(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    throw Failure{GENCS_E_IO};
  }
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) {
    std::cerr << "error: " << path << " is not a float32 array\n";
    throw Failure{GENCS_E_MALFORMED_FILE};
  }
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    float f;
    std::memcpy(&f, bytes.data() + 4 * i, 4);
    out[i] = f;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gencs: compressed sensing with generative priors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gencs_version()));

  // recover
  auto* recover = app.add_subcommand("recover", "Recover a signal by descending the generator's latent space");
  std::string rec_weights, rec_obs, rec_config, rec_out;
  recover->add_option("--weights", rec_weights, "GENW generator file")->required();
  recover->add_option("--observation", rec_obs, "GOBS observation file")->required();
  recover->add_option("--config", rec_config, "Recovery config JSON");
  recover->add_option("--out", rec_out, "Result JSON (default stdout)");

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Lasso baseline in a sparsifying basis");
  std::string base_method, base_obs, base_config, base_out;
  baseline->add_option("--method", base_method, "Baseline method")
      ->required()
      ->check(CLI::IsMember({"lasso-pixel", "lasso-dct", "lasso-db1"}));
  baseline->add_option("--observation", base_obs, "GOBS observation file")->required();
  baseline->add_option("--config", base_config, "Lasso config JSON (height/width for dct and db1)");
  baseline->add_option("--out", base_out, "Result JSON (default stdout)");

  // srec
  auto* srec = app.add_subcommand("srec", "Empirical S-REC sweep over m");
  std::string srec_weights, srec_out;
  std::vector<std::size_t> srec_m{5, 10, 20, 40, 80};
  std::size_t srec_pairs = 10000, srec_seeds = 20, srec_workers = 0;
  std::uint64_t srec_seed = 0;
  double srec_radius = 0.0;
  srec->add_option("--weights", srec_weights, "GENW generator file")->required();
  srec->add_option("--m-sweep", srec_m, "Comma-separated m values")->delimiter(',');
  srec->add_option("--pairs", srec_pairs, "Latent pairs per (seed, m)");
  srec->add_option("--seeds", srec_seeds, "Matrix seeds");
  srec->add_option("--seed", srec_seed, "Base seed");
  srec->add_option("--latent-radius", srec_radius, "Sample z uniformly in this ball (default: N(0, I))");
  srec->add_option("--workers", srec_workers, "Worker threads (0: GENCS_WORKERS or hardware)");
  srec->add_option("--out", srec_out, "Report JSON (default stdout)");

  // regions
  auto* regions = app.add_subcommand("regions", "Count cells of a random hyperplane arrangement");
  std::size_t reg_k = 2, reg_c = 3;
  std::uint64_t reg_seed = 0;
  std::string reg_weights;
  regions->add_option("--k", reg_k, "Ambient dimension");
  regions->add_option("--c", reg_c, "Number of hyperplanes");
  regions->add_option("--seed", reg_seed, "Seed");
  regions->add_option("--weights", reg_weights, "Count the linear regions of a one-layer GENW net instead");

  // run
  auto* run = app.add_subcommand("run", "Run an experiment spec");
  std::string run_spec;
  run->add_option("spec", run_spec, "Experiment JSON")->required();

  // sense
  auto* sense = app.add_subcommand("sense", "Measure a signal and write a GOBS observation");
  std::string sense_weights, sense_truth, sense_out;
  std::uint64_t latent_seed = 0, a_seed = 0, noise_seed = 0;
  std::size_t sense_m = 0;
  double noise = 0.0;
  std::vector<std::size_t> superres;
  bool identity = false;
  sense->add_option("--weights", sense_weights, "Draw the truth in range: x* = G(z*), z* ~ N(0, I)");
  sense->add_option("--latent-seed", latent_seed, "Seed for z*");
  sense->add_option("--truth", sense_truth, "Truth as raw little-endian float32");
  sense->add_option("--m", sense_m, "Gaussian measurements");
  sense->add_option("--a-seed", a_seed, "Seed for A");
  sense->add_option("--superres", superres, "pool,stride,height,width,channels")->delimiter(',')->expected(5);
  sense->add_flag("--identity", identity, "A = I");
  sense->add_option("--noise", noise, "Noise level sqrt(E|eta|^2)");
  sense->add_option("--noise-seed", noise_seed, "Seed for eta");
  sense->add_option("--out", sense_out, "GOBS file")->required();

  // random-net
  auto* rnet = app.add_subcommand("random-net", "Write a random generator");
  std::string rnet_spec, rnet_out;
  std::uint64_t rnet_seed = 0;
  rnet->add_option("--spec", rnet_spec, "Random net spec JSON");
  rnet->add_option("--seed", rnet_seed, "Seed");
  rnet->add_option("--out", rnet_out, "GENW file")->required();

  // lipschitz
  auto* lip = app.add_subcommand("lipschitz", "Print the Lipschitz upper bound of a generator");
  std::string lip_weights;
  lip->add_option("--weights", lip_weights, "GENW generator file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*recover) {
      auto net = load_net(rec_weights);
      gencs_observation* obs = nullptr;
      check(gencs_observation_load(rec_obs.c_str(), &obs));
      ObsPtr guard(obs);
      const auto cfg = read_text(rec_config);
      char* out = nullptr;
      check(gencs_recover(net.get(), obs, cfg.c_str(), &out));
      write_json(out, rec_out);
    } else if (*baseline) {
      gencs_observation* obs = nullptr;
      check(gencs_observation_load(base_obs.c_str(), &obs));
      ObsPtr guard(obs);
      const auto cfg = read_text(base_config);
      char* out = nullptr;
      check(gencs_baseline(obs, base_method.c_str(), cfg.c_str(), &out));
      write_json(out, base_out);
    } else if (*srec) {
      auto net = load_net(srec_weights);
      std::ostringstream cfg;
      cfg << "{\"m_values\":[";
      for (std::size_t i = 0; i < srec_m.size(); ++i) cfg << (i ? "," : "") << srec_m[i];
      cfg << "],\"pairs\":" << srec_pairs << ",\"seeds\":" << srec_seeds << ",\"seed\":" << srec_seed
          << ",\"workers\":" << srec_workers;
      if (srec_radius > 0.0) cfg << ",\"latent_radius\":" << srec_radius;
      cfg << "}";
      char* out = nullptr;
      check(gencs_srec_sweep(net.get(), cfg.str().c_str(), &out));
      write_json(out, srec_out);
    } else if (*regions) {
      char* out = nullptr;
      if (!reg_weights.empty()) {
        auto net = load_net(reg_weights);
        check(gencs_net_count_regions(net.get(), &out));
      } else {
        check(gencs_count_regions_random(reg_k, reg_c, reg_seed, &out));
      }
      write_json(out, "");
    } else if (*run) {
      char* out = nullptr;
      check(gencs_run_experiment(run_spec.c_str(), &out));
      const bool ok = std::strstr(out, "\"all_ok\": true") != nullptr;
      write_json(out, "");
      return ok ? 0 : 1;
    } else if (*sense) {
      std::vector<double> x;
      if (!sense_weights.empty()) {
        auto net = load_net(sense_weights);
        std::size_t k = 0, n = 0;
        check(gencs_net_dims(net.get(), &k, &n, nullptr));
        std::vector<double> z(k);
        check(gencs_latent_sample(latent_seed, z.data(), k));
        x.resize(n);
        check(gencs_net_forward(net.get(), z.data(), k, x.data(), n));
      } else if (!sense_truth.empty()) {
        x = read_f32(sense_truth);
      } else {
        std::cerr << "error: sense needs --weights or --truth\n";
        return 2;
      }
      gencs_op* op = nullptr;
      if (identity) {
        check(gencs_op_identity(x.size(), &op));
      } else if (!superres.empty()) {
        check(gencs_op_superres(superres[0], superres[0], superres[1], superres[2], superres[3], superres[4], &op));
      } else if (sense_m > 0) {
        check(gencs_op_gaussian(a_seed, sense_m, x.size(), &op));
      } else {
        std::cerr << "error: sense needs --m, --superres or --identity\n";
        return 2;
      }
      OpPtr opguard(op);
      gencs_observation* obs = nullptr;
      check(gencs_sense(op, x.data(), x.size(), noise, noise_seed, &obs));
      ObsPtr guard(obs);
      check(gencs_observation_save(obs, sense_out.c_str()));
    } else if (*rnet) {
      const auto spec = read_text(rnet_spec);
      gencs_net* net = nullptr;
      check(gencs_net_random(spec.c_str(), rnet_seed, &net));
      NetPtr guard(net);
      check(gencs_net_save(net, rnet_out.c_str()));
    } else if (*lip) {
      auto net = load_net(lip_weights);
      char* out = nullptr;
      check(gencs_net_lipschitz(net.get(), &out));
      write_json(out, "");
    }
  } catch (const Failure& f) {
    const char* msg = gencs_last_error();
    std::cerr << "error: " << gencs_status_name(f.status);
    if (msg && *msg) std::cerr << ": " << msg;
    std::cerr << "\n";
    return 1;
  }
  return 0;
}
