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

#include "gencs/gencs.h"

#include "gencs/error.hpp"
#include "gencs/harness.hpp"

#include <cstring>
#include <new>

using nlohmann::json;

struct gencs_net {
  gencs::GeneratorNet net;
};
struct gencs_op {
  gencs::MeasurementOpPtr op;
};
struct gencs_observation {
  gencs::Observation obs;
};

namespace {

thread_local std::string g_last_error;

gencs_status set_error(gencs_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename Fn>
gencs_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return GENCS_OK;
  } catch (const gencs::Error& e) {
    return set_error(static_cast<gencs_status>(e.code()), e.what());
  } catch (const json::exception& e) {
    return set_error(GENCS_E_INVALID_ARGUMENT, std::string("json: ") + e.what());
  } catch (const std::bad_alloc&) {
    return set_error(GENCS_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(GENCS_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(GENCS_E_INTERNAL, "unknown exception");
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) gencs::fail(gencs::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

json parse_optional(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  return json::parse(text);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(const json& j, char** out) {
  need(out, "output pointer");
  *out = dup_string(j.dump(2));
}

void check_len(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    gencs::fail(gencs::ErrorCode::DimensionMismatch,
                std::string(what) + " has length " + std::to_string(got) + ", expected " + std::to_string(want));
  }
}

json region_json(const gencs::RegionCount& r) {
  return json{{"k", r.k}, {"c", r.c}, {"exact_count", r.exact_count}, {"bound", r.bound},
              {"matches_bound", r.exact_count == r.bound}};
}

json region_json(std::size_t k, const std::vector<gencs::Hyperplane>& planes) {
  json j = region_json(gencs::count_regions(k, planes));
  if (!planes.empty() && k >= 1) {
    const auto inc = gencs::incremental_count(k, planes);
    j["recursion"] = json{{"with_plane", inc.with_plane},
                          {"without_plane", inc.without_plane},
                          {"on_plane", inc.on_plane},
                          {"holds", inc.recursion_holds()}};
  }
  return j;
}

}  // namespace

extern "C" {

const char* gencs_version(void) { return "0.1.0"; }

const char* gencs_last_error(void) { return g_last_error.c_str(); }

const char* gencs_status_name(gencs_status s) {
  switch (s) {
    case GENCS_OK: return "ok";
    case GENCS_E_INVALID_ARGUMENT: return "invalid argument";
    case GENCS_E_DIMENSION_MISMATCH: return "dimension mismatch";
    case GENCS_E_NON_FINITE: return "non-finite value";
    case GENCS_E_MALFORMED_FILE: return "malformed file";
    case GENCS_E_DIMENSION_INCONSISTENCY: return "dimension inconsistency";
    case GENCS_E_UNSUPPORTED_ACTIVATION: return "unsupported activation";
    case GENCS_E_CHECKSUM_MISMATCH: return "checksum mismatch";
    case GENCS_E_IO: return "i/o error";
    case GENCS_E_ALL_RESTARTS_FAILED: return "all restarts failed";
    case GENCS_E_BUDGET_EXCEEDED: return "budget exceeded";
    case GENCS_E_DEGENERATE_SAMPLE: return "degenerate sample";
    case GENCS_E_MISSING_TRUTH: return "missing truth";
    case GENCS_E_INTERNAL: return "internal error";
  }
  return "unknown";
}

void gencs_string_free(char* s) { std::free(s); }

gencs_status gencs_net_load(const char* path, gencs_net** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "output pointer");
    *out = new gencs_net{gencs::load_weights(path)};
  });
}

gencs_status gencs_net_save(const gencs_net* net, const char* path) {
  return guarded([&] {
    need(net, "net");
    need(path, "path");
    gencs::save_weights(net->net, path);
  });
}

gencs_status gencs_net_random(const char* spec_json, uint64_t seed, gencs_net** out) {
  return guarded([&] {
    need(out, "output pointer");
    const auto spec = gencs::parse_random_net_spec(parse_optional(spec_json));
    gencs::Rng rng(seed);
    *out = new gencs_net{gencs::random_net(rng, spec)};
  });
}

void gencs_net_free(gencs_net* net) { delete net; }

gencs_status gencs_net_dims(const gencs_net* net, size_t* k, size_t* n, size_t* depth) {
  return guarded([&] {
    need(net, "net");
    if (k) *k = net->net.input_dim();
    if (n) *n = net->net.output_dim();
    if (depth) *depth = net->net.depth();
  });
}

gencs_status gencs_net_forward(const gencs_net* net, const double* z, size_t k, double* x, size_t n) {
  return guarded([&] {
    need(net, "net");
    need(z, "z");
    need(x, "x");
    check_len(k, net->net.input_dim(), "z");
    check_len(n, net->net.output_dim(), "x");
    const auto out = net->net.forward({z, k});
    std::copy(out.begin(), out.end(), x);
  });
}

gencs_status gencs_net_vjp(const gencs_net* net, const double* z, size_t k, const double* cotangent, size_t n,
                           double* grad) {
  return guarded([&] {
    need(net, "net");
    need(z, "z");
    need(cotangent, "cotangent");
    need(grad, "grad");
    check_len(k, net->net.input_dim(), "z");
    check_len(n, net->net.output_dim(), "cotangent");
    const auto out = net->net.vjp({z, k}, {cotangent, n});
    std::copy(out.begin(), out.end(), grad);
  });
}

gencs_status gencs_latent_sample(uint64_t seed, double* z, size_t k) {
  return guarded([&] {
    need(z, "z");
    gencs::Rng rng(seed);
    const auto v = rng.normal_vector(k);
    std::copy(v.begin(), v.end(), z);
  });
}

gencs_status gencs_net_lipschitz(const gencs_net* net, char** json_out) {
  return guarded([&] {
    need(net, "net");
    const auto b = gencs::lipschitz_bound(net->net);
    emit(json{{"per_layer", b.per_layer}, {"product", b.product}, {"uniform", b.uniform}}, json_out);
  });
}

gencs_status gencs_op_gaussian(uint64_t seed, size_t m, size_t n, gencs_op** out) {
  return guarded([&] {
    need(out, "output pointer");
    *out = new gencs_op{std::make_shared<const gencs::MeasurementOp>(gencs::MeasurementOp::gaussian(seed, m, n))};
  });
}

gencs_status gencs_op_superres(size_t pool_h, size_t pool_w, size_t stride, size_t height, size_t width,
                               size_t channels, gencs_op** out) {
  return guarded([&] {
    need(out, "output pointer");
    *out = new gencs_op{std::make_shared<const gencs::MeasurementOp>(
        gencs::MeasurementOp::superres({pool_h, pool_w, stride, height, width, channels}))};
  });
}

gencs_status gencs_op_identity(size_t n, gencs_op** out) {
  return guarded([&] {
    need(out, "output pointer");
    *out = new gencs_op{std::make_shared<const gencs::MeasurementOp>(gencs::MeasurementOp::identity(n))};
  });
}

void gencs_op_free(gencs_op* op) { delete op; }

gencs_status gencs_op_dims(const gencs_op* op, size_t* m, size_t* n) {
  return guarded([&] {
    need(op, "op");
    if (m) *m = op->op->m();
    if (n) *n = op->op->n();
  });
}

gencs_status gencs_op_apply(const gencs_op* op, const double* x, size_t n, double* y, size_t m) {
  return guarded([&] {
    need(op, "op");
    need(x, "x");
    need(y, "y");
    check_len(n, op->op->n(), "x");
    check_len(m, op->op->m(), "y");
    const auto out = op->op->apply({x, n});
    std::copy(out.begin(), out.end(), y);
  });
}

gencs_status gencs_sense(const gencs_op* op, const double* x, size_t n, double noise_level, uint64_t noise_seed,
                         gencs_observation** out) {
  return guarded([&] {
    need(op, "op");
    need(x, "x");
    need(out, "output pointer");
    check_len(n, op->op->n(), "x");
    *out = new gencs_observation{gencs::sense(op->op, {x, n}, gencs::NoiseModel{noise_level, noise_seed})};
  });
}

gencs_status gencs_observation_load(const char* path, gencs_observation** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "output pointer");
    *out = new gencs_observation{gencs::load_observation(path)};
  });
}

gencs_status gencs_observation_save(const gencs_observation* obs, const char* path) {
  return guarded([&] {
    need(obs, "observation");
    need(path, "path");
    gencs::save_observation(obs->obs, path);
  });
}

void gencs_observation_free(gencs_observation* obs) { delete obs; }

gencs_status gencs_observation_dims(const gencs_observation* obs, size_t* m, size_t* n) {
  return guarded([&] {
    need(obs, "observation");
    if (m) *m = obs->obs.op->m();
    if (n) *n = obs->obs.op->n();
  });
}

gencs_status gencs_observation_y(const gencs_observation* obs, double* y, size_t m) {
  return guarded([&] {
    need(obs, "observation");
    need(y, "y");
    check_len(m, obs->obs.y.size(), "y");
    std::copy(obs->obs.y.begin(), obs->obs.y.end(), y);
  });
}

gencs_status gencs_recover(const gencs_net* net, const gencs_observation* obs, const char* config_json,
                           char** result_json) {
  return guarded([&] {
    need(net, "net");
    need(obs, "observation");
    const auto config = gencs::parse_recovery_config(parse_optional(config_json));
    const auto result = gencs::recover(net->net, obs->obs, config);
    json j = gencs::to_json(result);
    j["config"] = gencs::to_json(config);
    if (obs->obs.truth) {
      const auto n = static_cast<double>(obs->obs.truth->size());
      j["per_pixel_error"] = *result.reconstruction_error / n;
      const auto check = gencs::theorem_bound_check(result, obs->obs);
      j["bound_check"] = json{{"status", gencs::to_string(check.status)},
                              {"lhs", check.lhs},
                              {"rhs", check.rhs},
                              {"margin", check.margin},
                              {"eta_norm", check.eta_norm}};
    }
    emit(j, result_json);
  });
}

gencs_status gencs_baseline(const gencs_observation* obs, const char* method, const char* config_json,
                            char** result_json) {
  return guarded([&] {
    need(obs, "observation");
    need(method, "method");
    const json cfg = parse_optional(config_json);
    const auto lasso = gencs::parse_lasso_config(cfg);
    const std::size_t n = obs->obs.op->n();
    const std::string m(method);
    gencs::SparsifyingBasis basis;
    if (m == "lasso-pixel") {
      basis = gencs::SparsifyingBasis::pixel(n);
    } else if (m == "lasso-dct" || m == "lasso-db1") {
      if (!cfg.contains("height") || !cfg.contains("width")) {
        gencs::fail(gencs::ErrorCode::InvalidArgument, m + " needs height and width");
      }
      const auto h = cfg.at("height").get<std::size_t>();
      const auto w = cfg.at("width").get<std::size_t>();
      const auto c = cfg.value("channels", std::size_t{1});
      basis = m == "lasso-dct" ? gencs::SparsifyingBasis::dct(h, w, c) : gencs::SparsifyingBasis::db1(h, w, c);
    } else {
      gencs::fail(gencs::ErrorCode::InvalidArgument,
                  "unknown method \"" + m + "\" (expected lasso-pixel, lasso-dct or lasso-db1)");
    }
    require(basis.size() == n, gencs::ErrorCode::DimensionMismatch,
            "basis size " + std::to_string(basis.size()) + " != signal length " + std::to_string(n));
    const auto r = gencs::lasso_recover(*obs->obs.op, obs->obs.y, basis, lasso);
    gencs::Vector residual = obs->obs.op->apply(r.x_hat);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= obs->obs.y[i];
    json j{{"method", m},
           {"basis", basis.name()},
           {"x_hat", r.x_hat},
           {"w_hat", r.w_hat},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"warning", r.warning},
           {"objective", r.objective},
           {"step", r.step},
           {"measurement_error", gencs::squared_norm(residual)},
           {"kkt_residual", gencs::lasso_kkt_residual(*obs->obs.op, obs->obs.y, basis, r.w_hat, lasso.shrinkage)}};
    if (obs->obs.truth) {
      gencs::Vector diff = r.x_hat;
      for (std::size_t i = 0; i < n; ++i) diff[i] -= (*obs->obs.truth)[i];
      j["reconstruction_error"] = gencs::squared_norm(diff);
      j["per_pixel_error"] = gencs::squared_norm(diff) / static_cast<double>(n);
    }
    emit(j, result_json);
  });
}

gencs_status gencs_srec_sweep(const gencs_net* net, const char* config_json, char** report_json) {
  return guarded([&] {
    need(net, "net");
    const auto config = gencs::parse_srec_config(parse_optional(config_json));
    emit(gencs::to_json(gencs::srec_sweep(net->net, config)), report_json);
  });
}

gencs_status gencs_count_regions_random(size_t k, size_t c, uint64_t seed, char** json_out) {
  return guarded([&] {
    gencs::Rng rng(seed);
    const auto planes = gencs::random_hyperplanes(rng, k, c);
    emit(region_json(k, planes), json_out);
  });
}

gencs_status gencs_count_regions(size_t k, size_t c, const double* normals, const double* offsets, char** json_out) {
  return guarded([&] {
    if (c > 0) {
      need(normals, "normals");
      need(offsets, "offsets");
    }
    std::vector<gencs::Hyperplane> planes(c);
    for (std::size_t i = 0; i < c; ++i) {
      planes[i].normal.assign(normals + i * k, normals + (i + 1) * k);
      planes[i].offset = offsets[i];
    }
    emit(region_json(k, planes), json_out);
  });
}

gencs_status gencs_net_count_regions(const gencs_net* net, char** json_out) {
  return guarded([&] {
    need(net, "net");
    emit(region_json(gencs::count_net_regions(net->net)), json_out);
  });
}

gencs_status gencs_run_experiment(const char* spec_path, char** summary_json) {
  return guarded([&] {
    need(spec_path, "spec path");
    const auto spec = gencs::load_experiment(spec_path);
    const auto r = gencs::run_experiment(spec);
    json j{{"name", spec.name},
           {"output_dir", spec.output_dir.string()},
           {"trials", r.trials.size()},
           {"errors", r.errors},
           {"all_ok", r.all_ok()}};
    // Saturation summary for the first generative / lasso pair.
    const gencs::AlgorithmSpec* gen = nullptr;
    const gencs::AlgorithmSpec* base = nullptr;
    for (const auto& a : spec.algorithms) {
      if (a.kind == gencs::AlgorithmSpec::Kind::Generative && !gen) gen = &a;
      if (a.kind == gencs::AlgorithmSpec::Kind::Lasso && !base) base = &a;
    }
    if (gen && base && !r.aggregates.empty()) {
      json sat = json::array();
      for (const auto& s : gencs::compare_saturation(r, gen->label, base->label, r.signal_dim)) {
        const auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
        sat.push_back(json{{"task", s.task},
                           {"noise", s.noise},
                           {"crossover_m", opt(s.crossover_m)},
                           {"plateau_onset_m", opt(s.plateau_onset_m)},
                           {"plateau_slope", s.plateau_slope},
                           {"plateau_level", s.plateau_level},
                           {"saturated", s.saturated},
                           {"summary", s.summary}});
      }
      j["saturation"] = std::move(sat);
    }
    emit(j, summary_json);
  });
}

}  // extern "C"
