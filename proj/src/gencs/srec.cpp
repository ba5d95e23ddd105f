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

#include "gencs/srec.hpp"

#include "gencs/error.hpp"
#include "gencs/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace gencs {

Vector LatentSampler::draw(Rng& rng, std::size_t k) const {
  Vector z = rng.normal_vector(k);
  if (kind == Kind::Ball) {
    // Uniform in the ball: uniform direction, radius r·u^(1/k).
    const double norm = norm2(z);
    const double target = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(k));
    const double scale = norm > 0.0 ? target / norm : 0.0;
    for (auto& v : z) v *= scale;
  }
  return z;
}

double SrecReport::violation_fraction(double gamma, double delta) const {
  if (measured.empty()) {
    return 0.0;
  }
  std::size_t bad = 0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    if (measured[i] < gamma * distance[i] - delta) {
      ++bad;
    }
  }
  return static_cast<double>(bad) / static_cast<double>(measured.size());
}

double SrecReport::certified_delta(double gamma) const {
  double delta = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    delta = std::max(delta, gamma * distance[i] - measured[i]);
  }
  return delta;
}

namespace {

void summarize(SrecReport& r) {
  r.gamma_hat = std::numeric_limits<double>::infinity();
  r.max_ratio = 0.0;
  std::size_t expanded = 0;
  for (std::size_t i = 0; i < r.measured.size(); ++i) {
    const double ratio = r.measured[i] / r.distance[i];
    r.gamma_hat = std::min(r.gamma_hat, ratio);
    r.max_ratio = std::max(r.max_ratio, ratio);
    if (r.measured[i] > 2.0 * r.distance[i]) {
      ++expanded;
    }
  }
  r.norm_expansion_fraction = static_cast<double>(expanded) / static_cast<double>(r.measured.size());
}

}  // namespace

SrecReport estimate_srec(const GeneratorNet& g, const MeasurementOp& op, const LatentSampler& sampler,
                         std::size_t pairs, Rng& rng) {
  require(g.output_dim() == op.n(), ErrorCode::DimensionMismatch,
          "estimate_srec: generator output " + std::to_string(g.output_dim()) + " != operator n " +
              std::to_string(op.n()));
  require(pairs >= 1, ErrorCode::InvalidArgument, "estimate_srec: pairs must be >= 1");
  SrecReport r;
  r.pair_count = pairs;
  const std::size_t k = g.input_dim();
  for (std::size_t p = 0; p < pairs; ++p) {
    const Vector z1 = sampler.draw(rng, k);
    const Vector z2 = sampler.draw(rng, k);
    Vector d = g.forward(z1);
    const Vector x2 = g.forward(z2);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= x2[i];
    const double dist = norm2(d);
    if (dist < kDegeneratePairThreshold) {
      ++r.degenerate_pairs;
      continue;
    }
    r.measured.push_back(norm2(op.apply(d)));
    r.distance.push_back(dist);
  }
  if (r.measured.empty()) {
    fail(ErrorCode::DegenerateSample, "estimate_srec: all " + std::to_string(pairs) + " pairs are degenerate");
  }
  summarize(r);
  return r;
}

SrecSweep srec_sweep(const GeneratorNet& g, const SrecSweepConfig& config) {
  require(!config.m_values.empty() && config.seeds >= 1 && config.pairs >= 1, ErrorCode::InvalidArgument,
          "srec_sweep: need m values, seeds >= 1 and pairs >= 1");
  for (std::size_t m : config.m_values) {
    require(m >= 1, ErrorCode::InvalidArgument, "srec_sweep: m must be >= 1");
  }
  const std::size_t m_max = *std::max_element(config.m_values.begin(), config.m_values.end());
  const std::size_t k = g.input_dim();
  const std::size_t n = g.output_dim();

  SrecSweep out;
  out.m_values = config.m_values;
  out.gamma_hat.assign(config.seeds, std::vector<double>(config.m_values.size()));
  out.norm_expansion_fraction = out.gamma_hat;

  parallel_for(config.seeds, config.workers, [&](std::size_t s) {
    Rng matrix_rng(derive_seed(config.seed, 2 * s));
    Rng pair_rng(derive_seed(config.seed, 2 * s + 1));
    const Matrix rows = gaussian_matrix(matrix_rng, m_max, n, 1.0);

    // projections[p][i] = row_i · d_p; ‖A_m d‖² = (1/m) Σ_{i<m} projections².
    std::vector<Vector> projections;
    std::vector<double> distances;
    for (std::size_t p = 0; p < config.pairs; ++p) {
      const Vector z1 = config.sampler.draw(pair_rng, k);
      const Vector z2 = config.sampler.draw(pair_rng, k);
      Vector d = g.forward(z1);
      const Vector x2 = g.forward(z2);
      for (std::size_t i = 0; i < n; ++i) d[i] -= x2[i];
      const double dist = norm2(d);
      if (dist < kDegeneratePairThreshold) continue;
      projections.push_back(matvec(rows, d));
      distances.push_back(dist);
    }
    if (projections.empty()) {
      fail(ErrorCode::DegenerateSample, "srec_sweep: all pairs degenerate");
    }
    for (std::size_t mi = 0; mi < config.m_values.size(); ++mi) {
      const std::size_t m = config.m_values[mi];
      SrecReport r;
      for (std::size_t p = 0; p < projections.size(); ++p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += projections[p][i] * projections[p][i];
        r.measured.push_back(std::sqrt(acc / static_cast<double>(m)));
        r.distance.push_back(distances[p]);
      }
      summarize(r);
      out.gamma_hat[s][mi] = r.gamma_hat;
      out.norm_expansion_fraction[s][mi] = r.norm_expansion_fraction;
    }
  });

  // Adjacent comparisons in increasing-m order.
  std::vector<std::size_t> order(config.m_values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return config.m_values[a] < config.m_values[b]; });
  for (const auto& row : out.gamma_hat) {
    for (std::size_t i = 1; i < order.size(); ++i) {
      ++out.adjacent_comparisons;
      if (row[order[i]] >= row[order[i - 1]]) ++out.nondecreasing;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Region counting
// ---------------------------------------------------------------------------

std::uint64_t general_position_regions(std::size_t c, std::size_t k) {
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(c, i)
  for (std::size_t i = 0; i <= k && i <= c; ++i) {
    total += binom;
    binom = binom * (c - i) / (i + 1);
  }
  return total;
}

namespace {

constexpr double kCellMargin = 1e-9;
constexpr double kPivotEps = 1e-12;

// Dense tableau simplex for: maximize cᵀx subject to Ax ≤ b, x ≥ 0, b ≥ 0.
// Bland's rule keeps it from cycling on degenerate vertices.
double simplex_max(const std::vector<Vector>& a, const Vector& b, const Vector& c) {
  const std::size_t rows = a.size();
  const std::size_t vars = c.size();
  const std::size_t cols = vars + rows + 1;
  std::vector<Vector> t(rows + 1, Vector(cols, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < vars; ++j) t[r][j] = a[r][j];
    t[r][vars + r] = 1.0;
    t[r][cols - 1] = b[r];
    basis[r] = vars + r;
  }
  for (std::size_t j = 0; j < vars; ++j) t[rows][j] = -c[j];

  for (std::size_t iter = 0; iter < 10000; ++iter) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      if (t[rows][j] < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter == cols) {
      return t[rows][cols - 1];
    }
    std::size_t leave = rows;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r) {
      if (t[r][enter] > kPivotEps) {
        const double ratio = t[r][cols - 1] / t[r][enter];
        if (ratio < best - kPivotEps || (ratio <= best + kPivotEps && leave < rows && basis[r] < basis[leave])) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
    }
    if (leave == rows) {
      return std::numeric_limits<double>::infinity();
    }
    const double pivot = t[leave][enter];
    for (auto& v : t[leave]) v /= pivot;
    for (std::size_t r = 0; r <= rows; ++r) {
      if (r == leave) continue;
      const double factor = t[r][enter];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) t[r][j] -= factor * t[leave][j];
    }
    basis[leave] = enter;
  }
  fail(ErrorCode::BudgetExceeded, "region LP did not terminate");
}

// Largest t ≤ 1 with sign_i·(n_i·z + b_i) ≥ t for all i (unit normals, so t
// is a distance). Variables: z = z⁺ − z⁻ and t = t_low + u with u ≥ 0, where
// t_low makes z = 0, u = 0 feasible.
double cell_margin(const std::vector<Hyperplane>& planes, const std::vector<int>& signs, std::size_t k) {
  const std::size_t p = signs.size();
  double t_low = 1.0;
  for (std::size_t i = 0; i < p; ++i) t_low = std::min(t_low, signs[i] * planes[i].offset);
  t_low -= 1.0;

  std::vector<Vector> a;
  Vector b;
  for (std::size_t i = 0; i < p; ++i) {
    Vector row(2 * k + 1, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = -signs[i] * planes[i].normal[j];
      row[k + j] = signs[i] * planes[i].normal[j];
    }
    row[2 * k] = 1.0;
    a.push_back(std::move(row));
    b.push_back(signs[i] * planes[i].offset - t_low);
  }
  Vector cap(2 * k + 1, 0.0);
  cap[2 * k] = 1.0;
  a.push_back(cap);
  b.push_back(1.0 - t_low);

  Vector objective(2 * k + 1, 0.0);
  objective[2 * k] = 1.0;
  return t_low + simplex_max(a, b, objective);
}

std::uint64_t count_cells(const std::vector<Hyperplane>& planes, std::size_t k, std::vector<int>& signs) {
  if (signs.size() == planes.size()) {
    return 1;
  }
  std::uint64_t total = 0;
  for (int s : {+1, -1}) {
    signs.push_back(s);
    if (cell_margin(planes, signs, k) > kCellMargin) {
      total += count_cells(planes, k, signs);
    }
    signs.pop_back();
  }
  return total;
}

}  // namespace

RegionCount count_regions(std::size_t k, const std::vector<Hyperplane>& planes) {
  require(k <= kMaxRegionDim, ErrorCode::BudgetExceeded,
          "count_regions: dimension " + std::to_string(k) + " exceeds budget " + std::to_string(kMaxRegionDim));
  require(planes.size() <= kMaxRegionPlanes, ErrorCode::BudgetExceeded,
          "count_regions: " + std::to_string(planes.size()) + " hyperplanes exceed budget " +
              std::to_string(kMaxRegionPlanes));
  RegionCount out;
  out.k = k;
  out.c = planes.size();
  out.bound = general_position_regions(planes.size(), k);

  // Unit normals; planes with a vanishing normal do not cut space.
  std::vector<Hyperplane> cutting;
  for (const auto& h : planes) {
    require(h.normal.size() == k, ErrorCode::DimensionMismatch, "count_regions: normal length != k");
    const double norm = norm2(h.normal);
    if (norm < kDegeneratePairThreshold) continue;
    Hyperplane u{h.normal, h.offset / norm};
    for (auto& v : u.normal) v /= norm;
    cutting.push_back(std::move(u));
  }
  if (k == 0 || cutting.empty()) {
    out.exact_count = 1;
    return out;
  }
  std::vector<int> signs;
  out.exact_count = count_cells(cutting, k, signs);
  return out;
}

std::vector<Hyperplane> restrict_to_plane(const std::vector<Hyperplane>& planes, std::size_t index) {
  require(index < planes.size(), ErrorCode::InvalidArgument, "restrict_to_plane: index out of range");
  const Hyperplane& h = planes[index];
  const std::size_t k = h.normal.size();
  require(k >= 1, ErrorCode::InvalidArgument, "restrict_to_plane: zero-dimensional space");
  const double nn = squared_norm(h.normal);
  require(nn > 0.0, ErrorCode::InvalidArgument, "restrict_to_plane: zero normal");

  // Point on the plane and an orthonormal basis of its direction space.
  Vector origin(k);
  for (std::size_t j = 0; j < k; ++j) origin[j] = -h.offset * h.normal[j] / nn;
  std::vector<Vector> basis{Vector(h.normal)};
  {
    const double norm = std::sqrt(nn);
    for (auto& v : basis[0]) v /= norm;
  }
  for (std::size_t e = 0; e < k && basis.size() < k; ++e) {
    Vector v(k, 0.0);
    v[e] = 1.0;
    for (const auto& q : basis) {
      const double proj = dot(v, q);
      for (std::size_t j = 0; j < k; ++j) v[j] -= proj * q[j];
    }
    const double norm = norm2(v);
    if (norm > 1e-8) {
      for (auto& x : v) x /= norm;
      basis.push_back(std::move(v));
    }
  }

  std::vector<Hyperplane> out;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    if (i == index) continue;
    Hyperplane r;
    r.normal.resize(k - 1);
    for (std::size_t j = 1; j < k; ++j) r.normal[j - 1] = dot(planes[i].normal, basis[j]);
    r.offset = dot(planes[i].normal, origin) + planes[i].offset;
    out.push_back(std::move(r));
  }
  return out;
}

IncrementalCount incremental_count(std::size_t k, const std::vector<Hyperplane>& planes) {
  require(!planes.empty(), ErrorCode::InvalidArgument, "incremental_count: need at least one plane");
  IncrementalCount out;
  out.with_plane = count_regions(k, planes).exact_count;
  const std::vector<Hyperplane> before(planes.begin(), planes.end() - 1);
  out.without_plane = count_regions(k, before).exact_count;
  out.on_plane = count_regions(k - 1, restrict_to_plane(planes, planes.size() - 1)).exact_count;
  return out;
}

std::vector<Hyperplane> random_hyperplanes(Rng& rng, std::size_t k, std::size_t c) {
  std::vector<Hyperplane> planes(c);
  for (auto& h : planes) {
    h.normal = rng.normal_vector(k);
    h.offset = rng.normal();
  }
  return planes;
}

RegionCount count_net_regions(const GeneratorNet& g, std::size_t budget) {
  const Layer& first = g.layers().front();
  const int pieces = first.activation.pieces();
  if (pieces == 0) {
    fail(ErrorCode::UnsupportedActivation,
         "count_net_regions: first-layer activation " + first.activation.name() + " is not piecewise linear");
  }
  const std::size_t k = first.in_dim();
  const std::size_t c = first.out_dim();
  require(c <= std::min(budget, kMaxRegionPlanes), ErrorCode::BudgetExceeded,
          "count_net_regions: " + std::to_string(c) + " nodes exceed budget " + std::to_string(budget));
  std::vector<Hyperplane> planes;
  if (pieces == 2) {
    for (std::size_t i = 0; i < c; ++i) {
      const auto row = first.weights.row(i);
      planes.push_back({Vector(row.begin(), row.end()), first.bias[i]});
    }
  }
  RegionCount rc = count_regions(k, planes);
  rc.c = c;
  rc.bound = general_position_regions(c, k);
  return rc;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

RecoveryInstance make_instance(const RecoveryResult& result, const Observation& obs) {
  require(obs.truth.has_value(), ErrorCode::MissingTruth, "make_instance: observation has no truth");
  const Vector& truth = *obs.truth;
  Vector eta = obs.op->apply(truth);
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = obs.y[i] - eta[i];
  Vector diff = result.x_hat;
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= truth[i];
  RecoveryInstance inst;
  inst.error = norm2(diff);
  inst.eta_norm = norm2(eta);
  inst.eps_hat = result.eps_hat;
  inst.trivial_bound = norm2(result.x_hat) + norm2(truth);
  return inst;
}

RecoveryBoundCheck check_recovery_bound(double gamma, double delta, const RecoveryInstance& inst) {
  require(gamma >= 0.0 && delta >= 0.0, ErrorCode::InvalidArgument, "check_recovery_bound: gamma, delta must be >= 0");
  RecoveryBoundCheck c;
  if (gamma <= 1e-12) {
    c.status = BoundStatus::Uninformative;
    c.bound = std::numeric_limits<double>::infinity();
    c.slack = c.bound;
    return c;
  }
  c.bound = (4.0 / gamma + 1.0) * inst.representation_error + (2.0 * inst.eta_norm + inst.eps_hat + delta) / gamma;
  c.slack = c.bound - inst.error;
  if (inst.error > c.bound) {
    c.status = BoundStatus::Fail;
  } else if (c.bound >= inst.trivial_bound) {
    c.status = BoundStatus::Uninformative;
  }
  return c;
}

std::vector<RecoveryBoundCheck> check_recovery_bound(double gamma, double delta,
                                                     const std::vector<RecoveryInstance>& instances) {
  std::vector<RecoveryBoundCheck> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(check_recovery_bound(gamma, delta, inst));
  return out;
}

TwoPointCheck two_point_check(const MeasurementOp& op, std::span<const double> y, std::span<const double> x1,
                              std::span<const double> x2, double gamma, double delta) {
  require(gamma > 0.0, ErrorCode::InvalidArgument, "two_point_check: gamma must be positive");
  auto residual_norm = [&](std::span<const double> x) {
    Vector r = op.apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
    return norm2(r);
  };
  Vector d(x1.begin(), x1.end());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= x2[i];
  TwoPointCheck out;
  out.distance = norm2(d);
  out.bound = (residual_norm(x1) + residual_norm(x2) + delta) / gamma;
  return out;
}

}  // namespace gencs
