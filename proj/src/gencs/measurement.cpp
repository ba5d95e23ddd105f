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

#include "gencs/measurement.hpp"

#include "gencs/binary_io.hpp"
#include "gencs/error.hpp"

#include <cmath>

namespace gencs {

MeasurementOp MeasurementOp::identity(std::size_t n) {
  require(n >= 1, ErrorCode::InvalidArgument, "identity op needs n >= 1");
  return MeasurementOp(MeasurementKind::Identity, Matrix::identity(n));
}

MeasurementOp MeasurementOp::gaussian(std::uint64_t seed, std::size_t m, std::size_t n) {
  require(m >= 1 && n >= 1, ErrorCode::InvalidArgument, "gaussian op needs m, n >= 1");
  Rng rng(seed);
  MeasurementOp op(MeasurementKind::Gaussian, gaussian_matrix(rng, m, n, 1.0 / static_cast<double>(m)));
  op.seed_ = seed;
  return op;
}

MeasurementOp MeasurementOp::superres(const SuperResParams& p) {
  require(p.pool_h >= 1 && p.pool_w >= 1 && p.stride >= 1 && p.channels >= 1, ErrorCode::InvalidArgument,
          "superres: pool, stride and channels must be >= 1");
  require(p.height % p.stride == 0 && p.width % p.stride == 0, ErrorCode::InvalidArgument,
          "superres: image " + std::to_string(p.height) + "x" + std::to_string(p.width) +
              " not divisible by stride " + std::to_string(p.stride));
  const std::size_t out_h = p.height / p.stride;
  const std::size_t out_w = p.width / p.stride;
  require((out_h - 1) * p.stride + p.pool_h <= p.height && (out_w - 1) * p.stride + p.pool_w <= p.width,
          ErrorCode::InvalidArgument, "superres: pooling window runs past the image edge");
  const std::size_t n = p.channels * p.height * p.width;
  const std::size_t m = p.channels * out_h * out_w;
  const double weight = 1.0 / static_cast<double>(p.pool_h * p.pool_w);
  Matrix a(m, n);
  std::size_t row = 0;
  for (std::size_t ch = 0; ch < p.channels; ++ch) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox, ++row) {
        for (std::size_t dy = 0; dy < p.pool_h; ++dy) {
          for (std::size_t dx = 0; dx < p.pool_w; ++dx) {
            const std::size_t iy = oy * p.stride + dy;
            const std::size_t ix = ox * p.stride + dx;
            a(row, ch * p.height * p.width + iy * p.width + ix) = weight;
          }
        }
      }
    }
  }
  MeasurementOp op(MeasurementKind::SuperRes, std::move(a));
  op.superres_ = p;
  return op;
}

MeasurementOp MeasurementOp::dense(Matrix a) {
  require(a.rows() >= 1 && a.cols() >= 1, ErrorCode::InvalidArgument, "dense op needs a non-empty matrix");
  require(a.all_finite(), ErrorCode::NonFinite, "dense op has non-finite entries");
  return MeasurementOp(MeasurementKind::Dense, std::move(a));
}

std::string MeasurementOp::describe() const {
  const std::string dims = std::to_string(m()) + "x" + std::to_string(n());
  switch (kind_) {
    case MeasurementKind::Identity:
      return "identity " + dims;
    case MeasurementKind::Gaussian:
      return "gaussian " + dims + " seed " + std::to_string(seed_);
    case MeasurementKind::SuperRes:
      return "superres " + dims + " pool " + std::to_string(superres_.pool_h) + "x" +
             std::to_string(superres_.pool_w) + " stride " + std::to_string(superres_.stride);
    case MeasurementKind::Dense:
      return "dense " + dims;
  }
  return dims;
}

Observation sense(MeasurementOpPtr op, std::span<const double> x_star, const NoiseModel& noise, Rng& rng) {
  require(op != nullptr, ErrorCode::InvalidArgument, "sense: null measurement op");
  require(x_star.size() == op->n(), ErrorCode::DimensionMismatch,
          "sense: signal has " + std::to_string(x_star.size()) + " entries, operator expects " +
              std::to_string(op->n()));
  require(noise.level >= 0.0 && std::isfinite(noise.level), ErrorCode::InvalidArgument,
          "sense: noise level must be finite and >= 0");
  Observation obs;
  obs.y = op->apply(x_star);
  Vector eta(op->m(), 0.0);
  if (noise.level > 0.0) {
    const double stddev = noise.level / std::sqrt(static_cast<double>(op->m()));
    for (std::size_t i = 0; i < eta.size(); ++i) {
      eta[i] = stddev * rng.normal();
      obs.y[i] += eta[i];
    }
  }
  obs.op = std::move(op);
  obs.noise = noise;
  obs.truth = Vector(x_star.begin(), x_star.end());
  obs.eta = std::move(eta);
  return obs;
}

Observation sense(MeasurementOpPtr op, std::span<const double> x_star, const NoiseModel& noise) {
  Rng rng(noise.seed);
  return sense(std::move(op), x_star, noise, rng);
}

double norm_expansion_fraction(Rng& rng, std::size_t m, std::size_t n, std::size_t draws, double factor) {
  require(draws >= 1, ErrorCode::InvalidArgument, "norm_expansion_fraction: draws must be >= 1");
  std::size_t expanded = 0;
  for (std::size_t t = 0; t < draws; ++t) {
    const Vector x = rng.normal_vector(n);
    const Matrix a = gaussian_matrix(rng, m, n, 1.0 / static_cast<double>(m));
    if (norm2(matvec(a, x)) > factor * norm2(x)) {
      ++expanded;
    }
  }
  return static_cast<double>(expanded) / static_cast<double>(draws);
}

std::vector<std::uint8_t> encode_observation(const Observation& obs) {
  require(obs.op != nullptr, ErrorCode::InvalidArgument, "observation has no operator");
  const MeasurementOp& op = *obs.op;
  binary::Writer w;
  w.bytes("GOBS");
  w.put<std::uint32_t>(kObservationVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(op.kind()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(op.m()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(op.n()));
  switch (op.kind()) {
    case MeasurementKind::Identity:
      break;
    case MeasurementKind::Gaussian:
      w.put<std::uint64_t>(op.seed());
      break;
    case MeasurementKind::SuperRes: {
      const auto& p = op.superres_params();
      for (std::size_t v : {p.pool_h, p.pool_w, p.stride, p.height, p.width, p.channels}) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(v));
      }
      break;
    }
    case MeasurementKind::Dense:
      for (double v : op.matrix().data()) {
        w.put<double>(v);
      }
      break;
  }
  w.put<double>(obs.noise.level);
  w.put<std::uint64_t>(obs.noise.seed);
  require(obs.y.size() == op.m(), ErrorCode::DimensionMismatch, "observation y length != m");
  for (double v : obs.y) {
    w.put<double>(v);
  }
  w.put<std::uint8_t>(obs.truth ? 1 : 0);
  if (obs.truth) {
    require(obs.truth->size() == op.n(), ErrorCode::DimensionMismatch, "observation truth length != n");
    for (double v : *obs.truth) {
      w.put<double>(v);
    }
  }
  w.put<std::uint8_t>(obs.eta ? 1 : 0);
  if (obs.eta) {
    require(obs.eta->size() == op.m(), ErrorCode::DimensionMismatch, "observation eta length != m");
    for (double v : *obs.eta) {
      w.put<double>(v);
    }
  }
  w.seal();
  return w.buffer();
}

namespace {
Vector read_vector(binary::Reader& r, std::size_t len) {
  r.need(len * sizeof(double));
  Vector v(len);
  for (auto& x : v) {
    x = r.get<double>();
  }
  return v;
}
}  // namespace

// Fields are read raw and only interpreted once the checksum has been
// verified, so corruption reports as a checksum mismatch.
Observation decode_observation(std::vector<std::uint8_t> bytes, const std::string& origin) {
  binary::Reader r(std::move(bytes), origin);
  r.expect_magic("GOBS");
  const auto version = r.get<std::uint32_t>();
  require(version == kObservationVersion, ErrorCode::MalformedFile,
          origin + ": unsupported observation version " + std::to_string(version));
  const auto kind = r.get<std::uint8_t>();
  const std::size_t m = r.get<std::uint32_t>();
  const std::size_t n = r.get<std::uint32_t>();
  require(m >= 1 && n >= 1, ErrorCode::MalformedFile, origin + ": empty dimensions");

  std::uint64_t op_seed = 0;
  SuperResParams sr;
  Vector dense;
  switch (static_cast<MeasurementKind>(kind)) {
    case MeasurementKind::Identity:
      break;
    case MeasurementKind::Gaussian:
      op_seed = r.get<std::uint64_t>();
      break;
    case MeasurementKind::SuperRes:
      for (std::size_t* f : {&sr.pool_h, &sr.pool_w, &sr.stride, &sr.height, &sr.width, &sr.channels}) {
        *f = r.get<std::uint32_t>();
      }
      break;
    case MeasurementKind::Dense:
      dense = read_vector(r, m * n);
      break;
    default:
      fail(ErrorCode::MalformedFile, origin + ": unknown operator kind " + std::to_string(kind));
  }

  Observation obs;
  obs.noise.level = r.get<double>();
  obs.noise.seed = r.get<std::uint64_t>();
  obs.y = read_vector(r, m);
  if (r.get<std::uint8_t>() != 0) {
    obs.truth = read_vector(r, n);
  }
  if (r.get<std::uint8_t>() != 0) {
    obs.eta = read_vector(r, m);
  }
  r.verify_seal();

  const bool finite = all_finite(dense) && all_finite(obs.y) && (!obs.truth || all_finite(*obs.truth)) &&
                      (!obs.eta || all_finite(*obs.eta)) && std::isfinite(obs.noise.level);
  require(finite, ErrorCode::MalformedFile, origin + ": non-finite values");
  MeasurementOp op = [&] {
    switch (static_cast<MeasurementKind>(kind)) {
      case MeasurementKind::Identity:
        return MeasurementOp::identity(n);
      case MeasurementKind::Gaussian:
        return MeasurementOp::gaussian(op_seed, m, n);
      case MeasurementKind::SuperRes:
        return MeasurementOp::superres(sr);
      default:
        return MeasurementOp::dense(Matrix(m, n, std::move(dense)));
    }
  }();
  require(op.m() == m && op.n() == n, ErrorCode::DimensionInconsistency,
          origin + ": operator parameters produce " + std::to_string(op.m()) + "x" + std::to_string(op.n()) +
              ", header says " + std::to_string(m) + "x" + std::to_string(n));
  obs.op = std::make_shared<const MeasurementOp>(std::move(op));
  return obs;
}

void save_observation(const Observation& obs, const std::filesystem::path& path) {
  binary::write_file(path, encode_observation(obs));
}

Observation load_observation(const std::filesystem::path& path) {
  return decode_observation(binary::read_file(path), path.string());
}

}  // namespace gencs
