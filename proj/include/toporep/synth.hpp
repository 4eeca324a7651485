// Seeded synthetic point clouds with known topology, plus random
// representation maps. Stand-ins for restricted subject data in tests, demos
// and the shipped example configuration.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "toporep/rng.hpp"
#include "toporep/types.hpp"

namespace toporep {

enum class ManifoldKind { circle, torus, sphere, figure_eight, gaussian_blob };

inline ManifoldKind manifold_kind_from_string(const std::string& s) {
  if (s == "circle") return ManifoldKind::circle;
  if (s == "torus") return ManifoldKind::torus;
  if (s == "sphere") return ManifoldKind::sphere;
  if (s == "figure_eight" || s == "figure-eight") return ManifoldKind::figure_eight;
  if (s == "gaussian_blob" || s == "gaussian-blob") return ManifoldKind::gaussian_blob;
  throw std::invalid_argument("unknown manifold kind: " + s);
}

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::circle;
  std::size_t n = 100;
  double noise_sigma = 0.0;
  std::size_t ambient_dim = 2;
  std::uint64_t seed = 0;
};

namespace synth_detail {

inline std::size_t canonical_dim(ManifoldKind kind, std::size_t ambient_dim) {
  switch (kind) {
    case ManifoldKind::circle:
    case ManifoldKind::figure_eight:
      return 2;
    case ManifoldKind::torus:
    case ManifoldKind::sphere:
      return 3;
    case ManifoldKind::gaussian_blob:
      return ambient_dim;
  }
  return 0;
}

/// `rows` orthonormal d-vectors by modified Gram-Schmidt on seeded Gaussian
/// draws; row-major rows x d.
inline std::vector<double> orthonormal_frame(std::size_t rows, std::size_t d, Rng& rng) {
  std::vector<double> q(rows * d);
  for (std::size_t r = 0; r < rows; ++r) {
    for (;;) {
      for (std::size_t c = 0; c < d; ++c) q[r * d + c] = rng.gaussian();
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t prev = 0; prev < r; ++prev) {
          double dot = 0.0;
          for (std::size_t c = 0; c < d; ++c) dot += q[prev * d + c] * q[r * d + c];
          for (std::size_t c = 0; c < d; ++c) q[r * d + c] -= dot * q[prev * d + c];
        }
      }
      double norm = 0.0;
      for (std::size_t c = 0; c < d; ++c) norm += q[r * d + c] * q[r * d + c];
      norm = std::sqrt(norm);
      if (norm > 1e-8) {
        for (std::size_t c = 0; c < d; ++c) q[r * d + c] /= norm;
        break;
      }
    }
  }
  return q;
}

constexpr double kTau = 6.283185307179586476925287;

}  // namespace synth_detail

/// n points sampled uniformly from the manifold, isometrically embedded into
/// ambient_dim by a seeded random rotation, plus isotropic Gaussian noise.
inline FeatureMatrix sample_manifold(const ManifoldSpec& spec) {
  using namespace synth_detail;
  if (spec.n < 3) throw std::invalid_argument("sample_manifold: need n >= 3");
  if (!(spec.noise_sigma >= 0.0))
    throw std::invalid_argument("sample_manifold: noise_sigma must be >= 0");
  const std::size_t cd = canonical_dim(spec.kind, spec.ambient_dim);
  if (spec.ambient_dim < cd)
    throw std::invalid_argument("sample_manifold: ambient_dim must be >= " +
                                std::to_string(cd) + " for this manifold");
  Rng rng(spec.seed);

  std::vector<double> canonical(spec.n * cd, 0.0);
  for (std::size_t i = 0; i < spec.n; ++i) {
    double* p = canonical.data() + i * cd;
    switch (spec.kind) {
      case ManifoldKind::circle: {
        const double t = kTau * rng.uniform();
        p[0] = std::cos(t);
        p[1] = std::sin(t);
        break;
      }
      case ManifoldKind::torus: {
        // R = 2, r = 1; area-uniform via rejection on the tube angle
        const double theta = kTau * rng.uniform();
        double phi;
        for (;;) {
          phi = kTau * rng.uniform();
          if (rng.uniform() <= (2.0 + std::cos(phi)) / 3.0) break;
        }
        p[0] = (2.0 + std::cos(phi)) * std::cos(theta);
        p[1] = (2.0 + std::cos(phi)) * std::sin(theta);
        p[2] = std::sin(phi);
        break;
      }
      case ManifoldKind::sphere: {
        double norm = 0.0;
        do {
          for (std::size_t c = 0; c < 3; ++c) p[c] = rng.gaussian();
          norm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        } while (norm < 1e-12);
        for (std::size_t c = 0; c < 3; ++c) p[c] /= norm;
        break;
      }
      case ManifoldKind::figure_eight: {
        // two circles tangent at the origin, radii 1/3 and 1; arc-length uniform
        const double r_small = 1.0 / 3.0;
        const double pick = rng.uniform();
        const double t = kTau * rng.uniform();
        if (pick < r_small / (r_small + 1.0)) {
          p[0] = -r_small + r_small * std::cos(t);
          p[1] = r_small * std::sin(t);
        } else {
          p[0] = 1.0 + std::cos(t);
          p[1] = std::sin(t);
        }
        break;
      }
      case ManifoldKind::gaussian_blob: {
        for (std::size_t c = 0; c < cd; ++c) p[c] = rng.gaussian();
        break;
      }
    }
  }

  const std::vector<double> frame = orthonormal_frame(cd, spec.ambient_dim, rng);
  FeatureMatrix out = FeatureMatrix::zeros(spec.n, spec.ambient_dim);
  for (std::size_t i = 0; i < spec.n; ++i)
    for (std::size_t a = 0; a < spec.ambient_dim; ++a) {
      double v = 0.0;
      for (std::size_t c = 0; c < cd; ++c)
        v += canonical[i * cd + c] * frame[c * spec.ambient_dim + a];
      out.at(i, a) = v;
    }
  if (spec.noise_sigma > 0.0)
    for (std::size_t i = 0; i < spec.n; ++i)
      for (std::size_t a = 0; a < spec.ambient_dim; ++a)
        out.at(i, a) += spec.noise_sigma * rng.gaussian();
  return out;
}

enum class RepresentationKind { projection, nonlinear };

inline RepresentationKind representation_kind_from_string(const std::string& s) {
  if (s == "projection") return RepresentationKind::projection;
  if (s == "nonlinear") return RepresentationKind::nonlinear;
  throw std::invalid_argument("unknown representation kind: " + s);
}

/// Seeded random orthonormal d-frame applied to the features; `nonlinear`
/// additionally applies tanh coordinatewise.
inline FeatureMatrix random_representation(const FeatureMatrix& f, RepresentationKind kind,
                                           std::size_t d, std::uint64_t seed) {
  validate_feature_matrix(f, "random_representation");
  if (d < 1) throw std::invalid_argument("random_representation: d must be >= 1");
  if (d > f.cols)
    throw std::invalid_argument("random_representation: d = " + std::to_string(d) +
                                " exceeds the source dimension " + std::to_string(f.cols));
  Rng rng(seed);
  const std::vector<double> frame = synth_detail::orthonormal_frame(d, f.cols, rng);
  FeatureMatrix out = FeatureMatrix::zeros(f.rows, d);
  out.subject_ids = f.subject_ids;
  for (std::size_t i = 0; i < f.rows; ++i)
    for (std::size_t r = 0; r < d; ++r) {
      double v = 0.0;
      for (std::size_t c = 0; c < f.cols; ++c) v += frame[r * f.cols + c] * f.at(i, c);
      out.at(i, r) = kind == RepresentationKind::nonlinear ? std::tanh(v) : v;
    }
  return out;
}

/// Random block ids for demo family structure: consecutive blocks of size
/// 1..max_size drawn uniformly until all n subjects are covered.
inline std::vector<std::string> assign_random_blocks(std::size_t n, std::size_t max_size,
                                                     std::uint64_t seed) {
  if (max_size < 1) throw std::invalid_argument("assign_random_blocks: max_size >= 1");
  Rng rng(seed);
  std::vector<std::string> ids;
  ids.reserve(n);
  std::size_t block = 0;
  while (ids.size() < n) {
    const std::size_t sz = 1 + static_cast<std::size_t>(rng.bounded(max_size));
    const std::string id = "fam" + std::to_string(block++);
    for (std::size_t i = 0; i < sz && ids.size() < n; ++i) ids.push_back(id);
  }
  return ids;
}

}  // namespace toporep
