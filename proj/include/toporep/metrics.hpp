// Subject-pairwise dissimilarity functions.
//
// Vector features get the inner product divergence (a globally rescaled
// squared Gram matrix) or the Pearson divergence 1 - rho^2. SPSD features get
// the affine-invariant SPD geodesic or the Pearson divergence of
// atanh-transformed off-diagonal entries. All four return a DistanceMatrix
// that is exactly symmetric with a zero diagonal; callers may rely on that.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "toporep/types.hpp"

namespace toporep {

/// Symmetry is always checked; the eigenvalue floor only when `check_eigs`
/// (partial-correlation matrices can be slightly indefinite, so producers of
/// those skip the floor).
inline void validate_spsd_stack(const SpsdStack& s, const std::string& what,
                                bool check_eigs = false) {
  if (s.size() < 2) throw std::invalid_argument(what + ": need at least 2 subjects");
  if (s.m < 1) throw std::invalid_argument(what + ": empty matrices");
  if (s.subject_ids.size() != s.size())
    throw std::invalid_argument(what + ": subject id count mismatch");
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& a = s.matrices[k];
    if (a.size() != s.m * s.m)
      throw std::invalid_argument(what + ": matrix size mismatch for subject " +
                                  s.subject_ids[k]);
    double scale = 0.0;
    for (double v : a) {
      if (!std::isfinite(v))
        throw std::invalid_argument(what + ": non-finite entry for subject " +
                                    s.subject_ids[k]);
      scale = std::max(scale, std::abs(v));
    }
    for (std::size_t i = 0; i < s.m; ++i)
      for (std::size_t j = i + 1; j < s.m; ++j)
        if (std::abs(a[i * s.m + j] - a[j * s.m + i]) > 1e-10 * std::max(1.0, scale))
          throw std::invalid_argument(what + ": asymmetric matrix for subject " +
                                      s.subject_ids[k]);
    if (check_eigs) {
      Eigen::Map<const Eigen::MatrixXd> m(a.data(), s.m, s.m);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      if (lo < -1e-10 * std::max(hi, 0.0))
        throw std::invalid_argument(what + ": matrix for subject " + s.subject_ids[k] +
                                    " has eigenvalue " + std::to_string(lo));
    }
  }
}

/// delta = 1 - G~^2 where G~ is the Gram matrix min-max rescaled to [0,1]
/// over all N^2 entries. Raw (uncentered) vectors enter the Gram matrix.
inline DistanceMatrix inner_product_divergence(const FeatureMatrix& f) {
  validate_feature_matrix(f, "inner_product_divergence");
  const std::size_t n = f.rows;
  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double dot = 0.0;
      const double* a = f.data.data() + i * f.cols;
      const double* b = f.data.data() + j * f.cols;
      for (std::size_t t = 0; t < f.cols; ++t) dot += a[t] * b[t];
      gram[i * n + j] = dot;
      gram[j * n + i] = dot;
    }
  }
  const auto [lo_it, hi_it] = std::minmax_element(gram.begin(), gram.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi == lo)
    throw std::invalid_argument(
        "inner_product_divergence: constant Gram matrix, degenerate scaling");
  DistanceMatrix out = DistanceMatrix::zeros(n);
  out.subject_ids = f.subject_ids;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = (gram[i * n + j] - lo) / (hi - lo);
      const double v = 1.0 - g * g;
      out.at(i, j) = v;
      out.at(j, i) = v;
    }
    out.at(i, i) = 0.0;
  }
  return out;
}

namespace detail {

// Centered rows and their norms; throws naming the subject on zero variance.
inline void center_rows(const FeatureMatrix& f, std::vector<double>& centered,
                        std::vector<double>& norms, const std::string& what) {
  const std::size_t n = f.rows, d = f.cols;
  centered.assign(n * d, 0.0);
  norms.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t t = 0; t < d; ++t) mean += f.at(i, t);
    mean /= static_cast<double>(d);
    double ss = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      const double c = f.at(i, t) - mean;
      centered[i * d + t] = c;
      ss += c * c;
    }
    norms[i] = std::sqrt(ss);
    if (norms[i] == 0.0)
      throw std::invalid_argument(what + ": zero-variance feature vector for subject " +
                                  f.subject_ids[i]);
  }
}

}  // namespace detail

/// delta = 1 - rho^2 with rho the Pearson correlation of the two subjects'
/// feature vectors.
inline DistanceMatrix pearson_divergence(const FeatureMatrix& f) {
  validate_feature_matrix(f, "pearson_divergence");
  const std::size_t n = f.rows, d = f.cols;
  std::vector<double> centered, norms;
  detail::center_rows(f, centered, norms, "pearson_divergence");
  DistanceMatrix out = DistanceMatrix::zeros(n);
  out.subject_ids = f.subject_ids;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dot = 0.0;
      const double* a = centered.data() + i * d;
      const double* b = centered.data() + j * d;
      for (std::size_t t = 0; t < d; ++t) dot += a[t] * b[t];
      const double rho = dot / (norms[i] * norms[j]);
      const double v = std::max(0.0, 1.0 - rho * rho);  // clamp fp overshoot at |rho|=1
      out.at(i, j) = v;
      out.at(j, i) = v;
    }
  }
  return out;
}

/// Affine-invariant geodesic ||log(A_i^{-1} A_j)||_F on the SPD cone,
/// computed from the generalized eigenvalues of the pencil (A_j, A_i).
/// `ridge` is added to every diagonal before the PD check.
inline DistanceMatrix spd_geodesic(const SpsdStack& s, double ridge = 0.0) {
  validate_spsd_stack(s, "spd_geodesic");
  const std::size_t n = s.size();
  const auto m = static_cast<Eigen::Index>(s.m);
  std::vector<Eigen::MatrixXd> ridged(n);
  for (std::size_t i = 0; i < n; ++i) {
    ridged[i] = Eigen::Map<const Eigen::MatrixXd>(s.matrices[i].data(), m, m);
    ridged[i] = 0.5 * (ridged[i] + ridged[i].transpose());
    ridged[i].diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(ridged[i]);
    if (llt.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ridged[i], Eigen::EigenvaluesOnly);
      throw std::invalid_argument("spd_geodesic: matrix for subject " + s.subject_ids[i] +
                                  " not positive definite after ridge (smallest eigenvalue " +
                                  std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
  }
  DistanceMatrix out = DistanceMatrix::zeros(n);
  out.subject_ids = s.subject_ids;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
          ridged[j], ridged[i], Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
      double sum = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) {
        const double lambda = ges.eigenvalues()[k];
        if (!(lambda > 0.0))
          throw std::runtime_error("spd_geodesic: nonpositive generalized eigenvalue for pair (" +
                                   s.subject_ids[i] + "," + s.subject_ids[j] + ")");
        const double l = std::log(lambda);
        sum += l * l;
      }
      const double v = std::sqrt(sum);
      out.at(i, j) = v;
      out.at(j, i) = v;
    }
  }
  return out;
}

/// Half-vectorize each correlation matrix (diagonal excluded), clamp into
/// (-1, 1), apply atanh elementwise, then take the Pearson divergence of the
/// transformed vectors.
inline DistanceMatrix ztrans_pearson_divergence(const SpsdStack& s,
                                                double clamp_eps = 1e-7) {
  validate_spsd_stack(s, "ztrans_pearson_divergence");
  if (s.m < 3)
    throw std::invalid_argument(
        "ztrans_pearson_divergence: need matrices of size >= 3 (half-vectorization "
        "would have fewer than 3 entries)");
  if (!(clamp_eps > 0.0 && clamp_eps < 1.0))
    throw std::invalid_argument("ztrans_pearson_divergence: clamp_eps must be in (0,1)");
  const std::size_t n = s.size(), m = s.m;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = s.matrices[k];
    for (std::size_t i = 0; i < m; ++i) {
      if (std::abs(a[i * m + i] - 1.0) > 1e-8)
        throw std::invalid_argument("ztrans_pearson_divergence: subject " +
                                    s.subject_ids[k] + " is not a correlation matrix "
                                    "(diagonal entry " + std::to_string(a[i * m + i]) + ")");
      for (std::size_t j = 0; j < m; ++j)
        if (std::abs(a[i * m + j]) > 1.0 + 1e-8)
          throw std::invalid_argument("ztrans_pearson_divergence: subject " +
                                      s.subject_ids[k] + " has entry outside [-1,1]");
    }
  }
  const std::size_t d = m * (m - 1) / 2;
  FeatureMatrix z;
  z.rows = n;
  z.cols = d;
  z.subject_ids = s.subject_ids;
  z.data.resize(n * d);
  const double cap = 1.0 - clamp_eps;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = s.matrices[k];
    std::size_t t = 0;
    for (std::size_t i = 1; i < m; ++i)
      for (std::size_t j = 0; j < i; ++j)
        z.data[k * d + t++] = std::atanh(std::clamp(a[i * m + j], -cap, cap));
  }
  return pearson_divergence(z);
}

}  // namespace toporep
