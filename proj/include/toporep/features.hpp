// Feature extraction from per-subject component time series / spatial maps.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "toporep/types.hpp"

namespace toporep {

enum class FeatureKind { amplitude, netmat, partial_netmat, spatial_netmat, map };

inline FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "amplitude") return FeatureKind::amplitude;
  if (s == "netmat") return FeatureKind::netmat;
  if (s == "partial_netmat" || s == "partial-netmat") return FeatureKind::partial_netmat;
  if (s == "spatial_netmat" || s == "spatial-netmat") return FeatureKind::spatial_netmat;
  if (s == "map") return FeatureKind::map;
  throw std::invalid_argument("unknown feature kind: " + s);
}

inline std::string to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::amplitude: return "amplitude";
    case FeatureKind::netmat: return "netmat";
    case FeatureKind::partial_netmat: return "partial_netmat";
    case FeatureKind::spatial_netmat: return "spatial_netmat";
    case FeatureKind::map: return "map";
  }
  return "?";
}

/// Vector-valued kinds produce a FeatureMatrix, SPSD kinds an SpsdStack.
inline bool is_vector_kind(FeatureKind k) {
  return k == FeatureKind::amplitude || k == FeatureKind::map;
}

namespace detail {

inline void validate_time_series(const TimeSeriesSet& ts, const std::string& what) {
  if (ts.size() < 2) throw std::invalid_argument(what + ": need at least 2 subjects");
  if (ts.components < 1) throw std::invalid_argument(what + ": need at least 1 component");
  if (ts.timepoints < 2) throw std::invalid_argument(what + ": need at least 2 timepoints");
  if (ts.subject_ids.size() != ts.size())
    throw std::invalid_argument(what + ": subject id count mismatch");
  for (std::size_t s = 0; s < ts.size(); ++s) {
    if (ts.series[s].size() != ts.components * ts.timepoints)
      throw std::invalid_argument(what + ": shape mismatch for subject " +
                                  std::to_string(s));
    for (double v : ts.series[s])
      if (!std::isfinite(v))
        throw std::invalid_argument(what + ": non-finite input for subject " +
                                    std::to_string(s) + " (" + ts.subject_ids[s] + ")");
  }
}

// r x r Pearson correlation of the rows of one subject's matrix.
inline std::vector<double> row_correlation(const std::vector<double>& x, std::size_t r,
                                           std::size_t t, const std::string& subject,
                                           const std::string& what) {
  std::vector<double> centered(r * t);
  std::vector<double> norms(r);
  for (std::size_t i = 0; i < r; ++i) {
    double mean = 0.0;
    for (std::size_t k = 0; k < t; ++k) mean += x[i * t + k];
    mean /= static_cast<double>(t);
    double ss = 0.0;
    for (std::size_t k = 0; k < t; ++k) {
      const double c = x[i * t + k] - mean;
      centered[i * t + k] = c;
      ss += c * c;
    }
    norms[i] = std::sqrt(ss);
    if (norms[i] == 0.0)
      throw std::invalid_argument(what + ": zero-variance component " + std::to_string(i) +
                                  " for subject " + subject + ", correlation undefined");
  }
  std::vector<double> corr(r * r, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    corr[i * r + i] = 1.0;
    for (std::size_t j = i + 1; j < r; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < t; ++k) dot += centered[i * t + k] * centered[j * t + k];
      const double rho = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
      corr[i * r + j] = rho;
      corr[j * r + i] = rho;
    }
  }
  return corr;
}

}  // namespace detail

/// Root-mean-square of each demeaned component time course; N x r.
inline FeatureMatrix extract_amplitude(const TimeSeriesSet& ts) {
  detail::validate_time_series(ts, "extract_features(amplitude)");
  FeatureMatrix out;
  out.rows = ts.size();
  out.cols = ts.components;
  out.subject_ids = ts.subject_ids;
  out.data.resize(out.rows * out.cols);
  for (std::size_t s = 0; s < ts.size(); ++s) {
    for (std::size_t i = 0; i < ts.components; ++i) {
      const double* x = ts.series[s].data() + i * ts.timepoints;
      double mean = 0.0;
      for (std::size_t k = 0; k < ts.timepoints; ++k) mean += x[k];
      mean /= static_cast<double>(ts.timepoints);
      double ss = 0.0;
      for (std::size_t k = 0; k < ts.timepoints; ++k) {
        const double c = x[k] - mean;
        ss += c * c;
      }
      out.at(s, i) = std::sqrt(ss / static_cast<double>(ts.timepoints));
    }
  }
  return out;
}

/// Each subject's r x T matrix flattened row-major into one feature vector.
inline FeatureMatrix extract_map(const TimeSeriesSet& ts) {
  detail::validate_time_series(ts, "extract_features(map)");
  FeatureMatrix out;
  out.rows = ts.size();
  out.cols = ts.components * ts.timepoints;
  out.subject_ids = ts.subject_ids;
  out.data.resize(out.rows * out.cols);
  for (std::size_t s = 0; s < ts.size(); ++s)
    std::copy(ts.series[s].begin(), ts.series[s].end(), out.data.begin() + s * out.cols);
  return out;
}

/// Pearson correlation matrix of component rows. `netmat` correlates over
/// time, `spatial_netmat` over voxels; the arithmetic is identical.
inline SpsdStack extract_netmat(const TimeSeriesSet& ts) {
  detail::validate_time_series(ts, "extract_features(netmat)");
  SpsdStack out;
  out.m = ts.components;
  out.subject_ids = ts.subject_ids;
  out.matrices.reserve(ts.size());
  for (std::size_t s = 0; s < ts.size(); ++s)
    out.matrices.push_back(detail::row_correlation(ts.series[s], ts.components,
                                                   ts.timepoints, ts.subject_ids[s],
                                                   "extract_features(netmat)"));
  return out;
}

/// Variance-normalized ridged precision with flipped off-diagonal sign and a
/// unit diagonal: P = sign-flipped diag(Theta)^{-1/2} Theta diag(Theta)^{-1/2},
/// Theta = (Sigma + eps I)^{-1}. `ridge` < 0 selects the default
/// 1e-3 * mean(diag(Sigma)).
inline SpsdStack extract_partial_netmat(const TimeSeriesSet& ts, double ridge = -1.0) {
  detail::validate_time_series(ts, "extract_features(partial_netmat)");
  const auto r = static_cast<Eigen::Index>(ts.components);
  const auto t = static_cast<Eigen::Index>(ts.timepoints);
  SpsdStack out;
  out.m = ts.components;
  out.subject_ids = ts.subject_ids;
  out.matrices.reserve(ts.size());
  for (std::size_t s = 0; s < ts.size(); ++s) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>> x(ts.series[s].data(), r, t);
    Eigen::MatrixXd centered = x;
    centered.colwise() -= x.rowwise().mean();
    Eigen::MatrixXd sigma = centered * centered.transpose() /
                            static_cast<double>(std::max<Eigen::Index>(t - 1, 1));
    const double eps = ridge >= 0.0 ? ridge : 1e-3 * sigma.diagonal().mean();
    sigma.diagonal().array() += eps;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument(
          "extract_features(partial_netmat): covariance for subject " +
          ts.subject_ids[s] + " not invertible after ridge " + std::to_string(eps));
    Eigen::MatrixXd theta = llt.solve(Eigen::MatrixXd::Identity(r, r));
    theta = 0.5 * (theta + theta.transpose());
    std::vector<double> p(ts.components * ts.components);
    for (Eigen::Index i = 0; i < r; ++i) {
      p[i * r + i] = 1.0;
      for (Eigen::Index j = 0; j < r; ++j) {
        if (i == j) continue;
        p[i * r + j] = -theta(i, j) / std::sqrt(theta(i, i) * theta(j, j));
      }
    }
    // enforce exact symmetry against fp drift in the solve
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = i + 1; j < r; ++j) {
        const double v = 0.5 * (p[i * r + j] + p[j * r + i]);
        p[i * r + j] = v;
        p[j * r + i] = v;
      }
    out.matrices.push_back(std::move(p));
  }
  return out;
}

inline FeatureMatrix extract_vector_features(const TimeSeriesSet& ts, FeatureKind kind) {
  switch (kind) {
    case FeatureKind::amplitude: return extract_amplitude(ts);
    case FeatureKind::map: return extract_map(ts);
    default:
      throw std::invalid_argument("extract_vector_features: kind " + to_string(kind) +
                                  " yields an SPSD stack, not a feature matrix");
  }
}

inline SpsdStack extract_spsd_features(const TimeSeriesSet& ts, FeatureKind kind,
                                       double ridge = -1.0) {
  switch (kind) {
    case FeatureKind::netmat:
    case FeatureKind::spatial_netmat:
      return extract_netmat(ts);
    case FeatureKind::partial_netmat:
      return extract_partial_netmat(ts, ridge);
    default:
      throw std::invalid_argument("extract_spsd_features: kind " + to_string(kind) +
                                  " yields a feature matrix, not an SPSD stack");
  }
}

}  // namespace toporep
