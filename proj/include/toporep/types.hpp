// Core data carriers: feature matrices, SPSD stacks, time series and
// subject-pairwise distance matrices.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace toporep {

/// N subjects x d features, row-major.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols
  std::vector<std::string> subject_ids;

  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }

  static FeatureMatrix zeros(std::size_t n, std::size_t d) {
    FeatureMatrix f;
    f.rows = n;
    f.cols = d;
    f.data.assign(n * d, 0.0);
    f.subject_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.subject_ids[i] = "s" + std::to_string(i);
    return f;
  }
};

/// N symmetric m x m matrices, one per subject; each stored row-major.
struct SpsdStack {
  std::size_t m = 0;
  std::vector<std::vector<double>> matrices;
  std::vector<std::string> subject_ids;

  std::size_t size() const { return matrices.size(); }
};

/// One r x T matrix per subject (components x timepoints), row-major.
/// The same container carries spatial maps (components x voxels).
struct TimeSeriesSet {
  std::size_t components = 0;
  std::size_t timepoints = 0;
  std::vector<std::vector<double>> series;
  std::vector<std::string> subject_ids;

  std::size_t size() const { return series.size(); }
};

/// Symmetric nonnegative pairwise dissimilarities; the sole input to
/// persistence computations.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> d;  // n * n, row-major
  std::vector<std::string> subject_ids;

  double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return d[i * n + j]; }

  static DistanceMatrix zeros(std::size_t n) {
    DistanceMatrix m;
    m.n = n;
    m.d.assign(n * n, 0.0);
    m.subject_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.subject_ids[i] = "s" + std::to_string(i);
    return m;
  }
};

inline void validate_feature_matrix(const FeatureMatrix& f, const std::string& what) {
  if (f.rows < 2) throw std::invalid_argument(what + ": need at least 2 subjects");
  if (f.cols < 1) throw std::invalid_argument(what + ": need at least 1 feature");
  if (f.data.size() != f.rows * f.cols)
    throw std::invalid_argument(what + ": data size mismatch");
  if (f.subject_ids.size() != f.rows)
    throw std::invalid_argument(what + ": subject id count mismatch");
  for (std::size_t i = 0; i < f.rows; ++i)
    for (std::size_t j = 0; j < f.cols; ++j)
      if (!std::isfinite(f.at(i, j)))
        throw std::invalid_argument(what + ": non-finite entry for subject " +
                                    f.subject_ids[i]);
}

inline void validate_distance_matrix(const DistanceMatrix& m, const std::string& what) {
  if (m.n < 1) throw std::invalid_argument(what + ": empty matrix");
  if (m.d.size() != m.n * m.n) throw std::invalid_argument(what + ": size mismatch");
  if (m.subject_ids.size() != m.n)
    throw std::invalid_argument(what + ": subject id count mismatch");
  for (std::size_t i = 0; i < m.n; ++i) {
    if (m.at(i, i) != 0.0)
      throw std::invalid_argument(what + ": nonzero diagonal at " + m.subject_ids[i]);
    for (std::size_t j = 0; j < m.n; ++j) {
      const double v = m.at(i, j);
      if (!std::isfinite(v))
        throw std::invalid_argument(what + ": non-finite distance at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      if (v < 0.0)
        throw std::invalid_argument(what + ": negative distance at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      if (v != m.at(j, i))
        throw std::invalid_argument(what + ": asymmetry at (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
    }
  }
}

}  // namespace toporep
