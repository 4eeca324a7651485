// Persistence diagram containers shared by the Vietoris-Rips engine, the
// image-persistence engine and the bootstrap.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace toporep {

/// Combinatorial index of a simplex within its dimension; -1 = none.
using simplex_id = std::int64_t;
inline constexpr simplex_id kNoSimplex = -1;

inline constexpr double kInfDeath = std::numeric_limits<double>::infinity();

struct PersistenceInterval {
  int dim = 0;
  double birth = 0.0;
  double death = kInfDeath;  // +inf = essential
  simplex_id birth_simplex = kNoSimplex;
  simplex_id death_simplex = kNoSimplex;
  std::optional<double> prevalence;

  bool essential() const { return death == kInfDeath; }
  double persistence() const { return death - birth; }
};

struct PersistenceDiagram {
  std::vector<PersistenceInterval> intervals;
  std::string source_label;
  // coefficient field is fixed to Z/2Z

  /// Canonical order: (dim, birth, death), simplex ids as final tie-break so
  /// serialization is bit-stable.
  void sort() {
    std::sort(intervals.begin(), intervals.end(),
              [](const PersistenceInterval& a, const PersistenceInterval& b) {
                if (a.dim != b.dim) return a.dim < b.dim;
                if (a.birth != b.birth) return a.birth < b.birth;
                if (a.death != b.death) return a.death < b.death;
                if (a.birth_simplex != b.birth_simplex)
                  return a.birth_simplex < b.birth_simplex;
                return a.death_simplex < b.death_simplex;
              });
  }

  std::size_t count_dim(int dim, bool finite_only = false) const {
    std::size_t c = 0;
    for (const auto& iv : intervals)
      if (iv.dim == dim && (!finite_only || !iv.essential())) ++c;
    return c;
  }
};

struct FiltrationParams {
  int max_dim = 1;
  /// Filtration truncation; unset = enclosing radius of the input matrix.
  std::optional<double> threshold;
};

inline void validate_filtration_params(const FiltrationParams& p, int min_dim = 0) {
  if (p.max_dim < min_dim || p.max_dim > 2)
    throw std::invalid_argument("max_dim must be in {" + std::to_string(min_dim) +
                                ",...,2}, got " + std::to_string(p.max_dim));
  if (p.threshold && !(*p.threshold >= 0.0))
    throw std::invalid_argument("threshold must be nonnegative");
}

struct SubsampleMask {
  std::vector<bool> included;
  std::size_t count = 0;

  static SubsampleMask full(std::size_t n) {
    return SubsampleMask{std::vector<bool>(n, true), n};
  }
  static SubsampleMask from_indices(std::size_t n, const std::vector<std::size_t>& idx) {
    SubsampleMask m{std::vector<bool>(n, false), 0};
    for (auto i : idx) {
      if (i >= n) throw std::invalid_argument("mask index out of range");
      if (!m.included[i]) ++m.count;
      m.included[i] = true;
    }
    return m;
  }
};

inline void validate_mask(const SubsampleMask& m, std::size_t n) {
  if (m.included.size() != n)
    throw std::invalid_argument("mask length does not match point count");
  std::size_t c = 0;
  for (bool b : m.included) c += b ? 1 : 0;
  if (c != m.count) throw std::invalid_argument("mask count field inconsistent");
  if (m.count < 2 || m.count > n)
    throw std::invalid_argument("mask must include between 2 and N points");
}

/// One interval of the image module of VR(subsample) -> VR(ambient):
/// birth read in the subsample filtration, death in the ambient one.
struct ImageInterval {
  int dim = 0;
  double birth_sub = 0.0;
  double death_amb = 0.0;
  simplex_id birth_simplex = kNoSimplex;
  simplex_id death_simplex = kNoSimplex;
};

struct ImageDiagram {
  std::vector<ImageInterval> intervals;
  SubsampleMask mask;
  std::string source_label;
  double sentinel = 0.0;  // sub-filtration value used for excluded simplices

  void sort() {
    std::sort(intervals.begin(), intervals.end(),
              [](const ImageInterval& a, const ImageInterval& b) {
                if (a.dim != b.dim) return a.dim < b.dim;
                if (a.birth_sub != b.birth_sub) return a.birth_sub < b.birth_sub;
                if (a.death_amb != b.death_amb) return a.death_amb < b.death_amb;
                return a.death_simplex < b.death_simplex;
              });
  }
};

}  // namespace toporep
