// Textbook persistence by full boundary-matrix reduction. Definitionally
// correct and exponentially slow; the ground truth the engine is tested
// against.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "toporep/combinatorics.hpp"
#include "toporep/diagram.hpp"
#include "toporep/types.hpp"
#include "toporep/vr.hpp"

namespace toporep {

namespace brute_detail {

struct Simp {
  double value = 0.0;
  int dim = 0;
  std::vector<std::int64_t> vertices;  // ascending
  std::int64_t cindex = 0;
};

inline void enumerate_simplices(const DistanceMatrix& D, int up_to_dim, double threshold,
                                const BinomialTable& binom, std::vector<Simp>& out) {
  const auto n = static_cast<std::int64_t>(D.n);
  std::vector<std::int64_t> verts;
  // all vertex subsets of size 1..up_to_dim+1 via lexicographic combinations
  for (int dim = 0; dim <= up_to_dim; ++dim) {
    const int k = dim + 1;
    verts.assign(k, 0);
    for (int i = 0; i < k; ++i) verts[i] = i;
    if (n < k) break;
    for (;;) {
      double diam = 0.0;
      for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
          diam = std::max(diam, D.at(verts[i], verts[j]));
      if (diam <= threshold) {
        Simp s;
        s.value = diam;
        s.dim = dim;
        s.vertices = verts;
        s.cindex = simplex_index(binom, verts);
        out.push_back(std::move(s));
      }
      int i = k - 1;
      while (i >= 0 && verts[i] == n - k + i) --i;
      if (i < 0) break;
      ++verts[i];
      for (int j = i + 1; j < k; ++j) verts[j] = verts[j - 1] + 1;
    }
  }
}

}  // namespace brute_detail

/// Full boundary-matrix reduction in filtration order, ties broken by
/// (dimension, lexicographic vertex tuple). N <= 10.
inline PersistenceDiagram brute_force_persistence(const DistanceMatrix& D,
                                                  const FiltrationParams& params,
                                                  const std::string& label = "") {
  validate_distance_matrix(D, "brute_force_persistence");
  validate_filtration_params(params);
  if (D.n > 10)
    throw std::invalid_argument("brute_force_persistence: N must be <= 10, got " +
                                std::to_string(D.n));
  using brute_detail::Simp;
  const double threshold = resolve_threshold(D, params);
  BinomialTable binom(static_cast<std::int64_t>(D.n), params.max_dim + 2);

  std::vector<Simp> simplices;
  brute_detail::enumerate_simplices(D, params.max_dim + 1, threshold, binom, simplices);
  std::sort(simplices.begin(), simplices.end(), [](const Simp& a, const Simp& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.vertices < b.vertices;
  });

  std::map<std::pair<int, std::int64_t>, int> position;
  for (std::size_t i = 0; i < simplices.size(); ++i)
    position[{simplices[i].dim, simplices[i].cindex}] = static_cast<int>(i);

  // boundary columns as sorted row-position lists
  const int m = static_cast<int>(simplices.size());
  std::vector<std::vector<int>> reduced(m);
  for (int j = 0; j < m; ++j) {
    const Simp& s = simplices[j];
    if (s.dim == 0) continue;
    std::vector<std::int64_t> face(s.vertices.size() - 1);
    for (std::size_t drop = 0; drop < s.vertices.size(); ++drop) {
      std::size_t t = 0;
      for (std::size_t i = 0; i < s.vertices.size(); ++i)
        if (i != drop) face[t++] = s.vertices[i];
      reduced[j].push_back(position.at({s.dim - 1, simplex_index(binom, face)}));
    }
    std::sort(reduced[j].begin(), reduced[j].end());
  }

  std::vector<int> pivot_owner(m, -1);
  std::vector<std::pair<int, int>> pairs;  // (birth position, death position)
  std::vector<int> tmp;
  for (int j = 0; j < m; ++j) {
    auto& col = reduced[j];
    while (!col.empty()) {
      const int low = col.back();
      const int owner = pivot_owner[low];
      if (owner < 0) break;
      tmp.clear();
      std::set_symmetric_difference(col.begin(), col.end(), reduced[owner].begin(),
                                    reduced[owner].end(), std::back_inserter(tmp));
      col.swap(tmp);
    }
    if (!col.empty()) {
      pivot_owner[col.back()] = j;
      pairs.emplace_back(col.back(), j);
    }
  }

  PersistenceDiagram diagram;
  diagram.source_label = label;
  std::vector<bool> is_death(m, false), is_birth(m, false);
  for (auto [b, d] : pairs) {
    is_death[d] = true;
    is_birth[b] = true;
    const Simp& sb = simplices[b];
    const Simp& sd = simplices[d];
    if (sd.value > sb.value)
      diagram.intervals.push_back(PersistenceInterval{sb.dim, sb.value, sd.value,
                                                      sb.cindex, sd.cindex, {}});
  }
  for (int j = 0; j < m; ++j) {
    if (is_death[j] || is_birth[j]) continue;
    if (!reduced[j].empty()) continue;  // paired later; cannot happen here
    const Simp& s = simplices[j];
    if (s.dim <= params.max_dim)
      diagram.intervals.push_back(
          PersistenceInterval{s.dim, s.value, kInfDeath, s.cindex, kNoSimplex, {}});
  }
  diagram.sort();
  return diagram;
}

}  // namespace toporep
