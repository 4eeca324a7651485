// Simplex indexing in the combinatorial number system: the simplex with
// vertices v_d > ... > v_0 has index sum_i binom(v_i, i+1). Indices within a
// fixed dimension are ordered colexicographically on the vertex set.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace toporep {

class BinomialTable {
 public:
  BinomialTable() = default;
  BinomialTable(std::int64_t n, std::int64_t k) : k_max_(k), table_((n + 1) * (k + 1)) {
    for (std::int64_t i = 0; i <= n; ++i)
      for (std::int64_t j = 0; j <= std::min(i, k); ++j)
        at(i, j) = (j == 0 || j == i) ? 1 : at(i - 1, j - 1) + at(i - 1, j);
  }

  std::int64_t operator()(std::int64_t n, std::int64_t k) const {
    if (k < 0 || k > k_max_ || n < 0) return 0;
    if (k > n) return 0;
    return table_[n * (k_max_ + 1) + k];
  }

 private:
  std::int64_t& at(std::int64_t n, std::int64_t k) {
    return table_[n * (k_max_ + 1) + k];
  }
  std::int64_t k_max_ = 0;
  std::vector<std::int64_t> table_;
};

/// Largest v with binom(v, k) <= idx, searching downward from `v`.
inline std::int64_t max_vertex_below(const BinomialTable& binom, std::int64_t idx,
                                     std::int64_t k, std::int64_t v) {
  if (binom(v, k) > idx) {
    std::int64_t count = v;
    while (count > 0) {
      std::int64_t i = v;
      const std::int64_t step = count >> 1;
      i -= step;
      if (binom(i, k) > idx) {
        v = i - 1;
        count -= step + 1;
      } else {
        count = step;
      }
    }
  }
  return v;
}

/// Vertices of the dim-simplex with the given combinatorial index, descending.
inline void simplex_vertices(const BinomialTable& binom, std::int64_t idx, int dim,
                             std::int64_t n, std::vector<std::int64_t>& out) {
  out.clear();
  std::int64_t v = n - 1;
  for (std::int64_t k = dim + 1; k > 0; --k) {
    v = max_vertex_below(binom, idx, k, v);
    out.push_back(v);
    idx -= binom(v, k);
    --v;
  }
}

/// Combinatorial index from vertices (any order; sorted internally).
inline std::int64_t simplex_index(const BinomialTable& binom,
                                  std::vector<std::int64_t> vertices) {
  std::sort(vertices.begin(), vertices.end(), std::greater<>());
  std::int64_t idx = 0;
  std::int64_t k = static_cast<std::int64_t>(vertices.size());
  for (auto v : vertices) idx += binom(v, k--);
  return idx;
}

}  // namespace toporep
