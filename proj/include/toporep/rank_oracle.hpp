// Ground truth for image persistence: the rank of the induced map
// H_k(VR_r(subsample)) -> H_k(VR_s(ambient)) by explicit Z/2 matrix algebra
// on enumerated simplices. rank = rank([Z | B]) - rank(B) where Z is a cycle
// basis of the subsample complex at r and B the ambient boundary image at s.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "toporep/brute_force.hpp"
#include "toporep/diagram.hpp"
#include "toporep/types.hpp"

namespace toporep {

namespace rank_detail {

using Bits = std::vector<std::uint64_t>;

inline void bit_set(Bits& b, int i) { b[i >> 6] |= (std::uint64_t{1} << (i & 63)); }

inline void bit_xor(Bits& a, const Bits& b) {
  for (std::size_t w = 0; w < a.size(); ++w) a[w] ^= b[w];
}

inline int highest_bit(const Bits& b) {
  for (int w = static_cast<int>(b.size()) - 1; w >= 0; --w)
    if (b[w]) return w * 64 + 63 - __builtin_clzll(b[w]);
  return -1;
}

/// Rank over GF(2); destroys its argument.
inline int gf2_rank(std::vector<Bits>& cols) {
  std::map<int, std::size_t> pivot_owner;
  int rank = 0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    int hb = highest_bit(cols[j]);
    while (hb >= 0) {
      auto it = pivot_owner.find(hb);
      if (it == pivot_owner.end()) break;
      bit_xor(cols[j], cols[it->second]);
      hb = highest_bit(cols[j]);
    }
    if (hb >= 0) {
      pivot_owner[hb] = j;
      ++rank;
    }
  }
  return rank;
}

/// Kernel basis of the column matrix over GF(2).
inline std::vector<Bits> gf2_kernel(std::vector<Bits> cols, int ncols) {
  const int vwords = (ncols + 63) / 64;
  std::vector<Bits> combo(static_cast<std::size_t>(ncols), Bits(vwords, 0));
  for (int j = 0; j < ncols; ++j) bit_set(combo[j], j);
  std::map<int, std::size_t> pivot_owner;
  std::vector<Bits> kernel;
  for (int j = 0; j < ncols; ++j) {
    int hb = highest_bit(cols[j]);
    while (hb >= 0) {
      auto it = pivot_owner.find(hb);
      if (it == pivot_owner.end()) break;
      bit_xor(cols[j], cols[it->second]);
      bit_xor(combo[j], combo[it->second]);
      hb = highest_bit(cols[j]);
    }
    if (hb >= 0)
      pivot_owner[hb] = j;
    else
      kernel.push_back(combo[j]);
  }
  return kernel;
}

}  // namespace rank_detail

inline int induced_rank_oracle(const DistanceMatrix& D, const SubsampleMask& mask, int k,
                               double r, double s) {
  validate_distance_matrix(D, "induced_rank_oracle");
  validate_mask(mask, D.n);
  if (D.n > 8)
    throw std::invalid_argument("induced_rank_oracle: N must be <= 8, got " +
                                std::to_string(D.n));
  if (!(r <= s)) throw std::invalid_argument("induced_rank_oracle: need r <= s");
  if (k < 0 || k > 2) throw std::invalid_argument("induced_rank_oracle: k must be 0..2");

  using brute_detail::Simp;
  using namespace rank_detail;
  BinomialTable binom(static_cast<std::int64_t>(D.n), k + 3);

  // ambient simplices at value <= s, dimensions k-1, k, k+1
  std::vector<Simp> amb;
  brute_detail::enumerate_simplices(D, k + 1, s, binom, amb);

  std::map<std::int64_t, int> amb_row;      // k-simplex cindex -> row
  std::vector<const Simp*> amb_k, amb_k1;   // dim k, dim k+1
  for (const Simp& sp : amb) {
    if (sp.dim == k) {
      amb_row[sp.cindex] = static_cast<int>(amb_k.size());
      amb_k.push_back(&sp);
    } else if (sp.dim == k + 1) {
      amb_k1.push_back(&sp);
    }
  }
  const int nrows = static_cast<int>(amb_k.size());
  const int words = std::max(1, (nrows + 63) / 64);

  auto boundary_in_rows = [&](const Simp& sp, const std::map<std::int64_t, int>& rows,
                              int row_words) {
    Bits col(row_words, 0);
    std::vector<std::int64_t> face(sp.vertices.size() - 1);
    for (std::size_t drop = 0; drop < sp.vertices.size(); ++drop) {
      std::size_t t = 0;
      for (std::size_t i = 0; i < sp.vertices.size(); ++i)
        if (i != drop) face[t++] = sp.vertices[i];
      bit_set(col, rows.at(simplex_index(binom, face)));
    }
    return col;
  };

  // cycle basis of the subsample complex at r, expressed in ambient k-rows
  std::vector<Bits> z_cols;
  {
    std::vector<const Simp*> sub_k;
    std::map<std::int64_t, int> sub_face_row;
    for (const Simp& sp : amb) {
      if (sp.value > r) continue;
      bool inc = true;
      for (auto v : sp.vertices) inc = inc && mask.included[v];
      if (!inc) continue;
      if (sp.dim == k) sub_k.push_back(&sp);
      if (sp.dim == k - 1) sub_face_row[sp.cindex] = static_cast<int>(sub_face_row.size());
    }
    const int fwords = std::max(1, (static_cast<int>(sub_face_row.size()) + 63) / 64);
    std::vector<Bits> bd;
    bd.reserve(sub_k.size());
    for (const Simp* sp : sub_k)
      bd.push_back(k == 0 ? Bits(fwords, 0) : boundary_in_rows(*sp, sub_face_row, fwords));
    const auto kernel = gf2_kernel(std::move(bd), static_cast<int>(sub_k.size()));
    for (const Bits& combo : kernel) {
      Bits col(words, 0);
      for (int j = 0; j < static_cast<int>(sub_k.size()); ++j)
        if (combo[j >> 6] & (std::uint64_t{1} << (j & 63)))
          bit_set(col, amb_row.at(sub_k[j]->cindex));
      z_cols.push_back(std::move(col));
    }
  }

  // ambient boundary image at s
  std::vector<Bits> b_cols;
  b_cols.reserve(amb_k1.size());
  for (const Simp* sp : amb_k1) b_cols.push_back(boundary_in_rows(*sp, amb_row, words));

  std::vector<Bits> zb = b_cols;
  zb.insert(zb.end(), z_cols.begin(), z_cols.end());
  const int rank_zb = gf2_rank(zb);
  const int rank_b = gf2_rank(b_cols);
  return rank_zb - rank_b;
}

}  // namespace toporep
