// Agglomerative Ward clustering via the Lance-Williams recurrence on squared
// distances. Input is any symmetric nonnegative dissimilarity; on a
// pre-metric the linkage heights may fail to be monotone, which is recorded
// rather than rejected.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "toporep/types.hpp"

namespace toporep {

struct Dendrogram {
  struct Merge {
    std::size_t a = 0;  // cluster ids: leaves 0..N-1, merge i creates id N+i
    std::size_t b = 0;
    double height = 0.0;
    std::size_t size = 0;  // leaves under the new cluster
  };
  std::vector<Merge> merges;
  std::vector<std::string> leaf_labels;
  bool monotone = true;  // heights nondecreasing; may fail on a pre-metric
};

inline Dendrogram ward_cluster(const DistanceMatrix& D) {
  validate_distance_matrix(D, "ward_cluster");
  const std::size_t n = D.n;
  const std::size_t total = 2 * n - 1;
  // squared distances between live clusters, indexed by cluster id
  std::vector<double> d2(total * total, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d2[i * total + j] = D.at(i, j) * D.at(i, j);
  std::vector<std::size_t> size(total, 1);
  std::vector<bool> alive(total, false);
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < n; ++i) {
    alive[i] = true;
    live.push_back(i);
  }

  Dendrogram out;
  out.leaf_labels = D.subject_ids;
  double last_height = -std::numeric_limits<double>::infinity();

  for (std::size_t step = 0; step + 1 < n; ++step) {
    // smallest squared distance, ties by smallest (i, j) cluster-id pair
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t ii = 0; ii < live.size(); ++ii) {
      for (std::size_t jj = ii + 1; jj < live.size(); ++jj) {
        const std::size_t i = live[ii], j = live[jj];
        const double v = d2[i * total + j];
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    const std::size_t fresh = n + step;
    const double ni = static_cast<double>(size[bi]);
    const double nj = static_cast<double>(size[bj]);
    for (std::size_t k : live) {
      if (k == bi || k == bj) continue;
      const double nk = static_cast<double>(size[k]);
      const double v = ((ni + nk) * d2[bi * total + k] + (nj + nk) * d2[bj * total + k] -
                        nk * best) /
                       (ni + nj + nk);
      d2[fresh * total + k] = v;
      d2[k * total + fresh] = v;
    }
    size[fresh] = size[bi] + size[bj];
    alive[bi] = alive[bj] = false;
    alive[fresh] = true;
    live.erase(std::remove_if(live.begin(), live.end(),
                              [&](std::size_t c) { return !alive[c]; }),
               live.end());
    live.push_back(fresh);

    const double height = std::sqrt(std::max(0.0, best));
    if (height < last_height) out.monotone = false;
    last_height = height;
    out.merges.push_back(Dendrogram::Merge{bi, bj, height, size[fresh]});
  }
  return out;
}

/// Leaf ids in dendrogram display order (left subtree before right).
inline std::vector<std::size_t> leaf_order(const Dendrogram& dg) {
  const std::size_t n = dg.leaf_labels.size();
  std::vector<std::size_t> order;
  if (n == 0) return order;
  std::function<void(std::size_t)> walk = [&](std::size_t id) {
    if (id < n) {
      order.push_back(id);
      return;
    }
    const auto& m = dg.merges[id - n];
    walk(m.a);
    walk(m.b);
  };
  walk(n == 1 ? 0 : n + dg.merges.size() - 1);
  return order;
}

/// Newick serialization with ultrametric branch lengths
/// (parent height - child height; leaves sit at height 0).
inline std::string to_newick(const Dendrogram& dg) {
  const std::size_t n = dg.leaf_labels.size();
  auto escape = [](std::string s) {
    for (char& c : s)
      if (c == ',' || c == '(' || c == ')' || c == ':' || c == ';' || c == ' ') c = '_';
    return s;
  };
  std::function<std::string(std::size_t, double&)> walk =
      [&](std::size_t id, double& height) -> std::string {
    if (id < n) {
      height = 0.0;
      return escape(dg.leaf_labels[id]);
    }
    const auto& m = dg.merges[id - n];
    double ha = 0.0, hb = 0.0;
    const std::string sa = walk(m.a, ha);
    const std::string sb = walk(m.b, hb);
    height = m.height;
    auto len = [](double parent, double child) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", std::max(0.0, parent - child));
      return std::string(buf);
    };
    return "(" + sa + ":" + len(m.height, ha) + "," + sb + ":" + len(m.height, hb) + ")";
  };
  if (n == 0) return ";";
  double h = 0.0;
  if (n == 1) return escape(dg.leaf_labels[0]) + ";";
  return walk(n + dg.merges.size() - 1, h) + ";";
}

}  // namespace toporep
