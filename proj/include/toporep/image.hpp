// Image persistence of the inclusion VR(subsample) -> VR(full point set).
//
// Both filtrations are realized on the ambient simplex set: a simplex keeps
// its ambient diameter in the subsample filtration when all its vertices are
// included, and is pushed beyond the threshold (sentinel) otherwise. Births
// are read in the subsample order, deaths in the ambient order. Excluded
// simplices still participate in the reduction (they sort first and never
// emit); dropping them would change which ambient cofacets later columns
// must reduce against.

#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "toporep/diagram.hpp"
#include "toporep/types.hpp"
#include "toporep/vr.hpp"

namespace toporep {

inline ImageDiagram image_persistence(const DistanceMatrix& D, const SubsampleMask& mask,
                                      const FiltrationParams& params,
                                      const std::string& label = "") {
  validate_distance_matrix(D, "image_persistence");
  validate_filtration_params(params, /*min_dim=*/1);
  validate_mask(mask, D.n);
  if (mask.count < 3)
    throw std::invalid_argument(
        "image_persistence: mask must include at least 3 points for 1-cycles");

  double dmax = 0.0;
  for (double v : D.d) dmax = std::max(dmax, v);
  const double sentinel = 2.0 * dmax;
  if (!(dmax < sentinel))
    throw std::invalid_argument(
        "image_persistence: sentinel collides with a finite distance (all-zero input)");

  using namespace vr_detail;
  const double threshold = resolve_threshold(D, params);
  Engine engine(D, params.max_dim, threshold, &mask.included, sentinel);
  const index_t n = engine.n();

  ImageDiagram out;
  out.mask = mask;
  out.source_label = label;
  out.sentinel = sentinel;

  // edges in subsample filtration order (included first, excluded at the
  // sentinel); the dim-0 pass needs them in ambient order instead
  const std::vector<Entry> edges = engine.sorted_edges();
  std::vector<Entry> ambient_edges = edges;
  std::sort(ambient_edges.begin(), ambient_edges.end(), [](const Entry& a, const Entry& b) {
    return a.amb < b.amb || (a.amb == b.amb && a.idx > b.idx);
  });

  // Dimension 0: image classes are ambient components holding an included
  // vertex; one dies whenever two such components merge.
  {
    UnionFind uf(n);
    std::vector<bool> occupied(mask.included.begin(), mask.included.end());
    std::vector<index_t> min_included(n);
    for (index_t v = 0; v < n; ++v) min_included[v] = mask.included[v] ? v : n;
    for (const Entry& e : ambient_edges) {
      index_t u, v;
      engine.edge_vertices(e.idx, u, v);
      const index_t ru = uf.find(u), rv = uf.find(v);
      if (ru == rv) continue;
      const bool both = occupied[ru] && occupied[rv];
      const index_t dying = std::max(min_included[ru], min_included[rv]);
      const bool any = occupied[ru] || occupied[rv];
      const index_t mi = std::min(min_included[ru], min_included[rv]);
      const index_t root = uf.link(ru, rv);
      occupied[root] = any;
      min_included[root] = mi;
      if (both && e.amb > 0.0)
        out.intervals.push_back(ImageInterval{0, 0.0, e.amb, dying, e.idx});
    }
  }

  // Columns for dimension 1: edges that close a cycle in the subsample
  // filtration order (included edges first, excluded ones at the sentinel).
  std::vector<Entry> columns;
  {
    UnionFind uf(n);
    for (const Entry& e : edges) {
      index_t u, v;
      engine.edge_vertices(e.idx, u, v);
      const index_t ru = uf.find(u), rv = uf.find(v);
      if (ru != rv)
        uf.link(ru, rv);
      else
        columns.push_back(e);
    }
  }
  std::sort(columns.begin(), columns.end(), ReductionOrder{});

  for (int dim = 1; dim <= params.max_dim; ++dim) {
    std::unordered_map<index_t, std::size_t> image_pivots;
    const auto pairs = engine.compute_pairs(columns, dim, Pass::image, image_pivots);
    for (const auto& pr : pairs) {
      // excluded columns carry the sentinel as birth and never pass this test
      if (pr.pivot.idx != -1 && pr.pivot.sort_value > pr.column.sort_value)
        out.intervals.push_back(ImageInterval{dim, pr.column.sort_value, pr.pivot.sort_value,
                                              pr.column.idx, pr.pivot.idx});
    }
    if (dim < params.max_dim) {
      std::unordered_map<index_t, std::size_t> sub_pivots;
      engine.compute_pairs(columns, dim, Pass::sub, sub_pivots);
      columns = engine.assemble_columns(dim + 1, sub_pivots);
    }
  }

  out.sort();
  return out;
}

}  // namespace toporep
