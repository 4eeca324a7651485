// Vietoris-Rips persistence of a distance matrix.
//
// The engine reduces coboundary matrices: for each dimension d the columns
// are the d-simplices in order of decreasing filtration value, the rows their
// (d+1)-cofacets, enumerated implicitly from the distance matrix. Columns
// known to reduce to zero are cleared using the pivots of the previous
// dimension, and zero-persistence pairs whose cofacet shares the simplex
// diameter are short-circuited before the heap is built. Dimension 0 is
// handled by a union-find pass over the edges.
//
// The same machinery runs the image persistence of VR(subsample) -> VR(full):
// both filtrations live on the ambient simplex set, the subsample filtration
// assigning excluded simplices a sentinel beyond the threshold. Every ambient
// simplex is still a column (excluded ones sort first, carry the sentinel as
// their birth value and therefore never emit); the emitting pass reads pivots
// in the ambient order (deaths), a second pass reads them in the subsample
// order to drive clearing for the next dimension.
//
// Tie-breaking: the ascending filtration order is (value, index descending);
// reductions process simplices in its exact reverse, (value descending,
// index ascending). One refinement is used everywhere.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "toporep/combinatorics.hpp"
#include "toporep/diagram.hpp"
#include "toporep/types.hpp"

namespace toporep {

/// min over points of the max distance to the others; beyond this radius the
/// complex is a cone, so no new finite intervals in dimensions >= 1 arise.
inline double enclosing_radius(const DistanceMatrix& D) {
  double enc = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < D.n; ++i) {
    double mx = 0.0;
    for (std::size_t j = 0; j < D.n; ++j) mx = std::max(mx, D.at(i, j));
    enc = std::min(enc, mx);
  }
  return enc;
}

inline double resolve_threshold(const DistanceMatrix& D, const FiltrationParams& p) {
  return p.threshold ? *p.threshold : enclosing_radius(D);
}

namespace vr_detail {

using index_t = std::int64_t;

// `sort_value` orders the reduction (the subsample value in image mode, the
// sentinel for excluded simplices); `amb` is always the true ambient
// diameter. They coincide for every simplex of a plain filtration.
struct Entry {
  double sort_value = 0.0;
  double amb = 0.0;
  index_t idx = -1;
};

// "a comes before b" in reduction order. The max element of a heap under
// this comparator is the entry with the smallest value and, among ties, the
// largest index -- the pivot.
struct ReductionOrder {
  bool operator()(const Entry& a, const Entry& b) const {
    return a.sort_value > b.sort_value ||
           (a.sort_value == b.sort_value && a.idx < b.idx);
  }
};

// ascending filtration order; the exact reverse of ReductionOrder
struct FiltrationOrder {
  bool operator()(const Entry& a, const Entry& b) const {
    return a.sort_value < b.sort_value ||
           (a.sort_value == b.sort_value && a.idx > b.idx);
  }
};

using Heap = std::priority_queue<Entry, std::vector<Entry>, ReductionOrder>;

// Z/2 coefficients: entries pushed twice cancel.
inline Entry pop_pivot(Heap& h) {
  while (!h.empty()) {
    Entry pivot = h.top();
    h.pop();
    if (h.empty() || h.top().idx != pivot.idx) return pivot;
    h.pop();  // cancel the pair and keep looking
  }
  return Entry{};
}

inline Entry get_pivot(Heap& h) {
  Entry e = pop_pivot(h);
  if (e.idx != -1) h.push(e);
  return e;
}

class SparseColumns {
 public:
  void append_column() { bounds_.push_back(entries_.size()); }
  void push_back(Entry e) {
    entries_.push_back(e);
    ++bounds_.back();
  }
  void pop_back() {
    entries_.pop_back();
    --bounds_.back();
  }
  const Entry* begin(std::size_t i) const {
    return entries_.data() + (i == 0 ? 0 : bounds_[i - 1]);
  }
  const Entry* end(std::size_t i) const { return entries_.data() + bounds_[i]; }

 private:
  std::vector<std::size_t> bounds_;
  std::vector<Entry> entries_;
};

class UnionFind {
 public:
  explicit UnionFind(index_t n) : parent_(n), rank_(n, 0), min_vertex_(n) {
    for (index_t i = 0; i < n; ++i) parent_[i] = i, min_vertex_[i] = i;
  }
  index_t find(index_t x) {
    index_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      index_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }
  /// Links roots x, y; returns the new root.
  index_t link(index_t x, index_t y) {
    if (rank_[x] < rank_[y]) std::swap(x, y);
    parent_[y] = x;
    if (rank_[x] == rank_[y]) ++rank_[x];
    min_vertex_[x] = std::min(min_vertex_[x], min_vertex_[y]);
    return x;
  }
  index_t min_vertex(index_t root) const { return min_vertex_[root]; }

 private:
  std::vector<index_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::vector<index_t> min_vertex_;
};

enum class Pass {
  plain,  // ordinary persistence: emit pairs, pivots drive clearing
  image,  // image persistence: cofacets admitted and ordered by ambient value
  sub     // subsample persistence: only fully included cofacets; no emission
};

class Engine {
 public:
  Engine(const DistanceMatrix& D, int max_dim, double threshold,
         const std::vector<bool>* mask, double sentinel = 0.0)
      : n_(static_cast<index_t>(D.n)),
        max_dim_(max_dim),
        threshold_(threshold),
        sentinel_(sentinel),
        dist_(D.d),
        mask_(mask),
        binom_(n_, max_dim + 2) {}

  double dist(index_t i, index_t j) const { return dist_[i * n_ + j]; }
  bool masked(index_t v) const { return mask_ == nullptr || (*mask_)[v]; }
  double sentinel() const { return sentinel_; }

  double diameter(index_t idx, int dim) const {
    simplex_vertices(binom_, idx, dim, n_, scratch_);
    double d = 0.0;
    for (std::size_t i = 0; i < scratch_.size(); ++i)
      for (std::size_t j = i + 1; j < scratch_.size(); ++j)
        d = std::max(d, dist(scratch_[i], scratch_[j]));
    return d;
  }

  bool simplex_masked(index_t idx, int dim) const {
    if (mask_ == nullptr) return true;
    simplex_vertices(binom_, idx, dim, n_, scratch_);
    for (auto v : scratch_)
      if (!(*mask_)[v]) return false;
    return true;
  }

  Entry make_column(double amb_diam, bool is_masked, index_t idx) const {
    return Entry{is_masked ? amb_diam : sentinel_, amb_diam, idx};
  }

  // Cofacets of a simplex, enumerated by decreasing added vertex, which is
  // also decreasing cofacet index.
  class CofaceEnumerator {
   public:
    CofaceEnumerator(Entry simplex, int dim, const Engine& e)
        : engine_(e),
          idx_below_(simplex.idx),
          idx_above_(0),
          v_(e.n_ - 1),
          k_(dim + 1),
          base_diam_(simplex.amb) {
      simplex_vertices(e.binom_, simplex.idx, dim, e.n_, vertices_);
    }

    bool has_next() {
      while (v_ != -1 && engine_.binom_(v_, k_) <= idx_below_) {
        idx_below_ -= engine_.binom_(v_, k_);
        idx_above_ += engine_.binom_(v_, k_ + 1);
        --v_;
        --k_;
      }
      return v_ != -1;
    }

    /// Next cofacet with its ambient diameter; `added_vertex` receives the
    /// vertex completing it.
    Entry next(index_t& added_vertex) {
      double diam = base_diam_;
      for (auto w : vertices_) diam = std::max(diam, engine_.dist(v_, w));
      const index_t idx = idx_above_ + engine_.binom_(v_, k_ + 1) + idx_below_;
      added_vertex = v_--;
      return Entry{diam, diam, idx};
    }

   private:
    const Engine& engine_;
    index_t idx_below_, idx_above_, v_, k_;
    double base_diam_;
    std::vector<index_t> vertices_;
  };

  struct EmittedPair {
    Entry column;  // birth simplex (dim d); sort_value is the birth
    Entry pivot;   // death simplex (dim d+1); idx == -1 for essential classes
  };

  /// Reduce `columns` (sorted in reduction order); returns all pairs found.
  /// `pivot_to_column` maps cofacet index -> column position and must start
  /// empty; it is filled as pairs are found.
  std::vector<EmittedPair> compute_pairs(
      const std::vector<Entry>& columns, int dim, Pass pass,
      std::unordered_map<index_t, std::size_t>& pivot_to_column) const {
    std::vector<EmittedPair> out;
    SparseColumns reduction_matrix;
    std::vector<Entry> admitted;
    pivot_to_column.reserve(columns.size());

    for (std::size_t i = 0; i < columns.size(); ++i) {
      const Entry column = columns[i];
      Heap working_v, working_coboundary;
      std::size_t column_to_add = i;

      reduction_matrix.append_column();
      reduction_matrix.push_back(column);

      for (;;) {
        const bool allow_emergent = (column_to_add == i);
        Entry pivot = add_coboundary(reduction_matrix, column_to_add, column, dim, pass,
                                     allow_emergent, pivot_to_column, working_v,
                                     working_coboundary, admitted);
        if (pivot.idx != -1) {
          auto it = pivot_to_column.find(pivot.idx);
          if (it != pivot_to_column.end()) {
            column_to_add = it->second;
            continue;
          }
          pivot_to_column.emplace(pivot.idx, i);
          out.push_back(EmittedPair{column, pivot});
          // replace the identity seed by the fully reduced column
          reduction_matrix.pop_back();
          for (;;) {
            Entry e = pop_pivot(working_v);
            if (e.idx == -1) break;
            reduction_matrix.push_back(e);
          }
        } else {
          out.push_back(EmittedPair{column, Entry{}});
        }
        break;
      }
    }
    return out;
  }

  /// All dim-simplices admitted as columns (ambient threshold, clearing),
  /// sorted in reduction order. In image mode excluded simplices stay
  /// columns, sorted to the front by the sentinel.
  std::vector<Entry> assemble_columns(
      int dim, const std::unordered_map<index_t, std::size_t>& cleared) const {
    std::vector<Entry> columns;
    const index_t count = binom_(n_, dim + 1);
    for (index_t idx = 0; idx < count; ++idx) {
      if (cleared.find(idx) != cleared.end()) continue;
      const double diam = diameter(idx, dim);
      if (diam <= threshold_)
        columns.push_back(make_column(diam, simplex_masked(idx, dim), idx));
    }
    std::sort(columns.begin(), columns.end(), ReductionOrder{});
    return columns;
  }

  /// Edges with ambient diameter <= threshold in ascending filtration order.
  /// Image mode: excluded edges carry the sentinel and sort last.
  std::vector<Entry> sorted_edges() const {
    std::vector<Entry> edges;
    for (index_t j = 1; j < n_; ++j)
      for (index_t i = 0; i < j; ++i) {
        const double d = dist(i, j);
        if (d <= threshold_) {
          const index_t idx = binom_(j, 2) + binom_(i, 1);
          edges.push_back(make_column(d, masked(i) && masked(j), idx));
        }
      }
    std::sort(edges.begin(), edges.end(), FiltrationOrder{});
    return edges;
  }

  void edge_vertices(index_t idx, index_t& u, index_t& v) const {
    simplex_vertices(binom_, idx, 1, n_, scratch_);
    u = scratch_[0];
    v = scratch_[1];
  }

  index_t n() const { return n_; }
  double threshold() const { return threshold_; }

 private:
  // Accumulates the coboundary of the stored column `column_to_add` into the
  // working heaps and returns the current pivot. When reducing the original
  // single-entry column, an unpaired cofacet sharing the column's birth value
  // is returned immediately (it is the raw pivot and forms a zero-persistence
  // pair, so the heap never needs to be built).
  Entry add_coboundary(const SparseColumns& reduction_matrix, std::size_t column_to_add,
                       Entry reducing_column, int dim, Pass pass, bool allow_emergent,
                       const std::unordered_map<index_t, std::size_t>& pivot_to_column,
                       Heap& working_v, Heap& working_coboundary,
                       std::vector<Entry>& admitted) const {
    bool might_be_emergent = allow_emergent;
    for (const Entry* it = reduction_matrix.begin(column_to_add);
         it != reduction_matrix.end(column_to_add); ++it) {
      const Entry simplex = *it;
      working_v.push(simplex);
      // a simplex is in the subsample filtration iff its sort value is real
      const bool simplex_in_sub = simplex.sort_value == simplex.amb;
      admitted.clear();
      CofaceEnumerator cofaces(simplex, dim, *this);
      while (cofaces.has_next()) {
        index_t added_vertex = -1;
        const Entry coface = cofaces.next(added_vertex);
        if (coface.amb > threshold_) continue;
        if (pass == Pass::sub && (!simplex_in_sub || !masked(added_vertex))) continue;
        admitted.push_back(coface);
        if (might_be_emergent && coface.sort_value == reducing_column.sort_value) {
          if (pivot_to_column.find(coface.idx) == pivot_to_column.end()) return coface;
          might_be_emergent = false;
        }
      }
      for (const Entry& coface : admitted) working_coboundary.push(coface);
    }
    return get_pivot(working_coboundary);
  }

  index_t n_;
  int max_dim_;
  double threshold_;
  double sentinel_;
  std::vector<double> dist_;
  const std::vector<bool>* mask_;
  BinomialTable binom_;
  mutable std::vector<index_t> scratch_;
};

}  // namespace vr_detail

/// Vietoris-Rips persistence in dimensions 0..params.max_dim. Finite
/// intervals have death <= threshold; classes alive at the threshold are
/// reported with death = +inf. Zero-persistence pairs are dropped.
inline PersistenceDiagram vr_persistence(const DistanceMatrix& D,
                                         const FiltrationParams& params,
                                         const std::string& label = "") {
  validate_distance_matrix(D, "vr_persistence");
  if (D.n < 2) throw std::invalid_argument("vr_persistence: need at least 2 points");
  validate_filtration_params(params);
  using namespace vr_detail;
  const double threshold = resolve_threshold(D, params);
  Engine engine(D, params.max_dim, threshold, nullptr);
  const index_t n = engine.n();

  PersistenceDiagram diagram;
  diagram.source_label = label;

  // dimension 0: Kruskal over the edges
  const std::vector<Entry> edges = engine.sorted_edges();
  std::vector<Entry> columns;
  {
    UnionFind uf(n);
    for (const Entry& e : edges) {
      index_t u, v;
      engine.edge_vertices(e.idx, u, v);
      index_t ru = uf.find(u), rv = uf.find(v);
      if (ru != rv) {
        // the class with the larger minimal vertex dies
        const index_t dying = std::max(uf.min_vertex(ru), uf.min_vertex(rv));
        uf.link(ru, rv);
        if (e.amb > 0.0)
          diagram.intervals.push_back(PersistenceInterval{0, 0.0, e.amb, dying, e.idx, {}});
      } else {
        columns.push_back(e);  // creates a 1-cycle
      }
    }
    for (index_t v = 0; v < n; ++v)
      if (uf.find(v) == v)
        diagram.intervals.push_back(
            PersistenceInterval{0, 0.0, kInfDeath, uf.min_vertex(v), kNoSimplex, {}});
  }
  std::sort(columns.begin(), columns.end(), ReductionOrder{});

  for (int dim = 1; dim <= params.max_dim; ++dim) {
    std::unordered_map<index_t, std::size_t> pivots;
    const auto pairs = engine.compute_pairs(columns, dim, Pass::plain, pivots);
    for (const auto& pr : pairs) {
      if (pr.pivot.idx == -1) {
        diagram.intervals.push_back(PersistenceInterval{dim, pr.column.sort_value, kInfDeath,
                                                        pr.column.idx, kNoSimplex, {}});
      } else if (pr.pivot.sort_value > pr.column.sort_value) {
        diagram.intervals.push_back(PersistenceInterval{dim, pr.column.sort_value,
                                                        pr.pivot.sort_value, pr.column.idx,
                                                        pr.pivot.idx, {}});
      }
    }
    if (dim < params.max_dim) columns = engine.assemble_columns(dim + 1, pivots);
  }

  diagram.sort();
  return diagram;
}

}  // namespace toporep
