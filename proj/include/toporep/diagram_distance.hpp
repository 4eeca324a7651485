// Distances between persistence diagrams: the p-Wasserstein distance and its
// prevalence-weighted variant (a pre-metric bounded above by W_p), both via
// exact assignment on diagonally augmented diagrams, plus the bottleneck
// distance used by the stability smoke test.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "toporep/assignment.hpp"
#include "toporep/diagram.hpp"

namespace toporep {

struct WeightedPoint {
  double birth = 0.0;
  double death = 0.0;
  double prevalence = 0.0;
};

/// Finite diagram points with prevalence weights and the Wasserstein degree.
struct MatchingProblem {
  std::vector<WeightedPoint> x;
  std::vector<WeightedPoint> y;
  double p = 2.0;
};

inline void validate_matching_problem(const MatchingProblem& mp) {
  if (!(mp.p >= 1.0)) throw std::invalid_argument("wasserstein: p must be >= 1");
  auto check = [](const std::vector<WeightedPoint>& pts) {
    for (const auto& q : pts) {
      if (!std::isfinite(q.birth) || !std::isfinite(q.death))
        throw std::invalid_argument("wasserstein: non-finite interval present; "
                                    "essential classes must be filtered upstream");
      if (!(q.birth < q.death))
        throw std::invalid_argument("wasserstein: intervals must satisfy birth < death");
      if (!(q.prevalence >= 0.0 && q.prevalence <= 1.0))
        throw std::invalid_argument("wasserstein: prevalence outside [0,1]");
    }
  };
  check(mp.x);
  check(mp.y);
}

namespace wass_detail {

// cost of matching a point to its diagonal projection: 2 * ((d-b)/2)^p
inline double diagonal_cost(const WeightedPoint& q, double p) {
  return 2.0 * std::pow(0.5 * (q.death - q.birth), p);
}

inline double pair_cost(const WeightedPoint& a, const WeightedPoint& b, double p) {
  return std::pow(std::abs(a.birth - b.birth), p) + std::pow(std::abs(a.death - b.death), p);
}

// Total matching cost (sum of p-th powers) after full diagonal augmentation:
// every X point may go to the diagonal and vice versa; diagonal slots carry
// prevalence 0, which is what trivializes never-matched cycles.
inline double matching_cost(const MatchingProblem& mp, bool prevalence_weighted) {
  const std::size_t nx = mp.x.size(), ny = mp.y.size();
  const std::size_t n = nx + ny;
  if (n == 0) return 0.0;
  std::vector<double> cost(n * n, 0.0);
  for (std::size_t i = 0; i < nx; ++i) {
    const double wdiag = prevalence_weighted ? std::pow(mp.x[i].prevalence, mp.p) : 1.0;
    const double cd = wdiag * diagonal_cost(mp.x[i], mp.p);
    for (std::size_t j = 0; j < ny; ++j) {
      const double w = prevalence_weighted
                           ? std::pow(std::abs(mp.x[i].prevalence - mp.y[j].prevalence), mp.p)
                           : 1.0;
      cost[i * n + j] = w * pair_cost(mp.x[i], mp.y[j], mp.p);
    }
    for (std::size_t j = ny; j < n; ++j) cost[i * n + j] = cd;
  }
  for (std::size_t j = 0; j < ny; ++j) {
    const double wdiag = prevalence_weighted ? std::pow(mp.y[j].prevalence, mp.p) : 1.0;
    const double cd = wdiag * diagonal_cost(mp.y[j], mp.p);
    for (std::size_t i = nx; i < n; ++i) cost[i * n + j] = cd;
  }
  return solve_assignment(cost, n).cost;
}

inline std::vector<WeightedPoint> finite_points(const PersistenceDiagram& d, int k,
                                                bool require_prevalence) {
  std::vector<WeightedPoint> pts;
  for (const auto& iv : d.intervals) {
    if (iv.dim != k) continue;
    if (iv.essential())
      throw std::invalid_argument("wasserstein: diagram '" + d.source_label +
                                  "' has an essential dim-" + std::to_string(k) +
                                  " interval; filter before comparing");
    WeightedPoint q{iv.birth, iv.death, 0.0};
    if (require_prevalence) {
      if (!iv.prevalence)
        throw std::invalid_argument("prevalence_wasserstein: diagram '" + d.source_label +
                                    "' has an interval without a prevalence score");
      q.prevalence = *iv.prevalence;
    }
    pts.push_back(q);
  }
  return pts;
}

}  // namespace wass_detail

/// Solves the augmented matching and returns the p-th root of the optimum.
inline double matching_distance(const MatchingProblem& mp, bool prevalence_weighted) {
  validate_matching_problem(mp);
  const double c = wass_detail::matching_cost(mp, prevalence_weighted);
  return std::pow(c, 1.0 / mp.p);
}

/// Standard p-Wasserstein between the dim-k finite parts of two diagrams.
inline double wasserstein(const PersistenceDiagram& x, const PersistenceDiagram& y, int k,
                          double p) {
  MatchingProblem mp{wass_detail::finite_points(x, k, false),
                     wass_detail::finite_points(y, k, false), p};
  return matching_distance(mp, false);
}

/// Prevalence-weighted p-Wasserstein: each pair cost is scaled by
/// |rho_X - rho_Y|^p, diagonal matches by rho^p.
inline double prevalence_wasserstein(const PersistenceDiagram& x,
                                     const PersistenceDiagram& y, int k, double p) {
  MatchingProblem mp{wass_detail::finite_points(x, k, true),
                     wass_detail::finite_points(y, k, true), p};
  return matching_distance(mp, true);
}

/// Bottleneck distance between the dim-k parts of two diagrams. Essential
/// intervals must appear in equal numbers and are matched by birth order.
/// Used by the perturbation-stability smoke test.
inline double bottleneck_distance(const PersistenceDiagram& x, const PersistenceDiagram& y,
                                  int k) {
  std::vector<WeightedPoint> px, py;
  std::vector<double> ex, ey;
  for (const auto& iv : x.intervals) {
    if (iv.dim != k) continue;
    if (iv.essential())
      ex.push_back(iv.birth);
    else
      px.push_back({iv.birth, iv.death, 0.0});
  }
  for (const auto& iv : y.intervals) {
    if (iv.dim != k) continue;
    if (iv.essential())
      ey.push_back(iv.birth);
    else
      py.push_back({iv.birth, iv.death, 0.0});
  }
  if (ex.size() != ey.size()) return std::numeric_limits<double>::infinity();
  double essential_part = 0.0;
  std::sort(ex.begin(), ex.end());
  std::sort(ey.begin(), ey.end());
  for (std::size_t i = 0; i < ex.size(); ++i)
    essential_part = std::max(essential_part, std::abs(ex[i] - ey[i]));

  const std::size_t nx = px.size(), ny = py.size(), n = nx + ny;
  if (n == 0) return essential_part;

  auto linf = [](const WeightedPoint& a, const WeightedPoint& b) {
    return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
  };
  auto half = [](const WeightedPoint& a) { return 0.5 * (a.death - a.birth); };

  std::vector<double> candidates{essential_part, 0.0};
  for (const auto& a : px) candidates.push_back(half(a));
  for (const auto& b : py) candidates.push_back(half(b));
  for (const auto& a : px)
    for (const auto& b : py) candidates.push_back(linf(a, b));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // feasible(t): perfect matching in the augmented bipartite graph at radius t
  auto feasible = [&](double t) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        bool ok;
        if (i < nx && j < ny)
          ok = linf(px[i], py[j]) <= t;
        else if (i < nx)
          ok = half(px[i]) <= t;
        else if (j < ny)
          ok = half(py[j]) <= t;
        else
          ok = true;  // diagonal to diagonal
        if (ok) adj[i].push_back(j);
      }
    }
    std::vector<int> match_col(n, -1), match_row(n, -1);
    std::vector<bool> visited(n);
    std::function<bool(std::size_t)> augment = [&](std::size_t i) -> bool {
      for (std::size_t j : adj[i]) {
        if (visited[j]) continue;
        visited[j] = true;
        if (match_col[j] < 0 || augment(static_cast<std::size_t>(match_col[j]))) {
          match_col[j] = static_cast<int>(i);
          match_row[i] = static_cast<int>(j);
          return true;
        }
      }
      return false;
    };
    std::size_t matched = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(visited.begin(), visited.end(), false);
      if (augment(i)) ++matched;
    }
    return matched == n;
  };

  std::size_t lo = 0, hi = candidates.size() - 1;
  if (!feasible(candidates[hi])) return std::numeric_limits<double>::infinity();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return std::max(candidates[lo], essential_part);
}

}  // namespace toporep
