// Exact solution of the dense square assignment problem by shortest
// augmenting paths with dual potentials (Jonker-Volgenant style), O(n^3).

#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace toporep {

struct AssignmentResult {
  double cost = 0.0;
  std::vector<std::size_t> col_of_row;
};

/// `cost` is n x n row-major. Returns a minimum-cost perfect matching; the
/// reported cost is re-accumulated over rows in index order so equal
/// assignments always produce identical floating-point sums.
inline AssignmentResult solve_assignment(const std::vector<double>& cost, std::size_t n) {
  if (cost.size() != n * n) throw std::invalid_argument("solve_assignment: bad matrix size");
  AssignmentResult result;
  result.col_of_row.assign(n, 0);
  if (n == 0) return result;

  const double kInf = std::numeric_limits<double>::infinity();
  // 1-based; p[j] = row matched to column j, column 0 is virtual
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1, false);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= n; ++j) result.col_of_row[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) result.cost += cost[i * n + result.col_of_row[i]];
  return result;
}

}  // namespace toporep
