#include "tunnelwatch/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tunnelwatch/errors.hpp"

namespace tw {

namespace {

// Solves for n <= m. 1-based internally; index 0 is the virtual start column.
std::vector<std::pair<int, int>> solve_wide(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> match(m + 1, 0);  // match[j] = row assigned to column j, 0 = free
  std::vector<int> way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        const bool better = minv[j] < delta ||
                            (minv[j] == delta && j1 > 0 && match[j] == 0 && match[j1] != 0);
        if (better) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(n);
  for (int j = 1; j <= m; ++j) {
    if (match[j] != 0) pairs.emplace_back(match[j] - 1, j - 1);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace

std::vector<std::pair<int, int>> hungarian_assign(const Eigen::MatrixXd& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) return {};
  if (!cost.allFinite()) {
    throw Error("hungarian_assign: cost matrix must be finite");
  }
  if (cost.rows() <= cost.cols()) {
    return solve_wide(cost);
  }
  auto transposed = solve_wide(cost.transpose());
  for (auto& [r, c] : transposed) std::swap(r, c);
  std::sort(transposed.begin(), transposed.end());
  return transposed;
}

}  // namespace tw
