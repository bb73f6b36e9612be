#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace tw {

/// Minimum-cost assignment on an n x m cost matrix (Kuhn-Munkres with row
/// potentials and shortest augmenting paths). Returns min(n, m) (row, col)
/// pairs sorted by row; each row and column is used at most once.
///
/// Ties between equal-cost assignments resolve deterministically in favor of
/// low row and column indices: columns are scanned in ascending order and a
/// free column is preferred over rerouting an existing match.
///
/// Throws tw::Error when any cost is not finite.
std::vector<std::pair<int, int>> hungarian_assign(const Eigen::MatrixXd& cost);

}  // namespace tw
