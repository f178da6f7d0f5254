#pragma once

#include <vector>

#include "eigenflow/types.hpp"

namespace eigenflow {

struct Assignment {
  /// row i is matched to column cols[i]
  std::vector<int> cols;
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method).
Assignment solve_assignment(const Matrix& cost);

/// Cheapest matching that differs from `best` in at least one row.
/// Returns +inf cost for 1 x 1 problems.
Assignment second_best_assignment(const Matrix& cost, const Assignment& best);

}  // namespace eigenflow
