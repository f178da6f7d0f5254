#include "eigenflow/assignment.hpp"

#include <limits>

#include "eigenflow/error.hpp"

namespace eigenflow {

Assignment solve_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) fail(ErrorKind::InvalidArgument, "assignment needs a square cost matrix");
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials formulation, 1-based with a dummy column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double c = cost(i0 - 1, j - 1);
        const double cur = (c == inf ? 1e300 : c) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
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
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment a;
  a.cols.assign(n, -1);
  for (int j = 1; j <= n; ++j) a.cols[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) a.cost += cost(i, a.cols[i]);
  return a;
}

Assignment second_best_assignment(const Matrix& cost, const Assignment& best) {
  const double inf = std::numeric_limits<double>::infinity();
  Assignment out;
  out.cost = inf;
  const int n = static_cast<int>(cost.rows());
  for (int i = 0; i < n; ++i) {
    Matrix c = cost;
    c(i, best.cols[i]) = inf;
    Assignment a = solve_assignment(c);
    if (a.cost < out.cost) out = a;
  }
  return out;
}

}  // namespace eigenflow
