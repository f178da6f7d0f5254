#pragma once

#include <memory>

#include "eigenflow/assembly.hpp"
#include "eigenflow/geometry.hpp"
#include "eigenflow/potential.hpp"

namespace testutil {

inline std::shared_ptr<const eigenflow::TriMesh> mesh_of(const eigenflow::StarDomain& d, double h) {
  return std::make_shared<const eigenflow::TriMesh>(eigenflow::build_mesh(d, h));
}

inline eigenflow::Problem dirichlet(const eigenflow::StarDomain& d, double h,
                                    eigenflow::MatrixPotential v = eigenflow::zero_potential()) {
  return eigenflow::Problem(mesh_of(d, h), std::move(v), eigenflow::BoundaryCondition::dirichlet());
}

inline eigenflow::Problem robin(const eigenflow::StarDomain& d, double h, double theta,
                                eigenflow::MatrixPotential v = eigenflow::zero_potential()) {
  const int n = v.components();
  return eigenflow::Problem(mesh_of(d, h), std::move(v), eigenflow::BoundaryCondition::robin_constant(theta, n));
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testutil
