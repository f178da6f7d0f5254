#include "eigenflow/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "eigenflow/error.hpp"
#include "eigenflow/parallel.hpp"

namespace eigenflow {
namespace {

// 3-point rule, exact for quadratics: barycentric (2/3, 1/6, 1/6) and permutations.
constexpr std::array<std::array<double, 3>, 3> kTriangleRule = {{
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
}};

// 2-point Gauss on [0, 1].
const std::array<double, 2> kEdgeRule = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};

double triangle_area_checked(const TriMesh& mesh, std::size_t k) {
  const double a = mesh.triangle_area(k);
  if (!(a > 0.0)) fail(ErrorKind::SingularElement, "triangle " + std::to_string(k) + " has non-positive area");
  return a;
}

/// Gradients of the three P1 shape functions (rows) on triangle k.
Eigen::Matrix<double, 3, 2> shape_gradients(const TriMesh& mesh, std::size_t k, double area) {
  const auto& t = mesh.triangles[k];
  const Vec2& p0 = mesh.nodes[t[0]];
  const Vec2& p1 = mesh.nodes[t[1]];
  const Vec2& p2 = mesh.nodes[t[2]];
  Eigen::Matrix<double, 3, 2> g;
  g.row(0) << p1.y() - p2.y(), p2.x() - p1.x();
  g.row(1) << p2.y() - p0.y(), p0.x() - p2.x();
  g.row(2) << p0.y() - p1.y(), p1.x() - p0.x();
  return g / (2.0 * area);
}

SparseMatrix from_chunks(int n, std::vector<std::vector<Triplet>>& chunks) {
  std::size_t total = 0;
  for (const auto& c : chunks) total += c.size();
  std::vector<Triplet> all;
  all.reserve(total);
  for (auto& c : chunks) all.insert(all.end(), c.begin(), c.end());
  SparseMatrix m(n, n);
  m.setFromTriplets(all.begin(), all.end());
  m.makeCompressed();
  return m;
}

std::vector<std::vector<Triplet>> make_chunks() {
  return std::vector<std::vector<Triplet>>(static_cast<std::size_t>(thread_count()));
}

}  // namespace

BoundaryCondition BoundaryCondition::dirichlet() { return {}; }

BoundaryCondition BoundaryCondition::robin(std::function<Matrix(const Vec2&)> theta,
                                           std::vector<FiniteRankPair> finite_rank) {
  BoundaryCondition bc;
  bc.kind = BcKind::Robin;
  bc.theta = std::move(theta);
  bc.finite_rank = std::move(finite_rank);
  return bc;
}

BoundaryCondition BoundaryCondition::robin_constant(double s, int components) {
  return robin([s, components](const Vec2&) { return (s * Matrix::Identity(components, components)).eval(); });
}

SparseMatrix stiffness_matrix(const TriMesh& mesh, int components) {
  const int n = static_cast<int>(mesh.node_count()) * components;
  auto chunks = make_chunks();
  parallel_chunks(mesh.triangles.size(), [&](std::size_t begin, std::size_t end, std::size_t c) {
    auto& out = chunks[c];
    out.reserve((end - begin) * 9 * static_cast<std::size_t>(components));
    for (std::size_t k = begin; k < end; ++k) {
      const double area = triangle_area_checked(mesh, k);
      const auto g = shape_gradients(mesh, k, area);
      const auto& t = mesh.triangles[k];
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const double v = area * g.row(a).dot(g.row(b));
          for (int comp = 0; comp < components; ++comp) {
            out.emplace_back(t[a] * components + comp, t[b] * components + comp, v);
          }
        }
      }
    }
  });
  return from_chunks(n, chunks);
}

SparseMatrix weighted_mass_matrix(const TriMesh& mesh, int components,
                                  const std::function<Matrix(const Vec2&)>& weight) {
  const int n = static_cast<int>(mesh.node_count()) * components;
  auto chunks = make_chunks();
  parallel_chunks(mesh.triangles.size(), [&](std::size_t begin, std::size_t end, std::size_t c) {
    auto& out = chunks[c];
    out.reserve((end - begin) * 9 * static_cast<std::size_t>(components * components));
    for (std::size_t k = begin; k < end; ++k) {
      const double area = triangle_area_checked(mesh, k);
      const auto& t = mesh.triangles[k];
      std::array<Matrix, 3> w;
      for (int q = 0; q < 3; ++q) {
        const auto& bary = kTriangleRule[q];
        const Vec2 x = bary[0] * mesh.nodes[t[0]] + bary[1] * mesh.nodes[t[1]] + bary[2] * mesh.nodes[t[2]];
        w[q] = weight(x);
        if (w[q].rows() != components || w[q].cols() != components) {
          fail(ErrorKind::InvalidArgument, "coefficient has the wrong number of components");
        }
      }
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          Matrix block = Matrix::Zero(components, components);
          for (int q = 0; q < 3; ++q) block += (area / 3.0) * kTriangleRule[q][a] * kTriangleRule[q][b] * w[q];
          for (int i = 0; i < components; ++i) {
            for (int j = 0; j < components; ++j) {
              if (block(i, j) != 0.0) out.emplace_back(t[a] * components + i, t[b] * components + j, block(i, j));
            }
          }
        }
      }
    }
  });
  return from_chunks(n, chunks);
}

SparseMatrix mass_matrix(const TriMesh& mesh, int components) {
  const Matrix id = Matrix::Identity(components, components);
  return weighted_mass_matrix(mesh, components, [&id](const Vec2&) { return id; });
}

SparseMatrix boundary_mass_matrix(const TriMesh& mesh, int components) {
  return boundary_form_matrix(mesh, components, BoundaryCondition::robin_constant(1.0, components)).matrix;
}

BoundaryForm boundary_form_matrix(const TriMesh& mesh, int components, const BoundaryCondition& bc) {
  const int n = static_cast<int>(mesh.node_count()) * components;
  BoundaryForm out;
  out.matrix.resize(n, n);
  if (bc.kind == BcKind::Dirichlet) return out;

  std::vector<Triplet> trip;
  double bound = -std::numeric_limits<double>::infinity();
  if (bc.theta) {
    for (const auto& e : mesh.boundary_edges) {
      const Vec2& p = mesh.nodes[e.nodes[0]];
      const Vec2& q = mesh.nodes[e.nodes[1]];
      for (double xi : kEdgeRule) {
        const Vec2 y = (1.0 - xi) * p + xi * q;
        const Matrix th = bc.theta(y);
        if (th.rows() != components || th.cols() != components) {
          fail(ErrorKind::InvalidArgument, "theta has the wrong number of components");
        }
        if ((th - th.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, th.cwiseAbs().maxCoeff())) {
          fail(ErrorKind::InvalidArgument, "theta(y) must be symmetric");
        }
        bound = std::max(bound, Eigen::SelfAdjointEigenSolver<Matrix>(th, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff());
        const std::array<double, 2> phi = {1.0 - xi, xi};
        const double w = 0.5 * e.length;
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            for (int i = 0; i < components; ++i) {
              for (int j = 0; j < components; ++j) {
                const double v = w * phi[a] * phi[b] * th(i, j);
                if (v != 0.0) trip.emplace_back(e.nodes[a] * components + i, e.nodes[b] * components + j, v);
              }
            }
          }
        }
      }
    }
  }

  if (!bc.finite_rank.empty()) {
    // Load vectors int f phi ds restricted to boundary dofs.
    std::vector<int> bdofs;
    for (int node : mesh.boundary_nodes) {
      for (int c = 0; c < components; ++c) bdofs.push_back(node * components + c);
    }
    std::vector<int> local(static_cast<std::size_t>(n), -1);
    for (std::size_t i = 0; i < bdofs.size(); ++i) local[bdofs[i]] = static_cast<int>(i);
    auto load = [&](const std::function<Vector(const Vec2&)>& f) {
      Vector out_load = Vector::Zero(static_cast<Eigen::Index>(bdofs.size()));
      for (const auto& e : mesh.boundary_edges) {
        const Vec2& p = mesh.nodes[e.nodes[0]];
        const Vec2& q = mesh.nodes[e.nodes[1]];
        for (double xi : kEdgeRule) {
          const Vector fv = f((1.0 - xi) * p + xi * q);
          if (fv.size() != components) fail(ErrorKind::InvalidArgument, "finite-rank function has the wrong size");
          const std::array<double, 2> phi = {1.0 - xi, xi};
          for (int a = 0; a < 2; ++a) {
            for (int c = 0; c < components; ++c) out_load[local[e.nodes[a] * components + c]] += 0.5 * e.length * phi[a] * fv[c];
          }
        }
      }
      return out_load;
    };
    const auto nb = static_cast<Eigen::Index>(bdofs.size());
    Matrix dense = Matrix::Zero(nb, nb);
    for (const auto& pair : bc.finite_rank) dense += load(pair.g) * load(pair.f).transpose();
    const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
    if ((dense - dense.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      fail(ErrorKind::InvalidArgument, "finite-rank part of Theta is not symmetric");
    }
    for (Eigen::Index i = 0; i < nb; ++i) {
      for (Eigen::Index j = 0; j < nb; ++j) {
        if (dense(i, j) != 0.0) trip.emplace_back(bdofs[i], bdofs[j], dense(i, j));
      }
    }
  }

  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.matrix.makeCompressed();
  out.theta_bound = std::isfinite(bound) ? bound : 0.0;
  return out;
}

SparseMatrix AssembledOperator::A_full() const {
  SparseMatrix a = K + MV;
  if (kind == BcKind::Robin) a -= t * B;
  return a;
}

Vector AssembledOperator::restrict(const Vector& full) const {
  Vector r(free_count());
  for (int i = 0; i < free_count(); ++i) r[i] = full[free_dofs[i]];
  return r;
}

Matrix AssembledOperator::restrict(const Matrix& full) const {
  Matrix r(free_count(), full.cols());
  for (int i = 0; i < free_count(); ++i) r.row(i) = full.row(free_dofs[i]);
  return r;
}

Vector AssembledOperator::prolong(const Vector& reduced) const {
  Vector f = Vector::Zero(dof_count());
  for (int i = 0; i < free_count(); ++i) f[free_dofs[i]] = reduced[i];
  return f;
}

Matrix AssembledOperator::prolong(const Matrix& reduced) const {
  Matrix f = Matrix::Zero(dof_count(), reduced.cols());
  for (int i = 0; i < free_count(); ++i) f.row(free_dofs[i]) = reduced.row(i);
  return f;
}

SparseMatrix AssembledOperator::restrict(const SparseMatrix& full) const {
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(full.nonZeros()));
  for (int col = 0; col < full.outerSize(); ++col) {
    const int jc = free_index[col];
    if (jc < 0) continue;
    for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
      const int ir = free_index[it.row()];
      if (ir >= 0) trip.emplace_back(ir, jc, it.value());
    }
  }
  SparseMatrix r(free_count(), free_count());
  r.setFromTriplets(trip.begin(), trip.end());
  r.makeCompressed();
  return r;
}

Problem::Problem(std::shared_ptr<const TriMesh> mesh, MatrixPotential potential, BoundaryCondition bc)
    : mesh_(std::move(mesh)), potential_(std::move(potential)), bc_(std::move(bc)) {
  if (!mesh_) fail(ErrorKind::InvalidArgument, "problem needs a mesh");
  const int nc = potential_.components();
  K_ = stiffness_matrix(*mesh_, nc);
  M_ = mass_matrix(*mesh_, nc);
  BoundaryForm bf = boundary_form_matrix(*mesh_, nc, bc_);
  B_ = std::move(bf.matrix);
  theta_bound_ = bf.theta_bound;

  const int n = static_cast<int>(mesh_->node_count()) * nc;
  free_index_.assign(static_cast<std::size_t>(n), -1);
  for (int node = 0; node < static_cast<int>(mesh_->node_count()); ++node) {
    if (bc_.kind == BcKind::Dirichlet && mesh_->is_boundary_node(node)) continue;
    for (int c = 0; c < nc; ++c) {
      free_index_[node * nc + c] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(node * nc + c);
    }
  }
  if (free_dofs_.empty()) fail(ErrorKind::InvalidArgument, "mesh has no free degrees of freedom");
}

AssembledOperator Problem::assemble(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorKind::InvalidArgument, "scale t must be positive");
  AssembledOperator op;
  op.t = t;
  op.components = components();
  op.kind = bc_.kind;
  op.mesh = mesh_;
  op.K = K_;
  op.M = M_;
  op.B = B_;
  op.theta_bound = theta_bound_;
  const MatrixPotential& v = potential_;
  op.MV = weighted_mass_matrix(*mesh_, components(), [&v, t](const Vec2& x) { return (t * t * v.value(t * x)).eval(); });
  op.free_dofs = free_dofs_;
  op.free_index = free_index_;
  op.A_reduced = op.restrict(op.A_full());
  op.M_reduced = op.restrict(op.M);
  return op;
}

Problem::DerivativeMatrices Problem::derivative_matrices(double t0, bool with_second) const {
  DerivativeMatrices d;
  const MatrixPotential& v = potential_;
  d.first = weighted_mass_matrix(*mesh_, components(),
                                 [&v, t0](const Vec2& x) { return potential_t_derivatives(v, t0, x, false).first; });
  if (with_second) {
    d.second = weighted_mass_matrix(*mesh_, components(),
                                    [&v, t0](const Vec2& x) { return potential_t_derivatives(v, t0, x, true).second; });
  }
  return d;
}

AssembledOperator assemble(const Problem& problem, double t) { return problem.assemble(t); }

SparseMatrix theta_d_matrix(const AssembledOperator& op) {
  if (op.kind != BcKind::Robin) fail(ErrorKind::WrongBC, "Theta_D is only defined for Robin-type conditions");
  return op.B;
}

TraceData traces(const AssembledOperator& op, const Vector& u_full, double lambda) {
  if (u_full.size() != op.dof_count()) fail(ErrorKind::InvalidArgument, "trace vector has the wrong size");
  const TriMesh& mesh = *op.mesh;
  const int nc = op.components;
  TraceData tr;
  tr.t = op.t;
  for (int node : mesh.boundary_nodes) {
    for (int c = 0; c < nc; ++c) tr.boundary_dofs.push_back(node * nc + c);
  }
  const Vector residual = (op.K * u_full + op.MV * u_full - lambda * (op.M * u_full)).eval();
  const auto nb = static_cast<Eigen::Index>(tr.boundary_dofs.size());
  tr.dirichlet.resize(nb);
  tr.weak_neumann.resize(nb);
  for (Eigen::Index i = 0; i < nb; ++i) {
    tr.dirichlet[i] = u_full[tr.boundary_dofs[i]];
    tr.weak_neumann[i] = residual[tr.boundary_dofs[i]];
  }
  for (const auto& e : mesh.boundary_edges) {
    const auto k = static_cast<std::size_t>(e.triangle);
    const double area = mesh.triangle_area(k);
    const auto g = shape_gradients(mesh, k, area);
    const auto& t = mesh.triangles[k];
    Matrix grad = Matrix::Zero(nc, 2);
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < nc; ++c) grad.row(c) += u_full[t[a] * nc + c] * g.row(a);
    }
    tr.strong_neumann.push_back(grad * e.normal);
    tr.edge_gradient.push_back(std::move(grad));
  }
  return tr;
}

void write_coo(std::ostream& out, const SparseMatrix& matrix) {
  out.precision(17);
  for (int col = 0; col < matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  }
}

}  // namespace eigenflow
