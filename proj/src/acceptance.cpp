#include "eigenflow/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <optional>
#include <random>

#include "eigenflow/assignment.hpp"
#include "eigenflow/error.hpp"
#include "eigenflow/maslov.hpp"
#include "eigenflow/oracle.hpp"
#include "eigenflow/perturbation.hpp"

namespace eigenflow::acceptance {
namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

double rel(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

/// Pairs a[i] with ref[cols[i]] by minimum total |a - ref|.
std::vector<int> pair_up(const std::vector<double>& a, const std::vector<double>& ref) {
  const int n = static_cast<int>(a.size());
  if (static_cast<int>(ref.size()) != n) fail(ErrorKind::InvalidArgument, "pairing lists differ in length");
  Matrix cost(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) cost(i, j) = std::abs(a[i] - ref[j]);
  }
  return solve_assignment(cost).cols;
}

double paired_max_rel(const std::vector<double>& a, const std::vector<double>& ref) {
  const auto cols = pair_up(a, ref);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel(a[i], ref[cols[i]]));
  return worst;
}

std::shared_ptr<const TriMesh> mesh_of(const StarDomain& d, double h) {
  return std::make_shared<const TriMesh>(build_mesh(d, h));
}

/// Everything the suites need about one eigenvalue cluster.
struct ClusterData {
  std::string label;
  double t0 = 1.0;
  int first = 0;
  int m = 0;
  double lambda_omega = 0.0;
  std::vector<double> member_lambdas;  // Lambda / t0^2, ascending
  std::vector<double> dlam;            // T1 route
  std::vector<double> fd_dlam;
  std::vector<double> fd_half_d2;
  std::vector<double> form;  // mqq eigenvalues
  std::optional<AsymptoticReport> asym;
};

int first_index(const AssembledOperator& op, const EigenCluster& c) {
  const double spread = c.lambda_big - c.members.front();
  const double below = c.members.front() - 0.5 * std::min(c.gap - spread, 1.0);
  return count_below_robust(op, below);
}

ClusterData analyze(const Problem& pr, double t0, int branch, double cluster_tol, bool second, const std::string& label) {
  ClusterData d;
  d.label = label;
  d.t0 = t0;
  const AssembledOperator op = pr.assemble(t0);
  const EigenCluster cl = cluster_of_branch(op, branch, cluster_tol);
  d.first = first_index(op, cl);
  d.m = cl.m;
  d.lambda_omega = cl.lambda_omega;
  for (double v : cl.members) d.member_lambdas.push_back(v / (t0 * t0));

  const PerturbationInputs in = perturbation_inputs(pr, op, second);
  const Matrix T1 = build_T1(op, cl, in);
  d.dlam = first_derivatives(cl, T1).dlam;
  if (second) d.asym = asymptotic_expansion(cl, T1, build_T2(op, cl, in));

  const oracle::FdResult fd = oracle::fd_branch_derivatives(pr, t0, d.first, d.m);
  for (const auto& b : fd.branches) {
    d.fd_dlam.push_back(b.dlam);
    d.fd_half_d2.push_back(0.5 * b.d2lam);
  }
  d.form = crossing_form_mqq(pr, op, cl, cl.lambda_omega).eigenvalues;
  return d;
}

/// Clusters covering branches 0..count-1.
std::vector<ClusterData> analyze_lowest(const Problem& pr, double t0, int count, double cluster_tol, bool second,
                                        const std::string& label) {
  std::vector<ClusterData> out;
  int j = 0;
  while (j < count) {
    out.push_back(analyze(pr, t0, j, cluster_tol, second, label + " t0=" + sci(t0) + " j=" + std::to_string(j)));
    j = out.back().first + out.back().m;
  }
  return out;
}

MatrixPotential coupled_potential() {
  std::vector<PotentialEntry> e;
  e.push_back({0, 0, sum_fields({constant_field(1.0), linear_field(Vec2(1.0, 0.3))})});
  e.push_back({1, 1, polynomial_field({{0, 0, 2.0}, {2, 0, 1.0}, {0, 1, 0.5}})});
  e.push_back({0, 1, gaussian_field(0.8, Vec2(0.1, -0.1), 0.5)});
  return entrywise_potential(2, std::move(e));
}

MatrixPotential bump_potential() { return scalar_potential(gaussian_field(8.0, Vec2(0.25, 0.1), 0.35)); }

struct RandomConfig {
  std::string label;
  std::shared_ptr<const TriMesh> mesh;
  MatrixPotential potential;
};

RandomConfig random_config(std::mt19937_64& rng, double h) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  RandomConfig c;
  StarDomain dom;
  switch (static_cast<int>(rng() % 4)) {
    case 0: {
      const double r = uni(0.8, 1.2);
      dom = make_disc(r);
      c.label = "disc(" + sci(r) + ")";
      break;
    }
    case 1: {
      const double a = uni(0.8, 1.2), b = uni(0.6, 1.0);
      dom = make_ellipse(a, b);
      c.label = "ellipse(" + sci(a) + "," + sci(b) + ")";
      break;
    }
    case 2: {
      const double amp = uni(0.05, 0.2);
      const int lobes = 3 + static_cast<int>(rng() % 3);
      dom = make_flower(uni(0.9, 1.1), amp, lobes, uni(0.0, 2.0 * std::numbers::pi));
      c.label = "flower(" + std::to_string(lobes) + "," + sci(amp) + ")";
      break;
    }
    default: {
      const double s = uni(1.0, 1.6);
      dom = make_square(s);
      c.label = "square(" + sci(s) + ")";
      break;
    }
  }
  c.mesh = mesh_of(dom, h);
  switch (static_cast<int>(rng() % 4)) {
    case 0:
      c.potential = zero_potential();
      c.label += " V=0";
      break;
    case 1:
      c.potential = scalar_potential(gaussian_field(uni(-15.0, 15.0), Vec2(uni(-0.3, 0.3), uni(-0.3, 0.3)), uni(0.2, 0.5)));
      c.label += " V=gauss";
      break;
    case 2:
      c.potential = scalar_potential(linear_field(Vec2(uni(-6.0, 6.0), uni(-6.0, 6.0))));
      c.label += " V=linear";
      break;
    default: {
      Mat2 q;
      q << uni(-4.0, 4.0), uni(-2.0, 2.0), 0.0, uni(-4.0, 4.0);
      q(1, 0) = q(0, 1);
      c.potential = scalar_potential(quadratic_field(q));
      c.label += " V=quadratic";
      break;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------

const char* const kTitles[9] = {
    "scaling law, V=0 Dirichlet, disc and square",
    "constant shift V=3, second order",
    "general potentials vs FD oracle, Dirichlet and Robin",
    "degenerate splitting, square 5pi^2, V=x1",
    "crossing form (mqq) vs t0 lambda' from FD, configs of 1-4",
    "boundary-integral route, disc accuracy and Dirichlet sign",
    "Maslov index vs spectral count, Dirichlet sweeps on [0.5,1]",
    "projection and transformation-operator identities",
    "T2 expanded vs collapsed on random dense instances",
};

struct Context {
  Options options;
  /// (form eigenvalue, t0 * FD derivative) gathered by criteria 1-4.
  std::vector<std::pair<double, double>> bridge;
  std::vector<std::string> bridge_labels;
};

void add_bridge(Context& ctx, const ClusterData& d) {
  std::vector<double> ref;
  for (double v : d.fd_dlam) ref.push_back(d.t0 * v);
  const auto cols = pair_up(d.form, ref);
  for (std::size_t i = 0; i < d.form.size(); ++i) {
    ctx.bridge.emplace_back(d.form[i], ref[cols[i]]);
    ctx.bridge_labels.push_back(d.label);
  }
}

CriterionResult criterion1(Context& ctx) {
  CriterionResult r{1, kTitles[0], false, 0.0, 1e-8, "", 0.0};
  int clusters = 0;
  for (int dom = 0; dom < 2; ++dom) {
    const auto mesh = mesh_of(dom == 0 ? make_disc() : make_square(), 0.05);
    const Problem pr(mesh, zero_potential(), BoundaryCondition::dirichlet());
    for (double t0 : {0.6, 0.8, 1.0}) {
      for (const auto& d : analyze_lowest(pr, t0, 4, 0.0, false, dom == 0 ? "disc" : "square")) {
        std::vector<double> expected;
        for (double l : d.member_lambdas) expected.push_back(-2.0 * l / t0);
        r.worst = std::max(r.worst, paired_max_rel(d.dlam, expected));
        add_bridge(ctx, d);
        ++clusters;
      }
    }
  }
  r.passed = r.worst <= r.tolerance;
  r.detail = std::to_string(clusters) + " clusters (j<=4, t0 in {0.6,0.8,1}), max rel |dlam + 2 lambda/t0| = " + sci(r.worst);
  return r;
}

CriterionResult criterion2(Context& ctx) {
  CriterionResult r{2, kTitles[1], false, 0.0, 1e-8, "", 0.0};
  const double c = 3.0;
  double worst_formula = 0.0, worst_fd = 0.0;
  int branches = 0;
  for (int dom = 0; dom < 2; ++dom) {
    const auto mesh = mesh_of(dom == 0 ? make_disc() : make_square(), 0.05);
    const Problem lap(mesh, zero_potential(), BoundaryCondition::dirichlet());
    const Problem pr(mesh, scalar_potential(constant_field(c)), BoundaryCondition::dirichlet());
    const SpectrumSlice mu = solve_lowest(lap.assemble(1.0), 8);
    for (const auto& d : analyze_lowest(pr, 1.0, 4, 0.0, true, dom == 0 ? "disc V=3" : "square V=3")) {
      for (const auto& b : d.asym->branches) {
        std::vector<double> mus(mu.values.begin() + d.first, mu.values.begin() + d.first + d.m);
        double best = 0.0;
        double closest = std::abs(b.a1 + 2.0 * mus[0]);
        for (double v : mus) {
          if (std::abs(b.a1 + 2.0 * v) <= closest) {
            closest = std::abs(b.a1 + 2.0 * v);
            best = v;
          }
        }
        worst_formula = std::max({worst_formula, rel(b.a1, -2.0 * best), rel(b.a2, 3.0 * best)});
        ++branches;
      }
      for (int i = 0; i < d.m; ++i) {
        const double v = mu.values[d.first + i];
        // Branches inside one exactly degenerate cluster share the same mu.
        worst_fd = std::max({worst_fd, rel(d.fd_dlam[i], -2.0 * v), rel(d.fd_half_d2[i], 3.0 * v)});
      }
      add_bridge(ctx, d);
    }
  }
  r.worst = worst_formula;
  r.passed = worst_formula <= 1e-8 && worst_fd <= 1e-6;
  r.detail = std::to_string(branches) + " branches: max rel (a1 vs -2mu, a2 vs 3mu) = " + sci(worst_formula) +
             " (tol 1e-8); FD lambda', lambda''/2 max rel = " + sci(worst_fd) + " (tol 1e-6)";
  return r;
}

CriterionResult criterion3(Context& ctx) {
  CriterionResult r{3, kTitles[2], false, 0.0, 1e-5, "", 0.0};
  const auto mesh = mesh_of(make_disc(), 0.1);
  double worst_ratio = 0.0;
  int checks = 0;
  for (int pot = 0; pot < 2; ++pot) {
    for (int bc = 0; bc < 2; ++bc) {
      const MatrixPotential V = pot == 0 ? bump_potential() : coupled_potential();
      const int nc = V.components();
      const Problem pr(mesh, V, bc == 0 ? BoundaryCondition::dirichlet() : BoundaryCondition::robin_constant(1.0, nc));
      const std::string label = std::string(pot == 0 ? "gauss" : "coupled N=2") + (bc == 0 ? " Dirichlet" : " Robin");
      for (double t0 : {0.8, 1.0}) {
        for (const auto& d : analyze_lowest(pr, t0, 3, 0.0, true, label)) {
          r.worst = std::max(r.worst, paired_max_rel(d.dlam, d.fd_dlam));
          add_bridge(ctx, d);
          ++checks;
          if (d.m != 1) continue;
          const ExpansionBranch& b = d.asym->branches.front();
          const double lam = d.member_lambdas.front();
          auto residual = [&](double delta) {
            const double t = t0 - delta;
            const AssembledOperator op = pr.assemble(t);
            const SpectrumSlice s = solve_lowest(op, d.first + 1);
            const double exact = s.values[d.first] / (t * t);
            return std::abs(exact - (lam - b.a1 * delta + b.a2 * delta * delta));
          };
          const double r1 = residual(1e-2);
          const double r2 = residual(5e-3);
          worst_ratio = std::max(worst_ratio, r2 / r1);
        }
      }
    }
  }
  r.passed = r.worst <= 1e-5 && worst_ratio <= 0.3;
  r.detail = std::to_string(checks) + " clusters: max rel |dlam - FD| = " + sci(r.worst) +
             " (tol 1e-5); max residual(d/2)/residual(d) = " + sci(worst_ratio) + " (tol 0.3, d=1e-2)";
  return r;
}

CriterionResult criterion4(Context& ctx) {
  CriterionResult r{4, kTitles[3], false, 0.0, 1e-4, "", 0.0};
  const auto mesh = mesh_of(make_square(), 0.05);
  const Problem pr(mesh, scalar_potential(linear_field(Vec2(1.0, 0.0))), BoundaryCondition::dirichlet());
  const ClusterData d = analyze(pr, 1.0, 1, 0.5, false, "square V=x1 5pi^2");
  add_bridge(ctx, d);
  if (d.m != 2) {
    r.detail = "cluster multiplicity " + std::to_string(d.m) + ", expected 2";
    return r;
  }
  r.worst = paired_max_rel(d.dlam, d.fd_dlam);
  r.passed = r.worst <= r.tolerance;
  r.detail = "T1 branches " + num(d.dlam[0]) + ", " + num(d.dlam[1]) + " vs FD " + num(d.fd_dlam[0]) + ", " +
             num(d.fd_dlam[1]) + ": max rel " + sci(r.worst);
  return r;
}

CriterionResult criterion5(Context& ctx) {
  CriterionResult r{5, kTitles[4], false, 0.0, 1e-3, "", 0.0};
  if (ctx.bridge.empty()) {
    r.detail = "no samples (criteria 1-4 did not run)";
    return r;
  }
  std::string where;
  for (std::size_t i = 0; i < ctx.bridge.size(); ++i) {
    const double e = rel(ctx.bridge[i].first, ctx.bridge[i].second);
    if (e > r.worst) {
      r.worst = e;
      where = ctx.bridge_labels[i];
    }
  }
  r.passed = r.worst <= r.tolerance;
  r.detail = std::to_string(ctx.bridge.size()) + " form eigenvalues: max rel " + sci(r.worst) + " (" + where + ")";
  return r;
}

CriterionResult criterion6(Context& ctx) {
  CriterionResult r{6, kTitles[5], false, 0.0, 0.03, "", 0.0};
  std::vector<double> errs;
  for (double h : {0.05, 0.0125}) {
    const Problem pr(mesh_of(make_disc(), h), zero_potential(), BoundaryCondition::dirichlet());
    const AssembledOperator op = pr.assemble(1.0);
    const EigenCluster cl = cluster_of_branch(op, 0);
    const CrossingReport rep = crossing_form_boundary(pr, op, cl, cl.lambda_omega);
    errs.push_back(rel(rep.form_matrix(0, 0), -2.0 * cl.lambda_omega));
  }
  std::mt19937_64 rng(0x6b0a + ctx.options.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int tested = 0, skipped = 0, nonnegative = 0;
  std::string bad;
  while (tested < 50 && skipped < 200) {
    const RandomConfig c = random_config(rng, 0.12);
    const double t0 = 0.5 + 0.5 * u01(rng);
    const int branch = static_cast<int>(rng() % 4);
    const Problem pr(c.mesh, c.potential, BoundaryCondition::dirichlet());
    try {
      const AssembledOperator op = pr.assemble(t0);
      const EigenCluster cl = cluster_of_branch(op, branch);
      const CrossingReport b = crossing_form_boundary(pr, op, cl, cl.lambda_omega);
      const CrossingReport q = crossing_form_mqq(pr, op, cl, cl.lambda_omega);
      const double top = std::max(b.eigenvalues.back(), q.eigenvalues.back());
      if (!(top < 0.0)) {
        ++nonnegative;
        bad = c.label;
      }
      ++tested;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AmbiguousCluster) throw;
      ++skipped;
    }
  }
  r.worst = errs[1];
  r.passed = errs[0] <= 0.10 && errs[1] <= 0.03 && tested >= 50 && nonnegative == 0;
  r.detail = "disc rel err " + sci(errs[0]) + " at h=0.05 (tol 0.10), " + sci(errs[1]) + " at h=0.0125 (tol 0.03); " +
             std::to_string(tested) + " random Dirichlet crossings, " + std::to_string(nonnegative) +
             " not negative definite" + (bad.empty() ? "" : " (" + bad + ")") + ", " + std::to_string(skipped) +
             " skipped as ambiguous clusters";
  return r;
}

CriterionResult criterion7(Context& ctx) {
  CriterionResult r{7, kTitles[6], false, 0.0, 0.0, "", 0.0};
  std::mt19937_64 rng(0x7a51 + ctx.options.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int runs = 0, matches = 0, attempts = 0, crossings = 0;
  std::string bad;
  while (runs < 20 && attempts < 200) {
    ++attempts;
    const RandomConfig c = random_config(rng, 0.12);
    const Problem pr(c.mesh, c.potential, BoundaryCondition::dirichlet());
    const SpectrumSlice low = solve_lowest(pr.assemble(1.0), 4);
    const double lambda0 = low.values[0] + (low.values[3] - low.values[0]) * (0.05 + 0.9 * u01(rng));
    const int count = oracle::spectral_count(pr, lambda0, 0.5, 1.0);
    if (count < 1 || count > 3) continue;
    const MaslovResult m = maslov_index(pr, lambda0, 0.5, 1.0, 16);
    ++runs;
    crossings += count;
    if (m.index && -*m.index == count) {
      ++matches;
    } else {
      bad = c.label + " lambda0=" + sci(lambda0) + " count=" + std::to_string(count) +
            " index=" + (m.index ? std::to_string(*m.index) : "none");
    }
  }
  r.worst = runs - matches;
  r.passed = runs >= 20 && matches == runs;
  r.detail = std::to_string(matches) + "/" + std::to_string(runs) + " runs with -index == spectral count (" +
             std::to_string(crossings) + " crossings)" + (bad.empty() ? "" : "; mismatch: " + bad);
  return r;
}

CriterionResult criterion8(Context&) {
  CriterionResult r{8, kTitles[7], false, 0.0, 1e-9, "", 0.0};
  double worst_ratio_dev = 0.0;
  std::string ratios;
  for (int cfg = 0; cfg < 2; ++cfg) {
    const auto mesh = mesh_of(cfg == 0 ? make_disc() : make_square(), 0.2);
    const Problem pr(mesh, cfg == 0 ? bump_potential() : scalar_potential(linear_field(Vec2(1.0, 0.0))),
                     BoundaryCondition::dirichlet());
    const double t0 = 1.0;
    const AssembledOperator op = pr.assemble(t0);
    const EigenCluster cl = cfg == 0 ? cluster_of_branch(op, 0) : cluster_of_branch(op, 1, 0.5);
    const Projector P = cluster_projector(op, cl);
    const int n = op.dof_count();
    const Matrix I = Matrix::Identity(n, n);
    const Matrix Pd = P.dense();
    std::vector<double> ratio;
    for (double delta : {1e-2, 5e-3}) {
      const AssembledOperator opt = pr.assemble(t0 - delta);
      const RieszResult rz = riesz_projection(opt, cl);
      const TransformationOperator T(P, rz.P);
      const Matrix U = T.apply(I);
      const Matrix Uinv = T.apply_inverse(I);
      const Matrix Ptd = rz.P.dense();
      r.worst = std::max({r.worst, m_operator_norm(U * Pd - Ptd * U, op.M), m_operator_norm(U * Uinv - I, op.M)});
      ratio.push_back(projector_distance(P, rz.P) / delta);
    }
    const double q = ratio[1] / ratio[0];
    worst_ratio_dev = std::max(worst_ratio_dev, std::abs(q - 1.0));
    ratios += (ratios.empty() ? "" : ", ") + std::string(cfg == 0 ? "disc m=1 " : "square m=2 ") + sci(q);
  }
  r.passed = r.worst <= r.tolerance && worst_ratio_dev <= 0.1;
  r.detail = "max(|UP - P(t)U|, |U Uinv - I|) in M-norm = " + sci(r.worst) + " (tol 1e-9); ratio(d/2)/ratio(d): " + ratios +
             " (tol 1 +- 0.1)";
  return r;
}

CriterionResult criterion9(Context& ctx) {
  CriterionResult r{9, kTitles[8], false, 0.0, 1e-12, "", 0.0};
  std::mt19937_64 rng(0x9e37 + ctx.options.seed);
  double worst_abs = 0.0;
  std::normal_distribution<double> nd;
  auto sym = [&](int n) {
    Matrix a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
    }
    return Matrix(0.5 * (a + a.transpose()) / std::sqrt(static_cast<double>(n)));
  };
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 29);
    const int m = 1 + static_cast<int>(rng() % std::min(3, n - 1));
    // Spectral data of an operator with an m-fold eigenvalue and every other
    // eigenvalue at least 0.1 away: P from the first m columns of a random
    // orthogonal Q, S from the rest.
    Matrix g(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g(i, j) = nd(rng);
    }
    const Matrix Q = Eigen::HouseholderQR<Matrix>(g).householderQ();
    Matrix P = Matrix::Zero(n, n), S = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const Vector q = Q.col(i);
      if (i < m) {
        P += q * q.transpose();
      } else {
        const double off = (0.1 + std::abs(nd(rng))) * (rng() % 2 ? 1.0 : -1.0);
        S += q * q.transpose() / off;
      }
    }
    const Matrix vdot = sym(n), vddot = sym(n);
    Matrix theta = Matrix::Zero(n, n);
    const int boundary = 1 + static_cast<int>(rng() % n);
    theta.topLeftCorner(boundary, boundary) = sym(boundary);
    const Matrix a = dense::t2_collapsed(P, S, vdot, vddot, theta);
    const Matrix b = dense::t2_expanded(P, S, vdot, vddot, theta);
    const double scale = std::max(1.0, (vdot.norm() + theta.norm()) * (vdot.norm() + theta.norm()) * S.norm() + vddot.norm());
    const double diff = (a - b).cwiseAbs().maxCoeff();
    worst_abs = std::max(worst_abs, diff);
    r.worst = std::max(r.worst, diff / scale);
  }
  r.passed = r.worst <= r.tolerance;
  r.detail = "100 instances, n in [2,30]: max |collapsed - expanded| = " + sci(worst_abs) + ", relative to max(1, scale) " +
             sci(r.worst);
  return r;
}

}  // namespace

std::vector<CriterionResult> run_all(const Options& options, const std::function<void(const CriterionResult&)>& report) {
  Context ctx;
  ctx.options = options;
  using Fn = CriterionResult (*)(Context&);
  const Fn suite[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                      criterion6, criterion7, criterion8, criterion9};
  std::vector<CriterionResult> out;
  for (int i = 0; i < 9; ++i) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = suite[i](ctx);
    } catch (const std::exception& e) {
      r.id = i + 1;
      r.title = kTitles[i];
      r.passed = false;
      r.detail = std::string("raised ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (report) report(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.1fs", r.seconds);
  return std::string(r.passed ? "PASS" : "FAIL") + "  [" + std::to_string(r.id) + "] " + r.title + ": " + r.detail + " (" +
         secs + ")";
}

}  // namespace eigenflow::acceptance
