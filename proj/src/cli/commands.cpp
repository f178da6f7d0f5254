#include "eigenflow/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "eigenflow/acceptance.hpp"
#include "eigenflow/assignment.hpp"
#include "eigenflow/error.hpp"
#include "eigenflow/maslov.hpp"
#include "eigenflow/oracle.hpp"
#include "eigenflow/parallel.hpp"
#include "eigenflow/perturbation.hpp"

namespace eigenflow::cli {
namespace {

using nlohmann::json;

std::filesystem::path out_path(const RunContext& ctx, const std::string& name) {
  std::filesystem::create_directories(ctx.out_dir);
  return std::filesystem::path(ctx.out_dir) / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

json matrix_json(const Matrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(row);
  }
  return rows;
}

std::string route_name(FormRoute r) { return r == FormRoute::Mqq ? "mqq" : "boundary"; }

json crossing_json(const CrossingReport& c) {
  return {{"t0", c.t0},
          {"dim", c.dim},
          {"form_matrix", matrix_json(c.form_matrix)},
          {"eigenvalues", c.eigenvalues},
          {"n_plus", c.n_plus},
          {"n_minus", c.n_minus},
          {"signature", c.signature},
          {"regular", c.regular},
          {"route", route_name(c.route)},
          {"asymmetry", c.asymmetry}};
}

/// Deviation records of `values` against `oracle`, paired by minimum total |difference|.
json deviations(const std::vector<double>& values, const std::vector<double>& oracle) {
  const int n = static_cast<int>(values.size());
  Matrix cost(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) cost(i, j) = std::abs(values[i] - oracle[j]);
  }
  const Assignment a = solve_assignment(cost);
  json out = json::array();
  for (int i = 0; i < n; ++i) {
    const double ref = oracle[a.cols[i]];
    const double diff = std::abs(values[i] - ref);
    out.push_back({{"value", values[i]}, {"oracle", ref}, {"abs", diff}, {"rel", diff / std::max(std::abs(ref), 1e-300)}});
  }
  return out;
}

std::vector<double> scaled(const std::vector<double>& v, double s) {
  std::vector<double> out;
  for (double x : v) out.push_back(x * s);
  return out;
}

std::string iso_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json cmd_mesh(const FlowConfig& config, const RunContext& ctx) {
  const StarDomain dom = build_domain(config.domain);
  MeshOptions mo;
  mo.seed = ctx.seed;
  const TriMesh mesh = build_mesh(dom, config.h, mo);
  std::ofstream out(out_path(ctx, "mesh.txt"), std::ios::binary);
  write_mesh(out, mesh);
  json j = {{"nodes", mesh.node_count()},
            {"triangles", mesh.triangles.size()},
            {"boundary_edges", mesh.boundary_edges.size()},
            {"h", mesh.h},
            {"max_edge", mesh.max_edge_length()},
            {"area", mesh.area()},
            {"domain_area", dom.area()},
            {"perimeter", dom.perimeter()}};
  write_text(out_path(ctx, "mesh.json"), dump(j));
  return j;
}

json cmd_flow(const FlowConfig& config, const RunContext& ctx) {
  const Problem pr = build_problem(config, ctx.seed);
  const int n = config.grid_n;
  std::vector<double> ts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ts[i] = i == n - 1 ? 1.0 : config.tau + (1.0 - config.tau) * i / (n - 1);
  std::vector<std::vector<double>> values(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) { values[i] = solve_lowest(pr.assemble(ts[i]), config.branches).values; });

  std::string csv = "t,j,Lambda,lambda\r\n";
  char line[128];
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t j = 0; j < values[i].size(); ++j) {
      const double big = values[i][j];
      std::snprintf(line, sizeof line, "%.17g,%zu,%.17g,%.17g\r\n", ts[i], j + 1, big, big / (ts[i] * ts[i]));
      csv += line;
    }
  }
  write_text(out_path(ctx, "flow.csv"), csv);
  return {{"rows", ts.size() * static_cast<std::size_t>(config.branches)},
          {"grid", ts},
          {"branches", config.branches},
          {"free_dofs", pr.assemble(1.0).free_count()},
          {"file", "flow.csv"}};
}

json cmd_derivative(const FlowConfig& config, const RunContext& ctx) {
  const Problem pr = build_problem(config, ctx.seed);
  const double t0 = config.t0;
  const AssembledOperator op = pr.assemble(t0);
  const EigenCluster cl = cluster_of_branch(op, config.branch - 1, config.cluster_tol);
  const double spread = cl.lambda_big - cl.members.front();
  const int first = count_below_robust(op, cl.members.front() - 0.5 * std::min(cl.gap - spread, 1.0));

  const PerturbationInputs in = perturbation_inputs(pr, op, true);
  const Matrix T1 = build_T1(op, cl, in);
  const Matrix T2 = build_T2(op, cl, in);
  const DerivativeReport rep = first_derivatives(cl, T1);
  const AsymptoticReport asym = asymptotic_expansion(cl, T1, T2, config.group_tol);
  const CrossingReport mqq = crossing_form_mqq(pr, op, cl, cl.lambda_omega);

  oracle::FdOptions fo;
  fo.steps = config.fd_steps;
  const oracle::FdResult fd = oracle::fd_branch_derivatives(pr, t0, first, cl.m, fo);
  std::vector<double> fd_dlam, fd_half;
  json fd_branches = json::array();
  for (const auto& b : fd.branches) {
    fd_dlam.push_back(b.dlam);
    fd_half.push_back(0.5 * b.d2lam);
    fd_branches.push_back({{"branch", first + b.index + 1},
                           {"lambda", b.lambda},
                           {"dlam", b.dlam},
                           {"dlam_error", b.dlam_error},
                           {"half_d2lam", 0.5 * b.d2lam},
                           {"half_d2lam_error", 0.5 * b.d2lam_error}});
  }

  json routes;
  routes["T1"] = {{"lambda1", rep.lambda1}, {"dlam", rep.dlam}, {"T1", matrix_json(T1)}};
  routes["crossing_form"] = crossing_json(mqq);
  routes["crossing_form"]["dlam"] = scaled(mqq.eigenvalues, 1.0 / t0);
  json dev;
  dev["T1"] = deviations(rep.dlam, fd_dlam);
  dev["crossing_form"] = deviations(scaled(mqq.eigenvalues, 1.0 / t0), fd_dlam);
  try {
    const CrossingReport bd = crossing_form_boundary(pr, op, cl, cl.lambda_omega);
    routes["boundary_integral"] = crossing_json(bd);
    routes["boundary_integral"]["available"] = true;
    routes["boundary_integral"]["dlam"] = scaled(bd.eigenvalues, 1.0 / t0);
    dev["boundary_integral"] = deviations(scaled(bd.eigenvalues, 1.0 / t0), fd_dlam);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::StrongTraceUnavailable) throw;
    routes["boundary_integral"] = {{"available", false}, {"reason", e.what()}};
  }

  json groups = json::array();
  for (const auto& g : asym.groups) {
    groups.push_back({{"lambda1", g.lambda1}, {"multiplicity", g.multiplicity}, {"lambda2", g.lambda2}});
  }
  json branches = json::array();
  std::vector<double> a1s, a2s;
  for (const auto& b : asym.branches) {
    branches.push_back({{"group", b.group}, {"lambda1", b.lambda1}, {"lambda2", b.lambda2}, {"a1", b.a1}, {"a2", b.a2}});
    a1s.push_back(b.a1);
    a2s.push_back(b.a2);
  }
  // a2 is compared with the FD branch that matches its a1.
  {
    const json p = deviations(a1s, fd_dlam);
    std::vector<double> ref;
    for (std::size_t i = 0; i < a1s.size(); ++i) {
      const double target = p[i]["oracle"].get<double>();
      for (std::size_t k = 0; k < fd_dlam.size(); ++k) {
        if (fd_dlam[k] == target) {
          ref.push_back(fd_half[k]);
          break;
        }
      }
    }
    json a2dev = json::array();
    for (std::size_t i = 0; i < a2s.size(); ++i) {
      const double diff = std::abs(a2s[i] - ref[i]);
      a2dev.push_back({{"value", a2s[i]}, {"oracle", ref[i]}, {"abs", diff}, {"rel", diff / std::max(std::abs(ref[i]), 1e-300)}});
    }
    dev["a1"] = p;
    dev["a2"] = a2dev;
  }

  json j = {{"t0", t0},
            {"branch", config.branch},
            {"first_branch", first + 1},
            {"m", cl.m},
            {"lambda", cl.lambda_omega},
            {"Lambda", cl.lambda_big},
            {"cluster", {{"members", cl.members}, {"gap", cl.gap}, {"cluster_tol", cl.cluster_tol}}},
            {"routes", routes},
            {"expansion", {{"group_tol", asym.group_tol}, {"groups", groups}, {"branches", branches}, {"T2", matrix_json(T2)}}},
            {"oracle",
             {{"steps", fd.steps},
              {"branches", fd_branches},
              {"pairing_cost", fd.pairing_cost},
              {"pairing_runner_up", fd.pairing_runner_up}}},
            {"deviations", dev}};
  write_text(out_path(ctx, "derivative.json"), dump(j));
  return j;
}

json cmd_maslov(const FlowConfig& config, const RunContext& ctx) {
  if (!config.lambda0) fail(ErrorKind::ConfigError, config.source + ": field 'target.lambda0' is required for maslov");
  if (config.grid_n < 8) fail(ErrorKind::ConfigError, config.source + ": field 'flow.grid_n' must be at least 8 for maslov");
  const Problem pr = build_problem(config, ctx.seed);
  CrossingOptions co;
  co.cluster_tol = config.cluster_tol;
  const double a = config.tau, b = 1.0;
  const MaslovResult m = maslov_index(pr, *config.lambda0, a, b, config.grid_n, co);
  json crossings = json::array();
  for (const auto& c : m.crossings) {
    json cj = crossing_json(c);
    cj["contribution"] = crossing_contribution(c, a, b);
    crossings.push_back(cj);
  }
  json j = {{"a", a}, {"b", b}, {"lambda0", *config.lambda0}, {"crossings", crossings}};
  if (m.index) j["index"] = *m.index;
  if (!m.warning.empty()) j["warning"] = m.warning;
  if (config.bc.kind == BcKind::Dirichlet) {
    const int count = oracle::spectral_count(pr, *config.lambda0, a, b);
    j["spectral_count"] = count;
    if (m.index) j["consistent"] = (-*m.index == count);
  }
  write_text(out_path(ctx, "maslov.json"), dump(j));
  return j;
}

json cmd_verify(const RunContext& ctx, bool& all_passed) {
  acceptance::Options opt;
  opt.seed = ctx.seed;
  json list = json::array();
  int passed = 0;
  acceptance::run_all(opt, [&](const acceptance::CriterionResult& r) {
    std::cout << acceptance::format_line(r) << std::endl;
    if (r.passed) ++passed;
    list.push_back({{"id", r.id},
                    {"title", r.title},
                    {"passed", r.passed},
                    {"worst", r.worst},
                    {"tolerance", r.tolerance},
                    {"detail", r.detail}});
  });
  all_passed = passed == static_cast<int>(list.size());
  json j = {{"criteria", list}, {"passed", passed}, {"total", list.size()}};
  write_text(out_path(ctx, "verify.json"), dump(j));
  return j;
}

void write_metadata(const RunContext& ctx, const std::string& command, const std::string& config_path, int threads) {
  const json j = {{"command", command},
                  {"config", config_path},
                  {"timestamp", iso_now()},
                  {"threads", threads},
                  {"seed", ctx.seed},
                  {"version", "0.1.0"}};
  write_text(out_path(ctx, "metadata.json"), dump(j));
}

}  // namespace eigenflow::cli
