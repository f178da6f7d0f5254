#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "eigenflow/commands.hpp"
#include "eigenflow/config.hpp"
#include "eigenflow/error.hpp"

using namespace eigenflow;

namespace {

std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("eigenflow_test_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// flow.csv rows as (t, j, Lambda, lambda).
std::vector<std::array<double, 4>> read_flow(const std::string& dir) {
  std::istringstream in(read_file(dir + "/flow.csv"));
  std::string line;
  std::getline(in, line);
  std::vector<std::array<double, 4>> rows;
  while (std::getline(in, line)) {
    std::array<double, 4> r{};
    std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &r[0], &r[1], &r[2], &r[3]);
    rows.push_back(r);
  }
  return rows;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "test.yaml");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("parse a full configuration") {
    const FlowConfig c = parse_config(R"(
domain: {type: ellipse, a: 1.2, b: 0.8}
mesh: {h: 0.2}
potential: {type: gaussian, amplitude: 3, center: [0.1, 0.2], width: 0.4}
bc: {type: robin, theta: 1.5}
flow: {tau: 0.6, grid_n: 9, branches: 3}
target: {t0: 0.9, branch: 2, lambda0: 40}
tolerances: {cluster_tol: 0.01, fd_steps: [0.009, 0.0045]}
output: {dir: somewhere}
)");
    CHECK(c.domain.type == "ellipse");
    CHECK(c.h == 0.2);
    CHECK(c.bc.kind == BcKind::Robin);
    CHECK(c.bc.theta == 1.5);
    CHECK(c.tau == 0.6);
    CHECK(c.grid_n == 9);
    CHECK(c.branch == 2);
    REQUIRE(c.lambda0);
    CHECK(*c.lambda0 == 40.0);
    CHECK(c.fd_steps.size() == 2);
    CHECK(c.out_dir == "somewhere");
  }

  TEST_CASE("validation errors name the field and position") {
    const std::string tau = config_error("flow:\n  tau: 0\n");
    CHECK(tau.find("flow.tau") != std::string::npos);
    CHECK(tau.find("test.yaml:2:") != std::string::npos);
    CHECK(config_error("domain:\n  type: disc\n  radus: 1\n").find("domain.radus") != std::string::npos);
    CHECK(config_error("mesh: {h: -1}\n").find("mesh.h") != std::string::npos);
    CHECK(config_error("target: {t0: 1.5}\n").find("target.t0") != std::string::npos);
    CHECK(config_error("tolerances: {fd_steps: [0.001, 0.002]}\n").find("fd_steps") != std::string::npos);
    CHECK(config_error("potential: {type: cubic}\n").find("potential.type") != std::string::npos);
    CHECK(config_error("domain: [1,\n").find("test.yaml:") != std::string::npos);
  }

  TEST_CASE("flow: exact scaling for V = 0") {
    const FlowConfig c = parse_config("domain: {type: disc}\nmesh: {h: 0.15}\nflow: {tau: 0.5, grid_n: 6, branches: 3}\n");
    cli::RunContext ctx;
    ctx.out_dir = temp_dir("flow0");
    cli::cmd_flow(c, ctx);
    const auto rows = read_flow(ctx.out_dir);
    REQUIRE(rows.size() == 18);
    std::map<int, double> at_one;
    for (const auto& r : rows) {
      if (r[0] == 1.0) at_one[static_cast<int>(r[1])] = r[3];
    }
    for (const auto& r : rows) {
      const double expect = at_one[static_cast<int>(r[1])] / (r[0] * r[0]);
      CHECK(std::abs(r[3] - expect) <= 1e-10 * expect);
    }
  }

  TEST_CASE("flow: constant shift") {
    const double c0 = 4.0;
    const FlowConfig c = parse_config("domain: {type: square}\nmesh: {h: 0.1}\npotential: {type: constant, c: 4}\n"
                                      "flow: {tau: 0.5, grid_n: 5, branches: 3}\n");
    cli::RunContext ctx;
    ctx.out_dir = temp_dir("flowc");
    cli::cmd_flow(c, ctx);
    const auto rows = read_flow(ctx.out_dir);
    std::map<int, double> at_one;
    for (const auto& r : rows) {
      if (r[0] == 1.0) at_one[static_cast<int>(r[1])] = r[3];
    }
    for (const auto& r : rows) {
      const double expect = (at_one[static_cast<int>(r[1])] - c0) / (r[0] * r[0]);
      CHECK(std::abs((r[3] - c0) - expect) <= 1e-10 * expect);
    }
  }

  TEST_CASE("derivative: routes, oracle and byte-identical output") {
    const FlowConfig c = parse_config("domain: {type: disc}\nmesh: {h: 0.15}\ntarget: {t0: 0.8, branch: 1}\n");
    cli::RunContext ctx;
    ctx.out_dir = temp_dir("deriv");
    const nlohmann::json j = cli::cmd_derivative(c, ctx);
    const std::string first = read_file(ctx.out_dir + "/derivative.json");
    cli::cmd_derivative(c, ctx);
    CHECK(read_file(ctx.out_dir + "/derivative.json") == first);

    const double lam = j["lambda"].get<double>();
    const double dlam = j["routes"]["T1"]["dlam"][0].get<double>();
    CHECK(std::abs(dlam + 2 * lam / 0.8) <= 1e-8 * lam);
    CHECK(j["deviations"]["T1"][0]["rel"].get<double>() <= 1e-6);
    CHECK(j["deviations"]["crossing_form"][0]["rel"].get<double>() <= 1e-6);
    CHECK(j["routes"]["boundary_integral"]["available"].get<bool>());
    CHECK(j["expansion"]["branches"][0]["a2"].get<double>() > 0.0);
  }

  TEST_CASE("maslov: no crossing and a single Dirichlet crossing") {
    cli::RunContext ctx;
    ctx.out_dir = temp_dir("maslov");
    const FlowConfig none = parse_config("domain: {type: disc}\nmesh: {h: 0.15}\nflow: {tau: 0.5, grid_n: 10}\ntarget: {lambda0: 1.0}\n");
    const nlohmann::json a = cli::cmd_maslov(none, ctx);
    CHECK(a["index"].get<int>() == 0);
    CHECK(a["crossings"].empty());

    // j_{0,1}^2 / 0.7^2 is crossed once by the lowest (simple) branch inside [0.5, 1].
    const FlowConfig one = parse_config("domain: {type: disc}\nmesh: {h: 0.15}\nflow: {tau: 0.5, grid_n: 10}\ntarget: {lambda0: 11.8}\n");
    const nlohmann::json b = cli::cmd_maslov(one, ctx);
    REQUIRE(b["crossings"].size() == 1);
    CHECK(b["crossings"][0]["dim"].get<int>() == 1);
    CHECK(b["index"].get<int>() == -1);
    CHECK(b["spectral_count"].get<int>() == 1);

    const FlowConfig coarse = parse_config("flow: {grid_n: 4}\ntarget: {lambda0: 11.8}\n");
    try {
      cli::cmd_maslov(coarse, ctx);
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ConfigError);
    }
  }

  TEST_CASE("mesh summary") {
    const FlowConfig c = parse_config("domain: {type: square, side: 2}\nmesh: {h: 0.25}\n");
    cli::RunContext ctx;
    ctx.out_dir = temp_dir("mesh");
    const nlohmann::json j = cli::cmd_mesh(c, ctx);
    CHECK(std::abs(j["area"].get<double>() - 4.0) <= 1e-12);
    CHECK(std::filesystem::exists(ctx.out_dir + "/mesh.txt"));
  }
}
