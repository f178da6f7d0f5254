#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eigenflow/assembly.hpp"
#include "eigenflow/geometry.hpp"
#include "eigenflow/potential.hpp"

namespace eigenflow {

struct DomainConfig {
  /// disc | square | ellipse | flower | polygon
  std::string type = "disc";
  double radius = 1.0;
  double side = 1.0;
  double a = 1.0;
  double b = 1.0;
  double r0 = 1.0;
  double amplitude = 0.1;
  int lobes = 5;
  double phase = 0.0;
  int samples = 256;
  std::vector<Vec2> vertices;
};

struct PotentialConfig {
  /// zero | constant | linear | quadratic | gaussian | polynomial | diagonal2 | coupled2
  std::string type = "zero";
  double c = 0.0;
  Vec2 a = Vec2::Zero();
  Mat2 q = Mat2::Zero();
  double amplitude = 1.0;
  Vec2 center = Vec2::Zero();
  double width = 0.3;
  /// polynomial: one term list per diagonal component.
  std::vector<std::vector<Monomial>> components;
  /// coupled2: strength of the Gaussian off-diagonal entry.
  double coupling = 0.5;
};

struct BcConfig {
  BcKind kind = BcKind::Dirichlet;
  double theta = 0.0;
};

/// Parsed and validated experiment description. Branch indices are 1-based.
struct FlowConfig {
  std::string source;
  DomainConfig domain;
  double h = 0.1;
  PotentialConfig potential;
  BcConfig bc;
  double tau = 0.5;
  int grid_n = 11;
  int branches = 4;
  double t0 = 1.0;
  int branch = 1;
  std::optional<double> lambda0;
  /// <= 0 selects the library defaults.
  double cluster_tol = 0.0;
  double group_tol = 0.0;
  /// Absolute FD steps, descending; empty selects the oracle default.
  std::vector<double> fd_steps;
  std::string out_dir = "out";
};

/// Throws Error(ConfigError) with "source:line:col: message" on any problem.
FlowConfig parse_config(const std::string& text, const std::string& source = "<config>");
FlowConfig load_config(const std::string& path);

StarDomain build_domain(const DomainConfig& cfg);
MatrixPotential build_potential(const PotentialConfig& cfg);
BoundaryCondition build_bc(const BcConfig& cfg, int components);
Problem build_problem(const FlowConfig& config, std::uint64_t seed = 0);

}  // namespace eigenflow
