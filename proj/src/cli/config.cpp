#include "eigenflow/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "eigenflow/error.hpp"

namespace eigenflow {
namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void bad(const YAML::Node& at, const std::string& message) const {
    const YAML::Mark m = at.Mark();
    std::string where = source_;
    if (m.line >= 0) where += ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
    fail(ErrorKind::ConfigError, where + ": " + message);
  }

  /// Rejects keys outside `allowed` so that typos do not pass silently.
  void keys(const YAML::Node& map, const std::string& path, const std::set<std::string>& allowed) const {
    if (!map.IsMap()) bad(map, "'" + path + "' must be a mapping");
    for (const auto& kv : map) {
      const std::string k = kv.first.as<std::string>();
      if (!allowed.count(k)) bad(kv.first, "unknown field '" + path + "." + k + "'");
    }
  }

  double number(const YAML::Node& map, const std::string& key, const std::string& path, double fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    try {
      return n.as<double>();
    } catch (const YAML::Exception&) {
      bad(n, "field '" + path + "." + key + "' must be a number");
    }
  }

  int integer(const YAML::Node& map, const std::string& key, const std::string& path, int fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    try {
      return n.as<int>();
    } catch (const YAML::Exception&) {
      bad(n, "field '" + path + "." + key + "' must be an integer");
    }
  }

  std::string text(const YAML::Node& map, const std::string& key, const std::string& path, const std::string& fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    if (!n.IsScalar()) bad(n, "field '" + path + "." + key + "' must be a string");
    return n.as<std::string>();
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& name) const {
    if (!n.IsSequence()) bad(n, "field '" + name + "' must be a list of numbers");
    std::vector<double> out;
    for (const auto& e : n) {
      try {
        out.push_back(e.as<double>());
      } catch (const YAML::Exception&) {
        bad(e, "field '" + name + "' must contain numbers only");
      }
    }
    return out;
  }

  Vec2 vec2(const YAML::Node& map, const std::string& key, const std::string& path, const Vec2& fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    const auto v = numbers(n, path + "." + key);
    if (v.size() != 2) bad(n, "field '" + path + "." + key + "' must have two entries");
    return Vec2(v[0], v[1]);
  }

  void require(bool ok, const YAML::Node& at, const std::string& message) const {
    if (!ok) bad(at, message);
  }

 private:
  std::string source_;
};

const YAML::Node& or_self(const YAML::Node& child, const YAML::Node& parent) { return child ? child : parent; }

DomainConfig read_domain(const Reader& r, const YAML::Node& n) {
  DomainConfig d;
  d.type = r.text(n, "type", "domain", "disc");
  const std::string p = "domain";
  if (d.type == "disc") {
    r.keys(n, p, {"type", "radius", "samples"});
    d.radius = r.number(n, "radius", p, 1.0);
    r.require(d.radius > 0.0, or_self(n["radius"], n), "field 'domain.radius' must be positive");
  } else if (d.type == "square") {
    r.keys(n, p, {"type", "side"});
    d.side = r.number(n, "side", p, 1.0);
    r.require(d.side > 0.0, or_self(n["side"], n), "field 'domain.side' must be positive");
  } else if (d.type == "ellipse") {
    r.keys(n, p, {"type", "a", "b", "samples"});
    d.a = r.number(n, "a", p, 1.0);
    d.b = r.number(n, "b", p, 1.0);
    r.require(d.a > 0.0 && d.b > 0.0, n, "fields 'domain.a' and 'domain.b' must be positive");
  } else if (d.type == "flower") {
    r.keys(n, p, {"type", "r0", "amplitude", "lobes", "phase", "samples"});
    d.r0 = r.number(n, "r0", p, 1.0);
    d.amplitude = r.number(n, "amplitude", p, 0.1);
    d.lobes = r.integer(n, "lobes", p, 5);
    d.phase = r.number(n, "phase", p, 0.0);
    r.require(d.r0 > 0.0, or_self(n["r0"], n), "field 'domain.r0' must be positive");
    r.require(d.lobes >= 1, or_self(n["lobes"], n), "field 'domain.lobes' must be at least 1");
  } else if (d.type == "polygon") {
    r.keys(n, p, {"type", "vertices"});
    const YAML::Node v = n["vertices"];
    r.require(v && v.IsSequence() && v.size() >= 3, or_self(v, n), "field 'domain.vertices' needs at least 3 points");
    for (const auto& e : v) {
      const auto xy = r.numbers(e, "domain.vertices");
      r.require(xy.size() == 2, e, "each entry of 'domain.vertices' must be [x, y]");
      d.vertices.emplace_back(xy[0], xy[1]);
    }
  } else {
    r.bad(n["type"], "field 'domain.type' must be one of disc, square, ellipse, flower, polygon");
  }
  d.samples = r.integer(n, "samples", p, 256);
  r.require(d.samples >= 256, or_self(n["samples"], n), "field 'domain.samples' must be at least 256");
  return d;
}

std::vector<Monomial> read_terms(const Reader& r, const YAML::Node& n, const std::string& name) {
  r.require(n.IsSequence(), n, "field '" + name + "' must be a list of [px, py, coefficient] terms");
  std::vector<Monomial> terms;
  for (const auto& e : n) {
    const auto t = r.numbers(e, name);
    r.require(t.size() == 3 && t[0] >= 0 && t[1] >= 0 && t[0] == static_cast<int>(t[0]) && t[1] == static_cast<int>(t[1]), e,
              "each term of '" + name + "' must be [px, py, coefficient] with integer powers >= 0");
    terms.push_back({static_cast<int>(t[0]), static_cast<int>(t[1]), t[2]});
  }
  return terms;
}

PotentialConfig read_potential(const Reader& r, const YAML::Node& n) {
  PotentialConfig s;
  const std::string p = "potential";
  s.type = r.text(n, "type", p, "zero");
  if (s.type == "zero") {
    r.keys(n, p, {"type"});
  } else if (s.type == "constant") {
    r.keys(n, p, {"type", "c"});
    s.c = r.number(n, "c", p, 0.0);
  } else if (s.type == "linear") {
    r.keys(n, p, {"type", "a"});
    s.a = r.vec2(n, "a", p, Vec2::Zero());
  } else if (s.type == "quadratic") {
    r.keys(n, p, {"type", "q"});
    const YAML::Node q = n["q"];
    r.require(q && q.IsSequence() && q.size() == 2, or_self(q, n), "field 'potential.q' must be a 2x2 matrix [[a, b], [c, d]]");
    for (int i = 0; i < 2; ++i) {
      const auto row = r.numbers(q[i], "potential.q");
      r.require(row.size() == 2, q[i], "field 'potential.q' must be a 2x2 matrix");
      s.q(i, 0) = row[0];
      s.q(i, 1) = row[1];
    }
  } else if (s.type == "gaussian") {
    r.keys(n, p, {"type", "amplitude", "center", "width"});
    s.amplitude = r.number(n, "amplitude", p, 1.0);
    s.center = r.vec2(n, "center", p, Vec2::Zero());
    s.width = r.number(n, "width", p, 0.3);
    r.require(s.width > 0.0, or_self(n["width"], n), "field 'potential.width' must be positive");
  } else if (s.type == "polynomial") {
    r.keys(n, p, {"type", "components"});
    const YAML::Node c = n["components"];
    r.require(c && c.IsSequence() && c.size() >= 1, or_self(c, n),
              "field 'potential.components' must list one term list per component");
    for (const auto& comp : c) s.components.push_back(read_terms(r, comp, "potential.components"));
  } else if (s.type == "diagonal2") {
    r.keys(n, p, {"type", "c", "a", "amplitude", "center", "width"});
    s.c = r.number(n, "c", p, 0.0);
    s.a = r.vec2(n, "a", p, Vec2(1.0, 0.0));
    s.amplitude = r.number(n, "amplitude", p, 1.0);
    s.center = r.vec2(n, "center", p, Vec2::Zero());
    s.width = r.number(n, "width", p, 0.3);
    r.require(s.width > 0.0, or_self(n["width"], n), "field 'potential.width' must be positive");
  } else if (s.type == "coupled2") {
    r.keys(n, p, {"type", "coupling"});
    s.coupling = r.number(n, "coupling", p, 0.5);
  } else {
    r.bad(or_self(n["type"], n),
          "field 'potential.type' must be one of zero, constant, linear, quadratic, gaussian, polynomial, diagonal2, coupled2");
  }
  return s;
}

BcConfig read_bc(const Reader& r, const YAML::Node& n) {
  BcConfig b;
  const std::string type = r.text(n, "type", "bc", "dirichlet");
  if (type == "dirichlet") {
    r.keys(n, "bc", {"type"});
  } else if (type == "robin") {
    r.keys(n, "bc", {"type", "theta"});
    b.kind = BcKind::Robin;
    b.theta = r.number(n, "theta", "bc", 0.0);
  } else {
    r.bad(or_self(n["type"], n), "field 'bc.type' must be dirichlet or robin");
  }
  return b;
}

}  // namespace

FlowConfig parse_config(const std::string& text, const std::string& source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(ErrorKind::ConfigError, source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                                     ": " + e.msg);
  }
  if (!root || root.IsNull()) fail(ErrorKind::ConfigError, source + ": empty configuration");
  r.keys(root, "config", {"domain", "mesh", "potential", "bc", "flow", "target", "tolerances", "output"});

  FlowConfig c;
  c.source = source;
  if (root["domain"]) c.domain = read_domain(r, root["domain"]);

  if (const YAML::Node m = root["mesh"]) {
    r.keys(m, "mesh", {"h"});
    c.h = r.number(m, "h", "mesh", c.h);
    r.require(c.h > 0.0, or_self(m["h"], m), "field 'mesh.h' must be positive");
  }
  if (root["potential"]) c.potential = read_potential(r, root["potential"]);
  if (root["bc"]) c.bc = read_bc(r, root["bc"]);

  if (const YAML::Node f = root["flow"]) {
    r.keys(f, "flow", {"tau", "grid_n", "branches"});
    c.tau = r.number(f, "tau", "flow", c.tau);
    c.grid_n = r.integer(f, "grid_n", "flow", c.grid_n);
    c.branches = r.integer(f, "branches", "flow", c.branches);
    r.require(c.tau > 0.0 && c.tau < 1.0, or_self(f["tau"], f), "field 'flow.tau' must lie in (0, 1)");
    r.require(c.grid_n >= 2, or_self(f["grid_n"], f), "field 'flow.grid_n' must be at least 2");
    r.require(c.branches >= 1, or_self(f["branches"], f), "field 'flow.branches' must be at least 1");
  }

  if (const YAML::Node t = root["target"]) {
    r.keys(t, "target", {"t0", "branch", "lambda0"});
    c.t0 = r.number(t, "t0", "target", c.t0);
    c.branch = r.integer(t, "branch", "target", c.branch);
    if (t["lambda0"]) c.lambda0 = r.number(t, "lambda0", "target", 0.0);
    r.require(c.t0 > 0.0 && c.t0 <= 1.0, or_self(t["t0"], t), "field 'target.t0' must lie in (0, 1]");
    r.require(c.branch >= 1, or_self(t["branch"], t), "field 'target.branch' must be at least 1 (branches are 1-based)");
  }

  if (const YAML::Node t = root["tolerances"]) {
    r.keys(t, "tolerances", {"cluster_tol", "group_tol", "fd_steps"});
    for (const char* key : {"cluster_tol", "group_tol"}) {
      if (!t[key]) continue;
      const double v = r.number(t, key, "tolerances", 0.0);
      r.require(v > 0.0, t[key], std::string("field 'tolerances.") + key + "' must be positive");
      (std::string(key) == "cluster_tol" ? c.cluster_tol : c.group_tol) = v;
    }
    if (t["fd_steps"]) {
      c.fd_steps = r.numbers(t["fd_steps"], "tolerances.fd_steps");
      bool ok = !c.fd_steps.empty();
      for (std::size_t i = 0; i < c.fd_steps.size(); ++i) {
        ok = ok && c.fd_steps[i] > 0.0 && c.fd_steps[i] <= 1e-2 * c.t0 * (1.0 + 1e-12) && (i == 0 || c.fd_steps[i] < c.fd_steps[i - 1]);
      }
      r.require(ok, t["fd_steps"], "field 'tolerances.fd_steps' must be positive, strictly descending and at most 1e-2 * target.t0");
    }
  }

  if (const YAML::Node o = root["output"]) {
    r.keys(o, "output", {"dir"});
    c.out_dir = r.text(o, "dir", "output", c.out_dir);
  }
  return c;
}

FlowConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, path + ": cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

StarDomain build_domain(const DomainConfig& d) {
  if (d.type == "disc") return make_disc(d.radius, d.samples);
  if (d.type == "square") return make_square(d.side);
  if (d.type == "ellipse") return make_ellipse(d.a, d.b, d.samples);
  if (d.type == "flower") return make_flower(d.r0, d.amplitude, d.lobes, d.phase, d.samples);
  if (d.type == "polygon") return build_polygon_domain(d.vertices);
  fail(ErrorKind::ConfigError, "unknown domain type '" + d.type + "'");
}

MatrixPotential build_potential(const PotentialConfig& s) {
  if (s.type == "zero") return zero_potential();
  if (s.type == "constant") return scalar_potential(constant_field(s.c));
  if (s.type == "linear") return scalar_potential(linear_field(s.a));
  if (s.type == "quadratic") return scalar_potential(quadratic_field(s.q));
  if (s.type == "gaussian") return scalar_potential(gaussian_field(s.amplitude, s.center, s.width));
  if (s.type == "polynomial") {
    const int n = static_cast<int>(s.components.size());
    std::vector<PotentialEntry> e;
    for (int i = 0; i < n; ++i) e.push_back({i, i, polynomial_field(s.components[i])});
    return entrywise_potential(n, std::move(e));
  }
  if (s.type == "diagonal2") {
    std::vector<PotentialEntry> e;
    e.push_back({0, 0, sum_fields({constant_field(s.c), linear_field(s.a)})});
    e.push_back({1, 1, gaussian_field(s.amplitude, s.center, s.width)});
    return entrywise_potential(2, std::move(e));
  }
  if (s.type == "coupled2") {
    std::vector<PotentialEntry> e;
    e.push_back({0, 0, sum_fields({constant_field(1.0), linear_field(Vec2(1.0, 0.3))})});
    e.push_back({1, 1, polynomial_field({{0, 0, 2.0}, {2, 0, 1.0}, {0, 1, 0.5}})});
    e.push_back({0, 1, gaussian_field(s.coupling, Vec2(0.1, -0.1), 0.5)});
    return entrywise_potential(2, std::move(e));
  }
  fail(ErrorKind::ConfigError, "unknown potential type '" + s.type + "'");
}

BoundaryCondition build_bc(const BcConfig& b, int components) {
  if (b.kind == BcKind::Dirichlet) return BoundaryCondition::dirichlet();
  return BoundaryCondition::robin_constant(b.theta, components);
}

Problem build_problem(const FlowConfig& c, std::uint64_t seed) {
  MeshOptions mo;
  mo.seed = seed;
  auto mesh = std::make_shared<const TriMesh>(build_mesh(build_domain(c.domain), c.h, mo));
  MatrixPotential v = build_potential(c.potential);
  const int n = v.components();
  return Problem(std::move(mesh), std::move(v), build_bc(c.bc, n));
}

}  // namespace eigenflow
