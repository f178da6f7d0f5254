#include "eigenflow/geometry.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include "eigenflow/error.hpp"

namespace eigenflow {
namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) { return 0.5 * cross(b - a, c - a); }

double segment_distance_to_origin(const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  double s = len2 > 0.0 ? -a.dot(d) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (a + s * d).norm();
}

// Turning angle above which a vertex is treated as a corner and becomes a
// sector anchor.
constexpr double kFeatureAngle = 10.0 * std::numbers::pi / 180.0;
constexpr int kSmoothAnchors = 8;

std::vector<int> sector_anchors(const std::vector<Vec2>& v, std::uint64_t seed) {
  const int n = static_cast<int>(v.size());
  std::vector<int> anchors;
  for (int i = 0; i < n; ++i) {
    const Vec2 e1 = v[i] - v[(i + n - 1) % n];
    const Vec2 e2 = v[(i + 1) % n] - v[i];
    const double turn = std::atan2(cross(e1, e2), e1.dot(e2));
    if (std::abs(turn) > kFeatureAngle) anchors.push_back(i);
  }
  if (anchors.size() >= 3) return anchors;

  const int count = std::min(n, kSmoothAnchors);
  const int offset = static_cast<int>(seed % static_cast<std::uint64_t>(std::max(1, n / count)));
  for (int k = 0; k < count; ++k) anchors.push_back((offset + (k * n) / count) % n);
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  return anchors;
}

struct Chain {
  std::vector<Vec2> points;  // anchor to next anchor, inclusive
  std::vector<double> cumulative;
  double length() const { return cumulative.back(); }

  Vec2 at(double arc) const {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), arc);
    std::size_t k = it == cumulative.begin() ? 0 : static_cast<std::size_t>(it - cumulative.begin()) - 1;
    k = std::min(k, points.size() - 2);
    const double seg = cumulative[k + 1] - cumulative[k];
    const double s = seg > 0.0 ? (arc - cumulative[k]) / seg : 0.0;
    return points[k] + s * (points[k + 1] - points[k]);
  }
};

int pieces_for(double length, double h) { return std::max(1, static_cast<int>(std::ceil(length / h - 1e-9))); }

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

}  // namespace

double StarDomain::area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) a += cross(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  return 0.5 * a;
}

double StarDomain::perimeter() const {
  double p = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) p += (vertices_[(i + 1) % vertices_.size()] - vertices_[i]).norm();
  return p;
}

StarDomain build_polygon_domain(std::vector<Vec2> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) fail(ErrorKind::DegenerateBoundary, "a boundary polygon needs at least 3 vertices");
  for (const auto& v : vertices) {
    if (!v.allFinite()) fail(ErrorKind::DegenerateBoundary, "non-finite boundary vertex");
    if (v.norm() <= 1e-14) fail(ErrorKind::DegenerateBoundary, "boundary vertex at the origin (r <= 0)");
  }
  double winding = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    const double c = cross(a, b);
    if (c <= 0.0) {
      fail(ErrorKind::NotStarShaped,
           "edge " + std::to_string(i) + " has nu.x <= 0 (origin not visible from the whole edge)");
    }
    winding += std::atan2(c, a.dot(b));
  }
  if (std::abs(winding - 2.0 * std::numbers::pi) > 1e-9) {
    fail(ErrorKind::DegenerateBoundary, "boundary winds " + std::to_string(winding / (2.0 * std::numbers::pi)) +
                                            " times around the origin (self-intersection)");
  }

  StarDomain d;
  d.vertices_ = std::move(vertices);
  d.r_min_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    d.r_min_ = std::min(d.r_min_, segment_distance_to_origin(d.vertices_[i], d.vertices_[(i + 1) % n]));
    d.r_max_ = std::max(d.r_max_, d.vertices_[i].norm());
  }
  return d;
}

StarDomain build_radial_domain(const std::function<double(double)>& radius, int samples) {
  samples = std::max(samples, 256);
  std::vector<Vec2> v;
  v.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / samples;
    const double r = radius(theta);
    if (!std::isfinite(r) || r <= 0.0) {
      fail(ErrorKind::DegenerateBoundary, "radial profile r(theta) <= 0 at theta = " + std::to_string(theta));
    }
    v.emplace_back(r * std::cos(theta), r * std::sin(theta));
  }
  StarDomain d = build_polygon_domain(std::move(v));
  d.smooth_ = true;
  return d;
}

StarDomain make_disc(double radius, int samples) {
  return build_radial_domain([radius](double) { return radius; }, samples);
}

StarDomain make_ellipse(double a, double b, int samples) {
  return build_radial_domain(
      [a, b](double th) {
        const double c = std::cos(th) / a;
        const double s = std::sin(th) / b;
        return 1.0 / std::sqrt(c * c + s * s);
      },
      samples);
}

StarDomain make_flower(double r0, double amplitude, int lobes, double phase, int samples) {
  return build_radial_domain(
      [=](double th) { return r0 * (1.0 + amplitude * std::cos(lobes * th + phase)); }, samples);
}

StarDomain make_square(double side) {
  const double s = 0.5 * side;
  return build_polygon_domain({Vec2(s, -s), Vec2(s, s), Vec2(-s, s), Vec2(-s, -s)});
}

double TriMesh::triangle_area(std::size_t k) const {
  const auto& t = triangles[k];
  return signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
}

double TriMesh::area() const {
  double a = 0.0;
  for (std::size_t k = 0; k < triangles.size(); ++k) a += triangle_area(k);
  return a;
}

double TriMesh::max_edge_length() const {
  double m = 0.0;
  for (const auto& t : triangles) {
    for (int e = 0; e < 3; ++e) m = std::max(m, (nodes[t[e]] - nodes[t[(e + 1) % 3]]).norm());
  }
  return m;
}

bool TriMesh::is_boundary_node(int node) const {
  return std::binary_search(boundary_nodes.begin(), boundary_nodes.end(), node);
}

TriMesh build_mesh(const StarDomain& domain, double h, const MeshOptions& options) {
  if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorKind::InvalidArgument, "mesh size h must be positive");
  const auto& v = domain.vertices();
  const int nv = static_cast<int>(v.size());
  const int rings = std::max(1, static_cast<int>(std::ceil(domain.r_max() / h - 1e-9)));
  const double estimated_nodes = domain.area() / (0.4 * h * h) + domain.perimeter() / h;
  if (estimated_nodes > 5e6) fail(ErrorKind::InvalidArgument, "mesh size h too small for desk-scale meshing");

  const std::vector<int> anchors = sector_anchors(v, options.seed);
  const int sectors = static_cast<int>(anchors.size());

  std::vector<Chain> chains(static_cast<std::size_t>(sectors));
  for (int s = 0; s < sectors; ++s) {
    const int a = anchors[s];
    const int b = anchors[(s + 1) % sectors];
    int k = a;
    Chain& c = chains[s];
    c.points.push_back(v[k]);
    c.cumulative.push_back(0.0);
    do {
      k = (k + 1) % nv;
      c.cumulative.push_back(c.cumulative.back() + (v[k] - c.points.back()).norm());
      c.points.push_back(v[k]);
    } while (k != b);
  }

  TriMesh mesh;
  mesh.h = h;
  mesh.nodes.push_back(Vec2::Zero());

  // ring_sector[i][s] = node indices of sector s on ring i, excluding the
  // closing anchor (which is the first node of sector s+1).
  std::vector<std::vector<std::vector<int>>> ring_sector(static_cast<std::size_t>(rings) + 1);
  ring_sector[0].assign(static_cast<std::size_t>(sectors), std::vector<int>{0});
  for (int i = 1; i <= rings; ++i) {
    const double sigma = static_cast<double>(i) / rings;
    auto& rs = ring_sector[i];
    rs.resize(static_cast<std::size_t>(sectors));
    for (int s = 0; s < sectors; ++s) {
      const Chain& c = chains[s];
      if (i == rings) {
        for (std::size_t e = 0; e + 1 < c.points.size(); ++e) {
          const Vec2& p = c.points[e];
          const Vec2& q = c.points[e + 1];
          const int pieces = pieces_for((q - p).norm(), h);
          for (int k = 0; k < pieces; ++k) {
            rs[s].push_back(static_cast<int>(mesh.nodes.size()));
            mesh.nodes.push_back(p + (static_cast<double>(k) / pieces) * (q - p));
          }
        }
      } else {
        const int pieces = pieces_for(sigma * c.length(), h);
        for (int k = 0; k < pieces; ++k) {
          rs[s].push_back(static_cast<int>(mesh.nodes.size()));
          mesh.nodes.push_back(sigma * c.at(c.length() * k / pieces));
        }
      }
    }
  }

  auto closed_chain = [&](int ring, int s) {
    std::vector<int> chain = ring_sector[ring][s];
    if (ring > 0) chain.push_back(ring_sector[ring][(s + 1) % sectors].front());
    return chain;
  };

  const double min_area = 1e-12 * h * h;
  auto add_triangle = [&](int a, int b, int c) {
    if (signed_area(mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]) <= min_area) {
      fail(ErrorKind::MeshFailure, "degenerate triangle produced while stitching rings");
    }
    mesh.triangles.push_back({a, b, c});
  };

  for (int i = 0; i < rings; ++i) {
    for (int s = 0; s < sectors; ++s) {
      const std::vector<int> inner = closed_chain(i, s);
      const std::vector<int> outer = closed_chain(i + 1, s);
      const std::size_t na = inner.size() - 1;
      const std::size_t nb = outer.size() - 1;
      std::size_t a = 0;
      std::size_t b = 0;
      while (a < na || b < nb) {
        bool advance_outer;
        if (a == na) {
          advance_outer = true;
        } else if (b == nb) {
          advance_outer = false;
        } else {
          const Vec2& p0 = mesh.nodes[inner[a]];
          const Vec2& p1 = mesh.nodes[inner[a + 1]];
          const Vec2& q0 = mesh.nodes[outer[b]];
          const Vec2& q1 = mesh.nodes[outer[b + 1]];
          const bool outer_ok = signed_area(p0, q0, q1) > min_area;
          const bool inner_ok = signed_area(p0, q0, p1) > min_area;
          if (outer_ok && inner_ok) {
            // Near-ties go to the outer ring so congruent sectors stitch identically.
            const double dq = (q1 - p0).squaredNorm();
            const double dp = (p1 - q0).squaredNorm();
            advance_outer = dq <= dp + 1e-9 * (dq + dp);
          } else {
            advance_outer = outer_ok;
          }
        }
        if (advance_outer) {
          add_triangle(inner[a], outer[b], outer[b + 1]);
          ++b;
        } else {
          add_triangle(inner[a], outer[b], inner[a + 1]);
          ++a;
        }
      }
    }
  }

  std::unordered_map<std::uint64_t, int> edge_owner;
  edge_owner.reserve(mesh.triangles.size() * 3);
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto& t = mesh.triangles[k];
    for (int e = 0; e < 3; ++e) edge_owner[edge_key(t[e], t[(e + 1) % 3])] = static_cast<int>(k);
  }

  std::vector<int> outer_ring;
  for (int s = 0; s < sectors; ++s) {
    for (int node : ring_sector[rings][s]) outer_ring.push_back(node);
  }
  for (std::size_t k = 0; k < outer_ring.size(); ++k) {
    const int a = outer_ring[k];
    const int b = outer_ring[(k + 1) % outer_ring.size()];
    const Vec2 d = mesh.nodes[b] - mesh.nodes[a];
    BoundaryEdge edge;
    edge.nodes = {a, b};
    edge.length = d.norm();
    edge.normal = Vec2(d.y(), -d.x()) / edge.length;
    const auto it = edge_owner.find(edge_key(a, b));
    if (it == edge_owner.end()) fail(ErrorKind::MeshFailure, "boundary edge without an owning triangle");
    edge.triangle = it->second;
    const Vec2 mid = 0.5 * (mesh.nodes[a] + mesh.nodes[b]);
    if (edge.normal.dot(mid) <= 0.0) fail(ErrorKind::MeshFailure, "boundary edge violates nu.x > 0");
    mesh.boundary_edges.push_back(edge);
  }
  mesh.boundary_nodes = outer_ring;
  std::sort(mesh.boundary_nodes.begin(), mesh.boundary_nodes.end());
  return mesh;
}

std::vector<Vec2> scale_points(std::span<const Vec2> points, double t) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(t * p);
  return out;
}

void write_mesh(std::ostream& out, const TriMesh& mesh) {
  out.precision(17);
  out << "nodes " << mesh.nodes.size() << '\n';
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    out << i << ' ' << mesh.nodes[i].x() << ' ' << mesh.nodes[i].y() << '\n';
  }
  out << "triangles " << mesh.triangles.size() << '\n';
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto& t = mesh.triangles[k];
    out << k << ' ' << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "boundary_edges " << mesh.boundary_edges.size() << '\n';
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& e = mesh.boundary_edges[k];
    out << k << ' ' << e.nodes[0] << ' ' << e.nodes[1] << '\n';
  }
}

}  // namespace eigenflow
