#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "eigenflow/types.hpp"

namespace eigenflow {

/// Planar region that is star-shaped with respect to the origin, stored as a
/// counter-clockwise polygon whose vertices are sorted by polar angle.
///
/// Smooth radial profiles are sampled onto a polygon at construction time,
/// so quadrature and edge normals are exact per edge.
class StarDomain {
 public:
  const std::vector<Vec2>& vertices() const { return vertices_; }
  /// Distance from the origin to the closest boundary point.
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  /// True when the polygon came from sampling a smooth radial profile.
  bool smooth() const { return smooth_; }
  double area() const;
  double perimeter() const;

 private:
  friend StarDomain build_polygon_domain(std::vector<Vec2>);
  friend StarDomain build_radial_domain(const std::function<double(double)>&, int);

  std::vector<Vec2> vertices_;
  double r_min_ = 0.0;
  double r_max_ = 0.0;
  bool smooth_ = false;
};

/// Validates the star-shapedness witness (every edge has nu.x > 0 and the
/// polygon winds once around the origin).
StarDomain build_polygon_domain(std::vector<Vec2> vertices);

/// Samples r(theta) at `samples` equally spaced angles (at least 256).
StarDomain build_radial_domain(const std::function<double(double)>& radius, int samples = 256);

StarDomain make_disc(double radius = 1.0, int samples = 256);
StarDomain make_ellipse(double a, double b, int samples = 256);
/// r(theta) = r0 * (1 + amplitude * cos(lobes * theta + phase)).
StarDomain make_flower(double r0, double amplitude, int lobes, double phase = 0.0, int samples = 256);
/// Axis-aligned square of side `side` centred at the origin.
StarDomain make_square(double side = 1.0);

struct BoundaryEdge {
  std::array<int, 2> nodes;
  /// Triangle owning the edge, used for element gradients.
  int triangle = -1;
  Vec2 normal;
  double length = 0.0;
};

struct TriMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<int> boundary_nodes;
  double h = 0.0;

  std::size_t node_count() const { return nodes.size(); }
  double triangle_area(std::size_t k) const;
  double area() const;
  double max_edge_length() const;
  bool is_boundary_node(int node) const;
};

struct MeshOptions {
  /// Salt for the sector anchors of smooth domains; identical input and
  /// salt give an identical mesh.
  std::uint64_t seed = 0;
};

/// Deterministic ring/sector triangulation: nested scaled copies of the
/// boundary polygon are stitched together sector by sector.
TriMesh build_mesh(const StarDomain& domain, double h, const MeshOptions& options = {});

/// x -> t x for every point.
std::vector<Vec2> scale_points(std::span<const Vec2> points, double t);

/// Plain-text node/element dump: "nodes N", one "i x y" per line, then
/// "triangles T", one "i a b c" per line, then "boundary_edges E".
void write_mesh(std::ostream& out, const TriMesh& mesh);

}  // namespace eigenflow
