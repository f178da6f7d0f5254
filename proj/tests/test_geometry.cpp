#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "eigenflow/error.hpp"
#include "eigenflow/geometry.hpp"

using namespace eigenflow;

TEST_SUITE("geometry") {
  TEST_CASE("star domains validate") {
    const StarDomain disc = make_disc(1.0);
    CHECK(disc.smooth());
    CHECK(disc.r_min() > 0.99);
    const StarDomain sq = make_square(1.0);
    CHECK(sq.area() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sq.perimeter() == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(sq.r_min() == doctest::Approx(0.5));
  }

  TEST_CASE("nonpositive radius is rejected") {
    auto r = [](double th) { return std::cos(th) > 0.5 ? -0.2 : 1.0; };
    try {
      build_radial_domain(r, 256);
      FAIL("expected DegenerateBoundary");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateBoundary);
    }
  }

  TEST_CASE("polygon not star-shaped about the origin") {
    // Origin outside the polygon.
    std::vector<Vec2> v{{1.0, 1.0}, {2.0, 1.0}, {2.0, 2.0}, {1.0, 2.0}};
    CHECK_THROWS_AS(build_polygon_domain(v), Error);
  }

  TEST_CASE("disc mesh area close to pi") {
    const TriMesh m = build_mesh(make_disc(1.0), 0.1);
    // Inscribed 256-gon: area n/2 sin(2 pi / n).
    const double n = 256.0;
    const double polygon = 0.5 * n * std::sin(2.0 * std::numbers::pi / n);
    CHECK(m.area() == doctest::Approx(polygon).epsilon(1e-12));
    CHECK(std::abs(m.area() - std::numbers::pi) / std::numbers::pi < 0.01);
    CHECK(m.max_edge_length() <= 1.5 * 0.1);
  }

  TEST_CASE("square mesh area exact") {
    const TriMesh m = build_mesh(make_square(1.0), 0.25);
    CHECK(std::abs(m.area() - 1.0) < 1e-12);
    CHECK(m.max_edge_length() <= 1.5 * 0.25);
  }

  TEST_CASE("invalid h") {
    CHECK_THROWS_AS(build_mesh(make_disc(1.0), 0.0), Error);
    CHECK_THROWS_AS(build_mesh(make_disc(1.0), -0.1), Error);
  }

  TEST_CASE("mesh invariants") {
    for (const StarDomain& d : {make_disc(1.0), make_square(1.0), make_ellipse(1.2, 0.7), make_flower(1.0, 0.15, 5)}) {
      const TriMesh m = build_mesh(d, 0.12);
      for (std::size_t k = 0; k < m.triangles.size(); ++k) CHECK(m.triangle_area(k) > 0.0);
      CHECK(m.max_edge_length() <= 1.5 * 0.12);
      CHECK(std::is_sorted(m.boundary_nodes.begin(), m.boundary_nodes.end()));
      double len = 0.0;
      for (const auto& e : m.boundary_edges) {
        CHECK(e.normal.norm() == doctest::Approx(1.0).epsilon(1e-14));
        const Vec2 mid = 0.5 * (m.nodes[e.nodes[0]] + m.nodes[e.nodes[1]]);
        CHECK(e.normal.dot(mid) > 0.0);
        len += e.length;
      }
      CHECK(len == doctest::Approx(d.perimeter()).epsilon(1e-12));
      CHECK(m.area() == doctest::Approx(d.area()).epsilon(1e-12));
    }
  }

  TEST_CASE("mesh is deterministic") {
    std::ostringstream a, b;
    write_mesh(a, build_mesh(make_flower(1.0, 0.1, 4), 0.1));
    write_mesh(b, build_mesh(make_flower(1.0, 0.1, 4), 0.1));
    CHECK(a.str() == b.str());
  }

  TEST_CASE("scale_points") {
    const std::vector<Vec2> p{{1.0, 0.0}, {0.3, -0.7}};
    const auto id = scale_points(p, 1.0);
    CHECK((id[1] - p[1]).norm() == 0.0);
    const auto half = scale_points(p, 0.5);
    CHECK(half[0].x() == 0.5);
    CHECK(half[0].y() == 0.0);
    const auto twice = scale_points(scale_points(p, 0.9), 0.9);
    const auto once = scale_points(p, 0.81);
    for (int i = 0; i < 2; ++i) CHECK((twice[i] - once[i]).norm() <= 1e-15);
  }
}
