#include "mcflab/differential.hpp"
#include "mcflab/shapes.hpp"
#include "mcflab/surface.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace mcflab;

namespace {

Surface2 unit_square_polygon() {
  // regular 4-gon inscribed in the unit circle
  Surface2 s;
  s.vertices = {Vec2(1, 0), Vec2(0, 1), Vec2(-1, 0), Vec2(0, -1)};
  s.elements = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  return s;
}

}  // namespace

TEST_CASE("vertex measures of the inscribed square") {
  const Surface2 s = unit_square_polygon();
  const ScalarField w = geom::vertex_measures(s);
  for (double v : w.values) CHECK_THAT(v, Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-14));
  double sum = 0;
  for (double v : w.values) sum += v;
  CHECK_THAT(sum, Catch::Matchers::WithinAbs(4.0 * std::sqrt(2.0), 1e-13));
}

TEST_CASE("vertex measures sum to the element total") {
  Rng rng(7);
  for (const auto& spec : {shapes::circle(1.7, 33), shapes::circle(0.4, 97)}) {
    const Surface2 s = shapes::generate<2>(spec);
    const ScalarField w = geom::vertex_measures(s);
    double sum = 0;
    for (double v : w.values) sum += v;
    CHECK_THAT(sum, Catch::Matchers::WithinRel(total_measure(s), 1e-13));
  }
  const Surface3 sph = shapes::generate<3>(shapes::sphere(1.3, 3));
  const ScalarField w = geom::vertex_measures(sph);
  double sum = 0;
  for (double v : w.values) sum += v;
  CHECK_THAT(sum, Catch::Matchers::WithinRel(total_measure(sph), 1e-13));
  (void)rng;
}

TEST_CASE("degenerate element is rejected by name") {
  Surface2 s = unit_square_polygon();
  s.vertices.push_back(s.vertices[0]);
  s.elements.push_back({0, 4});  // zero-length segment
  try {
    geom::vertex_measures(s);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& err) {
    CHECK(std::string(err.what()).find("element 4") != std::string::npos);
  }
}

TEST_CASE("refined icosahedral sphere area approaches 4 pi") {
  // inscribed-polyhedron area deficit shrinks ~4x per subdivision
  double prev = kInf;
  const std::array<double, 2> bound = {2e-2, 1e-2};
  for (int level : {4, 5}) {
    const Surface3 s = shapes::generate<3>(shapes::sphere(1.0, level));
    const ScalarField w = geom::vertex_measures(s);
    double sum = 0;
    for (double v : w.values) sum += v;
    const double err = std::abs(sum - 4.0 * kPi);
    CHECK(err < bound[level - 4]);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("outward normals are radial on circles and spheres") {
  const Surface2 circ = shapes::generate<2>(shapes::circle(2.5, 128));
  const auto nu2 = geom::outward_normals(circ);
  for (int v = 0; v < circ.vertex_count(); ++v) {
    const Vec2 expect = circ.vertices[v].normalized();
    CHECK((nu2.values[v] - expect).norm() < 1e-10);
  }

  auto spec = shapes::sphere(1.5, 3);
  spec.center = {0.3, -1.2, 0.5};
  const Surface3 sph = shapes::generate<3>(spec);
  const Vec3 c(0.3, -1.2, 0.5);
  const auto nu3 = geom::outward_normals(sph);
  // averaged-element normals carry an O(h^2) tilt (~1.2e-2 at this level)
  for (int v = 0; v < sph.vertex_count(); ++v) {
    const Vec3 expect = (sph.vertices[v] - c).normalized();
    CHECK((nu3.values[v] - expect).norm() < 2e-2);
  }
}

TEST_CASE("orientation flip negates normals exactly") {
  const Surface3 sph = shapes::generate<3>(shapes::sphere(1.0, 2));
  const auto nu = geom::outward_normals(sph);
  const auto flipped = geom::outward_normals(with_flipped_orientation(sph));
  for (int v = 0; v < sph.vertex_count(); ++v)
    CHECK((nu.values[v] + flipped.values[v]).norm() == 0.0);
}

TEST_CASE("circle curvature has magnitude 1/R toward the center") {
  const double r = std::sqrt(2.0);
  const Surface2 s = shapes::generate<2>(shapes::circle(r, 256));
  const auto H = geom::mean_curvature_vector(s);
  for (int v = 0; v < s.vertex_count(); ++v) {
    CHECK_THAT(H.values[v].norm(), Catch::Matchers::WithinAbs(1.0 / r, 1e-3));
    const Vec2 inward = -s.vertices[v].normalized();
    CHECK(H.values[v].normalized().dot(inward) > 1.0 - 1e-10);
  }
}

TEST_CASE("sphere curvature has magnitude m/R") {
  const Surface3 s = shapes::generate<3>(shapes::sphere(2.0, 4));
  const auto H = geom::mean_curvature_vector(s);
  for (int v = 0; v < s.vertex_count(); ++v)
    CHECK_THAT(H.values[v].norm(), Catch::Matchers::WithinAbs(1.0, 2e-2));
}

TEST_CASE("flat patch interior curvature vanishes") {
  const Surface3 patch = shapes::square_patch(2.0, 16);
  const auto H = geom::mean_curvature_vector(patch);
  for (int v : shapes::square_patch_interior(16)) CHECK(H.values[v].norm() <= 1e-10);
}

TEST_CASE("curvature refinement error decreases monotonically") {
  double prev = kInf;
  for (int n : {64, 128, 256}) {
    const Surface2 s = shapes::generate<2>(shapes::circle(1.0, n));
    const auto H = geom::mean_curvature_vector(s);
    double worst = 0;
    for (const auto& h : H.values) worst = std::max(worst, std::abs(h.norm() - 1.0));
    CHECK(worst < prev);
    prev = worst;
  }
  prev = kInf;
  for (int level : {2, 3, 4}) {
    const Surface3 s = shapes::generate<3>(shapes::sphere(1.0, level));
    const auto H = geom::mean_curvature_vector(s);
    double worst = 0;
    for (const auto& h : H.values) worst = std::max(worst, std::abs(h.norm() - 2.0));
    CHECK(worst < prev);
    prev = worst;
  }
}

TEST_CASE("normal projection basics") {
  const Surface2 circ = shapes::generate<2>(shapes::circle(1.5, 200));
  VectorField<2> tangent;
  tangent.values.resize(circ.vertex_count());
  for (int v = 0; v < circ.vertex_count(); ++v) {
    const Vec2& x = circ.vertices[v];
    tangent.values[v] = Vec2(-x.y(), x.x());
  }
  const auto proj = geom::normal_projection(circ, tangent);
  for (const auto& p : proj.values) CHECK(p.norm() < 1e-10);

  const auto nu = geom::outward_normals(circ);
  const auto proj_nu = geom::normal_projection(circ, nu);
  for (int v = 0; v < circ.vertex_count(); ++v)
    CHECK((proj_nu.values[v] - nu.values[v]).norm() < 1e-13);

  VectorField<2> position;
  position.values = circ.vertices;
  const auto proj_x = geom::normal_projection(circ, position);
  for (int v = 0; v < circ.vertex_count(); ++v)
    CHECK((proj_x.values[v] - circ.vertices[v]).norm() < 1e-9);
}

TEST_CASE("rigid motion equivariance") {
  Rng rng(42);
  const Surface3 s = shapes::generate<3>(shapes::sphere(1.2, 3));
  Similarity<3> t;
  t.rot = random_rotation<3>(rng);
  t.shift = Vec3(0.4, -2.0, 1.1);
  const Surface3 moved = transformed(s, t);

  const auto w0 = geom::vertex_measures(s);
  const auto w1 = geom::vertex_measures(moved);
  for (int v = 0; v < s.vertex_count(); ++v)
    CHECK_THAT(w1.values[v], Catch::Matchers::WithinAbs(w0.values[v], 1e-10));

  const auto nu0 = geom::outward_normals(s);
  const auto nu1 = geom::outward_normals(moved);
  const auto h0 = geom::mean_curvature_vector(s);
  const auto h1 = geom::mean_curvature_vector(moved);
  for (int v = 0; v < s.vertex_count(); ++v) {
    CHECK((nu1.values[v] - t.rot * nu0.values[v]).norm() < 1e-10);
    CHECK((h1.values[v] - t.rot * h0.values[v]).norm() < 1e-10);
  }
}

TEST_CASE("validity report flags open and inconsistent meshes") {
  const Surface3 patch = shapes::square_patch(1.0, 4);
  CHECK_FALSE(check_surface(patch).closed);
  CHECK(check_surface(patch).consistently_oriented);

  Surface3 bad = shapes::generate<3>(shapes::sphere(1.0, 1));
  std::swap(bad.elements[0][1], bad.elements[0][2]);
  CHECK_FALSE(check_surface(bad).consistently_oriented);

  const Surface3 good = shapes::generate<3>(shapes::sphere(1.0, 2));
  CHECK(check_surface(good).ok());
}

TEST_CASE("enclosed measure matches analytic values") {
  const Surface2 circ = shapes::generate<2>(shapes::circle(2.0, 512));
  CHECK_THAT(enclosed_measure(circ), Catch::Matchers::WithinRel(kPi * 4.0, 1e-3));
  const Surface3 sph = shapes::generate<3>(shapes::sphere(1.0, 3));
  CHECK_THAT(enclosed_measure(sph), Catch::Matchers::WithinRel(4.0 * kPi / 3.0, 1e-2));
}

TEST_CASE("split components and distances") {
  Surface2 two = shapes::generate<2>(shapes::circle(1.0, 64));
  const Surface2 other = translated(shapes::generate<2>(shapes::circle(1.0, 64)), Vec2(5.0, 0.0));
  const int base = two.vertex_count();
  for (const auto& v : other.vertices) two.vertices.push_back(v);
  for (const auto& e : other.elements) two.elements.push_back({e[0] + base, e[1] + base});
  CHECK(component_count(two) == 2);
  const auto parts = split_components(two);
  REQUIRE(parts.size() == 2);
  CHECK(is_closed(parts[0]));
  CHECK(is_closed(parts[1]));
  CHECK_THAT(min_distance(parts[0], parts[1]), Catch::Matchers::WithinAbs(3.0, 1e-2));
}

TEST_CASE("self intersection detection") {
  Surface2 bowtie;
  bowtie.vertices = {Vec2(0, 0), Vec2(2, 2), Vec2(2, 0), Vec2(0, 2)};
  bowtie.elements = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  CHECK(has_self_intersection(bowtie));
  CHECK_FALSE(has_self_intersection(shapes::generate<2>(shapes::circle(1.0, 32))));
  CHECK_FALSE(has_self_intersection(shapes::generate<3>(shapes::sphere(1.0, 2))));
}
