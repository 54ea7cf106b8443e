#pragma once

#include "mcflab/differential.hpp"
#include "mcflab/surface.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mcflab::shapes {

enum class Kind { circle, sphere, cylinder, torus, dumbbell };

struct Perturbation {
  int mode = 0;          // angular wave number
  double amplitude = 0;  // normal displacement, must stay below the base reach
};

struct ShapeSpec {
  Kind kind = Kind::circle;
  double radius = 1.0;       // circle/sphere/cylinder radius, dumbbell ball radius
  double minor_radius = 0;   // torus tube radius, dumbbell neck radius
  double half_length = 0;    // cylinder half extent
  double separation = 0;     // dumbbell center-to-center distance
  int resolution = 0;        // 0 selects a per-kind default
  std::array<double, 3> center{0, 0, 0};
  std::optional<Perturbation> perturb;

  int ambient_dim() const { return kind == Kind::circle ? 2 : 3; }
};

inline ShapeSpec circle(double radius, int segments = 512) {
  ShapeSpec s;
  s.kind = Kind::circle;
  s.radius = radius;
  s.resolution = segments;
  return s;
}

inline ShapeSpec sphere(double radius, int subdivisions = 4) {
  ShapeSpec s;
  s.kind = Kind::sphere;
  s.radius = radius;
  s.resolution = subdivisions;
  return s;
}

inline ShapeSpec cylinder(double radius, double half_length, int resolution = 96) {
  ShapeSpec s;
  s.kind = Kind::cylinder;
  s.radius = radius;
  s.half_length = half_length;
  s.resolution = resolution;
  return s;
}

inline ShapeSpec torus(double minor_radius, double major_radius, int resolution = 48) {
  ShapeSpec s;
  s.kind = Kind::torus;
  s.radius = major_radius;
  s.minor_radius = minor_radius;
  s.resolution = resolution;
  return s;
}

inline ShapeSpec dumbbell(double ball_radius, double neck_radius, double separation,
                          int resolution = 48) {
  ShapeSpec s;
  s.kind = Kind::dumbbell;
  s.radius = ball_radius;
  s.minor_radius = neck_radius;
  s.separation = separation;
  s.resolution = resolution;
  return s;
}

inline ShapeSpec perturbed(ShapeSpec base, int mode, double amplitude) {
  base.perturb = Perturbation{mode, amplitude};
  return base;
}

namespace detail {

inline Surface2 make_circle(double radius, int n, const Vec2& center) {
  if (radius <= 0) throw std::invalid_argument("circle: radius must be positive");
  if (n < 3) throw std::invalid_argument("circle: need at least 3 segments");
  Surface2 s;
  s.vertices.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * i / n;
    s.vertices.push_back(center + radius * Vec2(std::cos(th), std::sin(th)));
  }
  for (int i = 0; i < n; ++i) s.elements.push_back({i, (i + 1) % n});
  return s;
}

inline Surface3 make_icosahedron() {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  Surface3 s;
  for (double s1 : {-1.0, 1.0})
    for (double s2 : {-1.0, 1.0}) {
      s.vertices.push_back(Vec3(s1, s2 * phi, 0).normalized());
      s.vertices.push_back(Vec3(0, s1, s2 * phi).normalized());
      s.vertices.push_back(Vec3(s2 * phi, 0, s1).normalized());
    }
  // faces by proximity: every vertex pair at the minimal distance is an edge
  const double edge_len = (s.vertices[0] - s.vertices[1]).norm() + 1e-9;
  for (int a = 0; a < 12; ++a)
    for (int b = a + 1; b < 12; ++b)
      for (int c = b + 1; c < 12; ++c) {
        if ((s.vertices[a] - s.vertices[b]).norm() < edge_len &&
            (s.vertices[b] - s.vertices[c]).norm() < edge_len &&
            (s.vertices[a] - s.vertices[c]).norm() < edge_len) {
          // orient outward from the origin
          const Vec3 n = (s.vertices[b] - s.vertices[a]).cross(s.vertices[c] - s.vertices[a]);
          if (n.dot(s.vertices[a] + s.vertices[b] + s.vertices[c]) > 0)
            s.elements.push_back({a, b, c});
          else
            s.elements.push_back({a, c, b});
        }
      }
  return s;
}

inline Surface3 make_sphere(double radius, int subdivisions, const Vec3& center) {
  if (radius <= 0) throw std::invalid_argument("sphere: radius must be positive");
  Surface3 s = make_icosahedron();
  for (int level = 0; level < subdivisions; ++level) {
    s = refine_uniform(s);
    for (auto& v : s.vertices) v.normalize();
  }
  for (auto& v : s.vertices) v = center + radius * v;
  return s;
}

// closed capped tube; the caps carry negligible Gaussian weight for the
// half-lengths used in the fixtures
inline Surface3 make_cylinder(double radius, double half_length, int resolution,
                              const Vec3& center) {
  if (radius <= 0 || half_length <= 0)
    throw std::invalid_argument("cylinder: radius and half_length must be positive");
  const int ntheta = std::max(resolution, 8);
  const int nrings = std::max(static_cast<int>(std::ceil(ntheta * half_length / (kPi * radius))), 2) + 1;
  Surface3 s;
  for (int r = 0; r < nrings; ++r) {
    const double z = -half_length + 2.0 * half_length * r / (nrings - 1);
    for (int i = 0; i < ntheta; ++i) {
      const double th = 2.0 * kPi * i / ntheta;
      s.vertices.push_back(center + Vec3(radius * std::cos(th), radius * std::sin(th), z));
    }
  }
  auto ring_vertex = [&](int r, int i) { return r * ntheta + (i % ntheta); };
  for (int r = 0; r + 1 < nrings; ++r)
    for (int i = 0; i < ntheta; ++i) {
      const int a = ring_vertex(r, i), b = ring_vertex(r, i + 1);
      const int c = ring_vertex(r + 1, i), d = ring_vertex(r + 1, i + 1);
      s.elements.push_back({a, b, d});
      s.elements.push_back({a, d, c});
    }
  const int bottom = static_cast<int>(s.vertices.size());
  s.vertices.push_back(center + Vec3(0, 0, -half_length));
  const int top = static_cast<int>(s.vertices.size());
  s.vertices.push_back(center + Vec3(0, 0, half_length));
  for (int i = 0; i < ntheta; ++i) {
    s.elements.push_back({bottom, ring_vertex(0, i + 1), ring_vertex(0, i)});
    s.elements.push_back({top, ring_vertex(nrings - 1, i), ring_vertex(nrings - 1, i + 1)});
  }
  orient_consistently(s);
  return s;
}

inline Surface3 make_torus(double minor, double major, int resolution, const Vec3& center) {
  if (minor <= 0 || major <= minor)
    throw std::invalid_argument("torus: need 0 < minor < major radius");
  const int nu = std::max(resolution, 8);            // around the main axis
  const int nv = std::max(resolution / 2, 8);        // around the tube
  Surface3 s;
  for (int i = 0; i < nu; ++i) {
    const double u = 2.0 * kPi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double v = 2.0 * kPi * j / nv;
      const double ring = major + minor * std::cos(v);
      s.vertices.push_back(center +
                           Vec3(ring * std::cos(u), ring * std::sin(u), minor * std::sin(v)));
    }
  }
  auto vid = [&](int i, int j) { return (i % nu) * nv + (j % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      s.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      s.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  orient_consistently(s);
  return s;
}

// Dumbbell profile: two spherical caps joined by a catenoid-like neck with a
// C^1 smoothstep blend.  Parameters of the blend are derived deterministically
// from (ball_radius, neck_radius, separation) so refinement studies reproduce
// the same body.
struct DumbbellProfile {
  double ball_radius, neck_radius, half_separation;
  double x_junction;   // |x| where the blend window is centered
  double blend_half;   // half width of the blend window
  double catenoid_a;   // neck(x) = neck_radius * cosh(x / a)

  static DumbbellProfile make(double ball_radius, double neck_radius, double separation) {
    DumbbellProfile p;
    p.ball_radius = ball_radius;
    p.neck_radius = neck_radius;
    p.half_separation = 0.5 * separation;
    p.x_junction = p.half_separation - ball_radius / std::sqrt(2.0);
    p.blend_half = 0.2 * (p.x_junction > 0 ? p.x_junction : ball_radius);
    const double target = ball_radius / std::sqrt(2.0);
    // solve neck_radius * cosh(x_j / a) = target for a by bisection
    double lo = 1e-6, hi = 100.0 * std::max(1.0, p.x_junction);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (neck_radius * std::cosh(p.x_junction / mid) > target)
        lo = mid;
      else
        hi = mid;
    }
    p.catenoid_a = 0.5 * (lo + hi);
    return p;
  }

  double x_end() const { return half_separation + ball_radius; }

  double operator()(double x) const {
    const double ax = std::abs(x);
    const double from_center = ax - half_separation;
    const double sphere_val =
        std::abs(from_center) < ball_radius
            ? std::sqrt(ball_radius * ball_radius - from_center * from_center)
            : 0.0;
    const double neck_val = neck_radius * std::cosh(ax / catenoid_a);
    if (ax <= x_junction - blend_half) return neck_val;
    if (ax >= x_junction + blend_half) return sphere_val;
    const double u = (ax - (x_junction - blend_half)) / (2.0 * blend_half);
    const double w = u * u * (3.0 - 2.0 * u);
    return (1.0 - w) * neck_val + w * sphere_val;
  }
};

inline Surface3 make_dumbbell(double ball_radius, double neck_radius, double separation,
                              int resolution, const Vec3& center) {
  if (ball_radius <= 0 || neck_radius <= 0 || separation <= 0)
    throw std::invalid_argument("dumbbell: all lengths must be positive");
  if (neck_radius >= ball_radius)
    throw std::invalid_argument("dumbbell: neck must be thinner than the balls");
  const DumbbellProfile profile = DumbbellProfile::make(ball_radius, neck_radius, separation);
  const int ntheta = std::max(resolution, 12);
  const int nrings = std::max(3 * ntheta, 32);
  const double x_end = profile.x_end();
  Surface3 s;
  // interior rings only; pole points close the ends
  std::vector<int> ring_start;
  for (int r = 1; r < nrings; ++r) {
    const double x = -x_end + 2.0 * x_end * r / nrings;
    const double rad = std::max(profile(x), 1e-9);
    ring_start.push_back(static_cast<int>(s.vertices.size()));
    for (int i = 0; i < ntheta; ++i) {
      const double th = 2.0 * kPi * i / ntheta;
      s.vertices.push_back(center + Vec3(x, rad * std::cos(th), rad * std::sin(th)));
    }
  }
  const int nring = static_cast<int>(ring_start.size());
  auto vid = [&](int r, int i) { return ring_start[r] + (i % ntheta); };
  for (int r = 0; r + 1 < nring; ++r)
    for (int i = 0; i < ntheta; ++i) {
      s.elements.push_back({vid(r, i), vid(r + 1, i), vid(r + 1, i + 1)});
      s.elements.push_back({vid(r, i), vid(r + 1, i + 1), vid(r, i + 1)});
    }
  const int left = static_cast<int>(s.vertices.size());
  s.vertices.push_back(center + Vec3(-x_end, 0, 0));
  const int right = static_cast<int>(s.vertices.size());
  s.vertices.push_back(center + Vec3(x_end, 0, 0));
  for (int i = 0; i < ntheta; ++i) {
    s.elements.push_back({left, vid(0, i + 1), vid(0, i)});
    s.elements.push_back({right, vid(nring - 1, i), vid(nring - 1, i + 1)});
  }
  orient_consistently(s);
  return s;
}

template <int N>
void apply_perturbation(Hypersurface<N>& s, const Perturbation& p, const Vec<N>& center) {
  const VectorField<N> nu = geom::outward_normals(s);
  for (int v = 0; v < s.vertex_count(); ++v) {
    const Vec<N> d = s.vertices[v] - center;
    const double theta = std::atan2(d.y(), d.x());
    s.vertices[v] += p.amplitude * std::cos(p.mode * theta) * nu.values[v];
  }
}

}  // namespace detail

template <int N>
Hypersurface<N> generate(const ShapeSpec& spec) {
  if (spec.ambient_dim() != N)
    throw std::invalid_argument("generate: shape kind does not live in ambient dimension " +
                                std::to_string(N));
  Hypersurface<N> s;
  if constexpr (N == 2) {
    const Vec2 c(spec.center[0], spec.center[1]);
    s = detail::make_circle(spec.radius, spec.resolution > 0 ? spec.resolution : 512, c);
    if (spec.perturb) detail::apply_perturbation(s, *spec.perturb, c);
  } else {
    const Vec3 c(spec.center[0], spec.center[1], spec.center[2]);
    switch (spec.kind) {
      case Kind::sphere:
        s = detail::make_sphere(spec.radius, spec.resolution > 0 ? spec.resolution : 4, c);
        break;
      case Kind::cylinder:
        s = detail::make_cylinder(spec.radius, spec.half_length,
                                  spec.resolution > 0 ? spec.resolution : 96, c);
        break;
      case Kind::torus:
        s = detail::make_torus(spec.minor_radius, spec.radius,
                               spec.resolution > 0 ? spec.resolution : 48, c);
        break;
      case Kind::dumbbell:
        s = detail::make_dumbbell(spec.radius, spec.minor_radius, spec.separation,
                                  spec.resolution > 0 ? spec.resolution : 48, c);
        break;
      default:
        throw std::invalid_argument("generate: unsupported kind for ambient dimension 3");
    }
    if (spec.perturb) detail::apply_perturbation(s, *spec.perturb, c);
  }
  require_valid(s);
  return s;
}

using AnySurface = std::variant<Surface2, Surface3>;

inline AnySurface generate_any(const ShapeSpec& spec) {
  if (spec.ambient_dim() == 2) return generate<2>(spec);
  return generate<3>(spec);
}

// Named presets used by the command line tools and the reproduction suite.
// Entries may hold several shapes (e.g. the Stone cross-check family).
inline const std::map<std::string, std::vector<ShapeSpec>>& catalog() {
  static const std::map<std::string, std::vector<ShapeSpec>> presets = {
      {"shrinker-circle", {circle(std::sqrt(2.0), 512)}},
      {"shrinker-sphere", {sphere(2.0, 4)}},
      {"stone-check-spheres", {circle(std::sqrt(2.0), 512), sphere(2.0, 4)}},
      {"circle-r1", {circle(1.0, 512)}},
      {"circle-r2", {circle(2.0, 512)}},
      {"circle-r3", {circle(3.0, 512)}},
      {"unit-sphere", {sphere(1.0, 4)}},
      {"cylinder-shrinker-section", {cylinder(std::sqrt(2.0), 8.0, 96)}},
      {"torus", {torus(0.5, 1.5, 48)}},  // geometric torus, not a shrinker
      {"dumbbell", {dumbbell(0.5, 0.1, 2.0, 48)}},
      {"perturbed-shrinker-circle", {perturbed(circle(std::sqrt(2.0), 512), 3, 0.1)}},
  };
  return presets;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : catalog()) names.push_back(k);
  return names;
}

// ---------------------------------------------------------------------------
// open test fixtures (not part of the catalog: they have boundary)

// Flat square patch of side `side` in the plane z=0, triangulated on a
// uniform grid.  Used as the truncated-hyperplane fixture.
inline Surface3 square_patch(double side, int cells_per_side) {
  Surface3 s;
  const int n = cells_per_side + 1;
  const double h = side / cells_per_side;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      s.vertices.push_back(Vec3(-0.5 * side + i * h, -0.5 * side + j * h, 0.0));
  auto vid = [&](int i, int j) { return i * n + j; };
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j + 1 < n; ++j) {
      s.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      s.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  return s;
}

// Straight segment through the origin along the x axis, the R^2 hyperplane
// proxy.
inline Surface2 line_segment(double half_length, int segments) {
  Surface2 s;
  const int n = segments + 1;
  for (int i = 0; i < n; ++i)
    s.vertices.push_back(Vec2(-half_length + 2.0 * half_length * i / segments, 0.0));
  for (int i = 0; i + 1 < n; ++i) s.elements.push_back({i, i + 1});
  return s;
}

// Interior vertex ids of the fixtures above (away from the open boundary).
inline std::vector<int> square_patch_interior(int cells_per_side) {
  std::vector<int> ids;
  const int n = cells_per_side + 1;
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 1; j + 1 < n; ++j) ids.push_back(i * n + j);
  return ids;
}

}  // namespace mcflab::shapes
