#include "mcflab/flow.hpp"

#include "mcflab/functionals.hpp"
#include "mcflab/shapes.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace mcflab;
using namespace mcflab::flow;

namespace {

double mean_radius(const Surface2& s) {
  Vec2 c = Vec2::Zero();
  for (const auto& v : s.vertices) c += v;
  c /= s.vertex_count();
  double r = 0;
  for (const auto& v : s.vertices) r += (v - c).norm();
  return r / s.vertex_count();
}

}  // namespace

TEST_CASE("vectorfield kinds and growth constants") {
  const auto zero = AmbientVectorField<2>::zero();
  const auto renorm = AmbientVectorField<2>::renormalizing();
  CHECK(zero(Vec2(3, 4)).norm() == 0.0);
  CHECK((renorm(Vec2(3, 4)) - Vec2(1.5, 2)).norm() == 0.0);
  CHECK(zero.growth_constant() == 0.0);
  CHECK(renorm.growth_constant() == 0.5);
  Mat<2> a;
  a << 0.5, 0.2, -0.1, 0.3;
  const auto aff = AmbientVectorField<2>::affine(a, Vec2(1, 0));
  CHECK(std::isfinite(aff.growth_constant()));
  CHECK((aff(Vec2(1, 1)) - Vec2(1.7, 0.2)).norm() < 1e-14);
}

TEST_CASE("single step on canonical fixtures") {
  // a stationary shrinker does not move under the renormalizing field
  const Surface2 shrinker = shapes::generate<2>(shapes::circle(std::sqrt(2.0), 256));
  const double dt = 1e-4;
  for (bool implicit : {true, false}) {
    StepConfig cfg;
    cfg.semi_implicit = implicit;
    const Surface2 next = step(shrinker, AmbientVectorField<2>::renormalizing(), dt, cfg);
    double sup = 0;
    for (int v = 0; v < next.vertex_count(); ++v)
      sup = std::max(sup, (next.vertices[v] - shrinker.vertices[v]).norm());
    CHECK(sup <= 1e-3 * dt);
  }

  // a circle of radius 2 under MCF shrinks at rate 1/R = 1/2
  const Surface2 big = shapes::generate<2>(shapes::circle(2.0, 512));
  const Surface2 shrunk = step(big, AmbientVectorField<2>::zero(), 1e-3);
  const double dr = mean_radius(big) - mean_radius(shrunk);
  CHECK_THAT(dr, Catch::Matchers::WithinRel(5e-4, 0.05));

  // a flat patch has zero curvature and stays put under the explicit scheme
  const Surface3 patch = shapes::square_patch(2.0, 8);
  StepConfig expl;
  expl.semi_implicit = false;
  const Surface3 same = step(patch, AmbientVectorField<3>::zero(), 1e-4, expl);
  const auto interior = shapes::square_patch_interior(8);
  for (int v : interior)
    CHECK((same.vertices[v] - patch.vertices[v]).norm() <= 1e-12);

  // dt above the stability cap is rejected
  CHECK_THROWS_AS(step(big, AmbientVectorField<2>::zero(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(step(big, AmbientVectorField<2>::zero(), -1e-3), std::invalid_argument);
}

TEST_CASE("shrinking circle follows the closed-form radius law") {
  const Surface2 s = shapes::generate<2>(shapes::circle(2.0, 256));
  FlowConfig cfg;
  cfg.sample_interval = 0.1;
  const auto traj = run(s, AmbientVectorField<2>::zero(), 1.8, cfg);
  REQUIRE(traj.status == FlowStatus::completed);
  for (const auto& sample : traj.samples) {
    const double expect = std::sqrt(4.0 - 2.0 * sample.t);
    CHECK_THAT(mean_radius(sample.surface), Catch::Matchers::WithinRel(expect, 1e-2));
  }
}

TEST_CASE("renormalized circle extinction near log 2") {
  const Surface2 s = shapes::generate<2>(shapes::circle(1.0, 256));
  FlowConfig cfg;
  cfg.sample_interval = 0.05;
  const auto traj = run(s, AmbientVectorField<2>::renormalizing(), 1.0, cfg);
  REQUIRE(traj.status == FlowStatus::extinct);
  CHECK_THAT(traj.extinction_time, Catch::Matchers::WithinRel(std::log(2.0), 0.05));
  // R(t)^2 = 2 - e^t along the way
  for (const auto& sample : traj.samples) {
    if (sample.t > 0.6) continue;  // mesh coarsens near extinction
    const double expect = std::sqrt(2.0 - std::exp(sample.t));
    CHECK_THAT(mean_radius(sample.surface), Catch::Matchers::WithinRel(expect, 2e-2));
  }
}

TEST_CASE("stationary shrinker circle stays put for two time units") {
  const Surface2 s = shapes::generate<2>(shapes::circle(std::sqrt(2.0), 256));
  FlowConfig cfg;
  cfg.sample_interval = 0.25;
  const auto traj = run(s, AmbientVectorField<2>::renormalizing(), 2.0, cfg);
  REQUIRE(traj.status == FlowStatus::completed);
  CHECK(traj.remesh_events.empty());
  CHECK(hausdorff_distance(traj.samples.back().surface, s) <= 1e-2);
}

TEST_CASE("growing renormalized circle tracks its law and splits edges") {
  const Surface2 s = shapes::generate<2>(shapes::circle(3.0, 256));
  FlowConfig cfg;
  cfg.sample_interval = 0.1;
  const auto traj = run(s, AmbientVectorField<2>::renormalizing(), 0.8, cfg);
  REQUIRE(traj.status == FlowStatus::completed);
  const double expect = std::sqrt(2.0 + 7.0 * std::exp(0.8));
  CHECK_THAT(mean_radius(traj.samples.back().surface), Catch::Matchers::WithinRel(expect, 1e-2));
}

TEST_CASE("renormalize transform and its inverse") {
  // run an ordinary flow on t in [-1, -0.2] from the self-similar circle
  const Surface2 s = shapes::generate<2>(shapes::circle(std::sqrt(2.0), 512));
  FlowConfig cfg;
  cfg.sample_interval = 0.05;
  cfg.t_start = -1.0;
  const auto mcf = run(s, AmbientVectorField<2>::zero(), 0.8, cfg);
  REQUIRE(mcf.status == FlowStatus::completed);

  const auto renorm = renormalize_transform(mcf);
  CHECK(renorm.field.type == FieldType::renormalizing);
  for (size_t i = 0; i < renorm.samples.size(); ++i) {
    CHECK_THAT(renorm.samples[i].t, Catch::Matchers::WithinAbs(-std::log(-mcf.samples[i].t), 1e-12));
    // the transformed shrinking circle is the stationary sqrt(2) circle
    CHECK_THAT(mean_radius(renorm.samples[i].surface),
               Catch::Matchers::WithinRel(std::sqrt(2.0), 2e-2));
  }

  const auto back = unrenormalize_transform(renorm);
  REQUIRE(back.samples.size() == mcf.samples.size());
  for (size_t i = 0; i < back.samples.size(); ++i) {
    CHECK_THAT(back.samples[i].t, Catch::Matchers::WithinAbs(mcf.samples[i].t, 1e-12));
    double sup = 0;
    for (int v = 0; v < back.samples[i].surface.vertex_count(); ++v)
      sup = std::max(sup, (back.samples[i].surface.vertices[v] -
                           mcf.samples[i].surface.vertices[v]).norm());
    CHECK(sup <= 1e-12);
  }

  // domain errors
  FlowTrajectory<2> wrong;
  wrong.field = AmbientVectorField<2>::renormalizing();
  CHECK_THROWS_AS(renormalize_transform(wrong), std::invalid_argument);
  FlowTrajectory<2> outside;
  outside.field = AmbientVectorField<2>::zero();
  outside.samples.push_back({0.5, s, 0, 0});
  CHECK_THROWS_AS(renormalize_transform(outside), std::invalid_argument);
}

TEST_CASE("transformed ordinary run matches a direct renormalized run") {
  // ordinary flow from R(-1) = 1.2 on t in [-1, -0.3]
  const Surface2 s = shapes::generate<2>(shapes::circle(1.2, 512));
  FlowConfig cfg;
  cfg.sample_interval = 0.07;
  cfg.t_start = -1.0;
  const auto mcf = run(s, AmbientVectorField<2>::zero(), 0.7, cfg);
  REQUIRE(mcf.status == FlowStatus::completed);
  const auto transformed_traj = renormalize_transform(mcf);

  FlowConfig cfg2;
  cfg2.sample_interval = 0.01;
  const auto direct = run(s, AmbientVectorField<2>::renormalizing(),
                          -std::log(0.3) + 0.02, cfg2);
  REQUIRE(direct.status == FlowStatus::completed);

  for (const auto& sample : transformed_traj.samples) {
    // nearest direct sample in time
    double best_dt = kInf;
    const TrajectorySample<2>* nearest = nullptr;
    for (const auto& d : direct.samples) {
      if (std::abs(d.t - sample.t) < best_dt) {
        best_dt = std::abs(d.t - sample.t);
        nearest = &d;
      }
    }
    REQUIRE(nearest != nullptr);
    REQUIRE(best_dt <= 0.0101);
    CHECK(hausdorff_distance(sample.surface, nearest->surface) <= 1e-2);
  }
}

TEST_CASE("inward perturbation and strict convexity predicate") {
  const Surface2 shrinker = shapes::generate<2>(shapes::circle(std::sqrt(2.0), 512));

  // epsilon = 0 is the identity; the shrinker itself is not strictly convex
  const auto same = inward_perturb(shrinker, 0.0);
  CHECK_FALSE(same.predicate.holds);
  CHECK(std::abs(same.predicate.margin) <= 2e-2);

  const auto pert = inward_perturb(shrinker, 0.05);
  CHECK(pert.predicate.holds);
  CHECK(pert.predicate.margin > 0);
  CHECK_THAT(mean_radius(pert.surface), Catch::Matchers::WithinAbs(std::sqrt(2.0) - 0.05, 1e-6));

  const Surface3 sphere = shapes::generate<3>(shapes::sphere(2.0, 4));
  const auto pert3 = inward_perturb(sphere, 0.05);
  CHECK(pert3.predicate.holds);
  double r3 = 0;
  for (const auto& v : pert3.surface.vertices) r3 += v.norm();
  r3 /= pert3.surface.vertex_count();
  CHECK_THAT(r3, Catch::Matchers::WithinAbs(1.95, 5e-3));

  // epsilon above the reach estimate is rejected
  CHECK_THROWS_AS(inward_perturb(shrinker, 10.0), std::invalid_argument);
}

TEST_CASE("x_mean_convex margins match the closed forms") {
  const auto renorm2 = AmbientVectorField<2>::renormalizing();
  const Surface2 small = shapes::generate<2>(shapes::circle(1.0, 512));
  const auto inside = x_mean_convex(small, renorm2, RegionSide::enclosed);
  CHECK(inside.holds);
  CHECK_THAT(inside.margin, Catch::Matchers::WithinAbs(0.5, 2e-2));

  const Surface2 big = shapes::generate<2>(shapes::circle(2.0, 512));
  const auto outside = x_mean_convex(big, renorm2, RegionSide::exterior);
  CHECK(outside.holds);
  CHECK_THAT(outside.margin, Catch::Matchers::WithinAbs(0.5, 2e-2));

  const Surface2 shrinker = shapes::generate<2>(shapes::circle(std::sqrt(2.0), 512));
  for (auto side : {RegionSide::enclosed, RegionSide::exterior}) {
    const auto r = x_mean_convex(shrinker, renorm2, side);
    CHECK_FALSE(r.holds);
    CHECK(std::abs(r.margin) <= 2e-2);
  }
}

TEST_CASE("avoidance distance for concentric circles") {
  const Surface2 inner = shapes::generate<2>(shapes::circle(1.0, 256));
  const Surface2 outer = shapes::generate<2>(shapes::circle(3.0, 256));
  FlowConfig cfg;
  cfg.sample_interval = 0.02;

  SECTION("ordinary flow: distance non-decreasing until inner extinction") {
    const auto t1 = run(inner, AmbientVectorField<2>::zero(), 0.45, cfg);
    const auto t2 = run(outer, AmbientVectorField<2>::zero(), 0.45, cfg);
    const auto series = avoidance_distance(t1, t2);
    REQUIRE(series.times.size() >= 10);
    for (size_t i = 1; i < series.distance.size(); ++i)
      CHECK(series.distance[i] >= series.distance[i - 1] - 1e-3);
  }

  SECTION("renormalized flow: weighted distance non-decreasing") {
    const auto t1 = run(inner, AmbientVectorField<2>::renormalizing(), 0.6, cfg);
    const auto t2 = run(outer, AmbientVectorField<2>::renormalizing(), 0.6, cfg);
    const auto series = avoidance_distance(t1, t2);
    REQUIRE(series.weighted.size() == series.times.size());
    for (size_t i = 1; i < series.weighted.size(); ++i)
      CHECK(series.weighted[i] >= series.weighted[i - 1] - 1e-3);
  }

  SECTION("translated twin trajectory stays disjoint") {
    const auto t1 = run(inner, AmbientVectorField<2>::zero(), 0.3, cfg);
    FlowTrajectory<2> t2 = t1;
    for (auto& sample : t2.samples)
      sample.surface = translated(sample.surface, Vec2(10.0, 0.0));
    const auto series = avoidance_distance(t1, t2);
    CHECK(series.distance.front() >= 10.0 - 2.0 * 1.0 - 1e-9);
    for (double d : series.distance) CHECK(d > 0);
  }

  SECTION("mismatched fields and disjoint ranges are rejected") {
    const auto t1 = run(inner, AmbientVectorField<2>::zero(), 0.2, cfg);
    const auto t2 = run(outer, AmbientVectorField<2>::renormalizing(), 0.2, cfg);
    CHECK_THROWS_AS(avoidance_distance(t1, t2), std::invalid_argument);
    FlowConfig late = cfg;
    late.t_start = 5.0;
    const auto t3 = run(outer, AmbientVectorField<2>::zero(), 0.2, late);
    CHECK_THROWS_AS(avoidance_distance(t1, t3), std::invalid_argument);
  }
}

TEST_CASE("gaussian area is non-increasing along flows") {
  FlowConfig cfg;
  cfg.sample_interval = 0.05;
  struct Case {
    const char* name;
    Surface2 surface;
    AmbientVectorField<2> field;
    double horizon;
  };
  const std::vector<Case> cases = {
      {"mcf circle", shapes::generate<2>(shapes::circle(2.0, 256)), AmbientVectorField<2>::zero(), 1.0},
      {"renorm small", shapes::generate<2>(shapes::circle(1.0, 256)),
       AmbientVectorField<2>::renormalizing(), 0.5},
      {"renorm big", shapes::generate<2>(shapes::circle(3.0, 256)),
       AmbientVectorField<2>::renormalizing(), 0.5},
      {"stationary", shapes::generate<2>(shapes::circle(std::sqrt(2.0), 256)),
       AmbientVectorField<2>::renormalizing(), 0.5},
  };
  for (const auto& c : cases) {
    const auto traj = run(c.surface, c.field, c.horizon, cfg);
    INFO(c.name);
    double prev = kInf;
    double prev_err = 0;
    for (const auto& sample : traj.samples) {
      const auto fa = functionals::gaussian_area(sample.surface);
      const double slack = 2.0 * (fa.quadrature_error_estimate + prev_err) + 1e-6;
      CHECK(fa.value <= prev + slack);
      prev = fa.value;
      prev_err = fa.quadrature_error_estimate;
    }
  }
}

TEST_CASE("parametric containment under strict convexity") {
  // shrinking circle: later enclosed regions are strictly inside earlier ones
  const Surface2 s = shapes::generate<2>(shapes::circle(2.0, 256));
  FlowConfig cfg;
  cfg.sample_interval = 0.2;
  const auto traj = run(s, AmbientVectorField<2>::zero(), 1.0, cfg);
  for (size_t i = 1; i < traj.samples.size(); ++i) {
    // probe: every vertex of the later surface lies inside the earlier circle
    const double r_prev = mean_radius(traj.samples[i - 1].surface);
    for (const auto& v : traj.samples[i].surface.vertices) CHECK(v.norm() < r_prev);
  }
}
