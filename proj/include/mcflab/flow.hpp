#pragma once

#include "mcflab/differential.hpp"
#include "mcflab/remesh.hpp"
#include "mcflab/surface.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <optional>
#include <vector>

namespace mcflab::flow {

enum class FieldType { zero, renormalizing, affine };

// Ambient vectorfield X driving the normal velocity H + X^perp.  The
// renormalizing field is x/2; affine fields are A x + b.  All satisfy the
// linear-growth hypothesis sup |X(x)|/(|x|+1) < infinity.
template <int N>
struct AmbientVectorField {
  FieldType type = FieldType::zero;
  Mat<N> linear = Mat<N>::Zero();
  Vec<N> offset = Vec<N>::Zero();

  static AmbientVectorField zero() { return {}; }

  static AmbientVectorField renormalizing() {
    AmbientVectorField f;
    f.type = FieldType::renormalizing;
    return f;
  }

  static AmbientVectorField affine(const Mat<N>& a, const Vec<N>& b) {
    AmbientVectorField f;
    f.type = FieldType::affine;
    f.linear = a;
    f.offset = b;
    return f;
  }

  Vec<N> operator()(const Vec<N>& x) const {
    switch (type) {
      case FieldType::zero: return Vec<N>::Zero();
      case FieldType::renormalizing: return 0.5 * x;
      case FieldType::affine: return linear * x + offset;
    }
    return Vec<N>::Zero();
  }

  // Upper bound for sup |X(x)| / (|x| + 1).
  double growth_constant() const {
    switch (type) {
      case FieldType::zero: return 0.0;
      case FieldType::renormalizing: return 0.5;
      case FieldType::affine: {
        const double op = linear.jacobiSvd().singularValues()(0);
        return std::max(op, offset.norm());
      }
    }
    return 0.0;
  }
};

enum class FlowStatus { completed, extinct, blown_up };

inline const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::completed: return "completed";
    case FlowStatus::extinct: return "extinct";
    case FlowStatus::blown_up: return "blown_up";
  }
  return "?";
}

template <int N>
struct TrajectorySample {
  double t = 0;
  Hypersurface<N> surface;
  double max_speed = 0;
  double min_edge = 0;
};

struct RemeshEvent {
  double t = 0;
  int splits = 0;
  int collapses = 0;
};

template <int N>
struct FlowTrajectory {
  AmbientVectorField<N> field;
  std::vector<TrajectorySample<N>> samples;
  FlowStatus status = FlowStatus::completed;
  double extinction_time = std::numeric_limits<double>::quiet_NaN();
  std::vector<RemeshEvent> remesh_events;
  double initial_enclosed_measure = 0;

  double start_time() const { return samples.empty() ? 0.0 : samples.front().t; }
  double end_time() const { return samples.empty() ? 0.0 : samples.back().t; }
};

struct StepConfig {
  bool semi_implicit = true;
  double dt_cap_factor = 0.2;  // dt <= factor * (min edge)^2
};

namespace detail {

template <int N>
VectorField<N> projected_field(const Hypersurface<N>& s, const AmbientVectorField<N>& field) {
  VectorField<N> x;
  x.values.resize(s.vertex_count());
  for (int v = 0; v < s.vertex_count(); ++v) x.values[v] = field(s.vertices[v]);
  if (field.type == FieldType::zero) return x;
  return geom::normal_projection(s, x);
}

template <int N>
double max_velocity(const Hypersurface<N>& s, const AmbientVectorField<N>& field) {
  const auto H = geom::mean_curvature_vector(s);
  const auto Xp = projected_field(s, field);
  double worst = 0;
  for (int v = 0; v < s.vertex_count(); ++v)
    worst = std::max(worst, (H.values[v] + Xp.values[v]).norm());
  return worst;
}

}  // namespace detail

// One explicit or semi-implicit time step of x' = H + X^perp.  The
// semi-implicit variant treats the curvature term through the linear vertex
// Laplacian (backward Euler) and the vectorfield explicitly; stiffness sits
// in the curvature operator, so this removes the parabolic dt restriction
// while the configured cap still guards accuracy.
template <int N>
Hypersurface<N> step(const Hypersurface<N>& s, const AmbientVectorField<N>& field, double dt,
                     const StepConfig& cfg = {}) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be positive");
  const double medge = min_edge_length(s);
  const double cap = cfg.dt_cap_factor * medge * medge;
  if (dt > cap * (1.0 + 1e-9))
    throw std::invalid_argument("step: dt " + std::to_string(dt) + " exceeds stability cap " +
                                std::to_string(cap));
  Hypersurface<N> out = s;
  const auto Xp = detail::projected_field(s, field);
  if (cfg.semi_implicit) {
    const geom::LaplacianOperator op = geom::build_laplacian(s);
    const int n = s.vertex_count();
    Eigen::SparseMatrix<double> A = op.stiffness * dt;
    for (int i = 0; i < n; ++i) A.coeffRef(i, i) += op.mass(i);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("step: implicit system factorization failed");
    Eigen::MatrixXd rhs(n, N);
    for (int v = 0; v < n; ++v)
      for (int d = 0; d < N; ++d)
        rhs(v, d) = op.mass(v) * (s.vertices[v][d] + dt * Xp.values[v][d]);
    const Eigen::MatrixXd sol = solver.solve(rhs);
    for (int v = 0; v < n; ++v)
      for (int d = 0; d < N; ++d) out.vertices[v][d] = sol(v, d);
  } else {
    const auto H = geom::mean_curvature_vector(s);
    for (int v = 0; v < s.vertex_count(); ++v)
      out.vertices[v] += dt * (H.values[v] + Xp.values[v]);
  }
  return out;
}

struct FlowConfig {
  StepConfig step;
  double dt_max = kInf;
  double sample_interval = 0;      // 0: horizon / 64
  double t_start = 0;
  double extinction_floor = 1e-4;  // fraction of the initial enclosed measure
  double blowup_curvature_edge_product = 1.0;  // max|H| * min_edge above this
  remesh::RemeshConfig remesh;     // target 0: frozen to the initial mean edge
  bool enable_remesh = true;
  int self_intersection_checks = -1;  // -1 auto (on in R^2), 0 off, 1 on
  long max_steps = 20'000'000;
};

// Integrate until the horizon, extinction (enclosed measure below the
// configured floor) or blow-up (unresolvable curvature or self-intersection).
template <int N>
FlowTrajectory<N> run(const Hypersurface<N>& initial, const AmbientVectorField<N>& field,
                      double horizon, FlowConfig cfg = {}) {
  if (!(horizon > 0)) throw std::invalid_argument("run: horizon must be positive");
  require_valid(initial);
  FlowTrajectory<N> traj;
  traj.field = field;
  traj.initial_enclosed_measure = enclosed_measure(initial);

  const double interval = cfg.sample_interval > 0 ? cfg.sample_interval : horizon / 64.0;
  if (cfg.enable_remesh && cfg.remesh.target_edge_length <= 0)
    cfg.remesh.target_edge_length = mean_edge_length(initial);
  const bool check_si = cfg.self_intersection_checks == 1 ||
                        (cfg.self_intersection_checks == -1 && N == 2);

  Hypersurface<N> surf = initial;
  double t = cfg.t_start;
  const double t_end = cfg.t_start + horizon;

  auto record = [&](double time) {
    TrajectorySample<N> sample;
    sample.t = time;
    sample.surface = surf;
    sample.min_edge = min_edge_length(surf);
    sample.max_speed = detail::max_velocity(surf, field);
    traj.samples.push_back(std::move(sample));
  };
  record(t);

  int next_sample = 1;
  for (long step_count = 0; t < t_end - 1e-14; ++step_count) {
    if (step_count >= cfg.max_steps)
      throw std::runtime_error("run: step budget exhausted before the horizon");
    const double medge = min_edge_length(surf);
    double dt = std::min(cfg.step.dt_cap_factor * medge * medge, cfg.dt_max);
    const double next_stop = std::min(cfg.t_start + next_sample * interval, t_end);
    dt = std::min(dt, next_stop - t);
    if (!(dt > 0)) break;
    surf = step(surf, field, dt, cfg.step);
    t += dt;

    if (cfg.enable_remesh) {
      const auto outcome = remesh::remesh(surf, cfg.remesh);
      if (outcome.changed())
        traj.remesh_events.push_back({t, outcome.splits, outcome.collapses});
    }

    const double measure = enclosed_measure(surf);
    if (measure < cfg.extinction_floor * traj.initial_enclosed_measure) {
      traj.status = FlowStatus::extinct;
      traj.extinction_time = t;
      return traj;
    }

    const bool at_stop = t >= next_stop - 1e-14;
    if (at_stop) {
      const auto H = geom::mean_curvature_vector(surf);
      double maxH = 0;
      for (const auto& h : H.values) maxH = std::max(maxH, h.norm());
      if (maxH * min_edge_length(surf) > cfg.blowup_curvature_edge_product ||
          (check_si && has_self_intersection(surf))) {
        traj.status = FlowStatus::blown_up;
        return traj;
      }
      record(t);
      if (t >= cfg.t_start + next_sample * interval - 1e-14) ++next_sample;
    }
  }
  traj.status = FlowStatus::completed;
  return traj;
}

// ---------------------------------------------------------------------------
// spacetime change of coordinates between ordinary and renormalized flow:
// an ordinary flow on t in [-1, 0) maps to a renormalized flow on s in
// [0, inf) via s = -log|t| and a 1/sqrt(-t) dilation.  The maps are exact
// inverses of each other.

template <int N>
FlowTrajectory<N> renormalize_transform(const FlowTrajectory<N>& traj) {
  if (traj.field.type != FieldType::zero)
    throw std::invalid_argument("renormalize_transform: input must be an ordinary flow");
  FlowTrajectory<N> out;
  out.field = AmbientVectorField<N>::renormalizing();
  out.status = traj.status;
  for (const auto& sample : traj.samples) {
    if (!(sample.t >= -1.0 && sample.t < 0.0))
      throw std::invalid_argument("renormalize_transform: sample time outside [-1, 0)");
    TrajectorySample<N> mapped;
    mapped.t = -std::log(-sample.t);
    const double scale = 1.0 / std::sqrt(-sample.t);
    mapped.surface = sample.surface;
    for (auto& v : mapped.surface.vertices) v *= scale;
    mapped.min_edge = sample.min_edge * scale;
    mapped.max_speed = sample.max_speed;  // heuristic carry-over
    out.samples.push_back(std::move(mapped));
  }
  out.initial_enclosed_measure =
      out.samples.empty() ? 0.0 : enclosed_measure(out.samples.front().surface);
  return out;
}

template <int N>
FlowTrajectory<N> unrenormalize_transform(const FlowTrajectory<N>& traj) {
  if (traj.field.type != FieldType::renormalizing)
    throw std::invalid_argument("unrenormalize_transform: input must be a renormalized flow");
  FlowTrajectory<N> out;
  out.field = AmbientVectorField<N>::zero();
  out.status = traj.status;
  for (const auto& sample : traj.samples) {
    if (!(sample.t >= 0.0))
      throw std::invalid_argument("unrenormalize_transform: sample time outside [0, inf)");
    TrajectorySample<N> mapped;
    mapped.t = -std::exp(-sample.t);
    const double scale = std::sqrt(-mapped.t);
    mapped.surface = sample.surface;
    for (auto& v : mapped.surface.vertices) v *= scale;
    mapped.min_edge = sample.min_edge * scale;
    mapped.max_speed = sample.max_speed;
    out.samples.push_back(std::move(mapped));
  }
  out.initial_enclosed_measure =
      out.samples.empty() ? 0.0 : enclosed_measure(out.samples.front().surface);
  return out;
}

// ---------------------------------------------------------------------------
// strict X-mean-convexity and inward perturbation

enum class RegionSide { enclosed, exterior };

struct ConvexityReport {
  bool holds = false;
  double margin = 0;  // min over vertices of <H + X^perp, inward normal>
};

template <int N>
ConvexityReport x_mean_convex(const Hypersurface<N>& s, const AmbientVectorField<N>& field,
                              RegionSide side, double margin_floor = 1e-3) {
  const auto H = geom::mean_curvature_vector(s);
  const auto Xp = detail::projected_field(s, field);
  const auto nu = geom::outward_normals(s);
  const double sign = side == RegionSide::enclosed ? -1.0 : 1.0;
  double margin = kInf;
  for (int v = 0; v < s.vertex_count(); ++v)
    margin = std::min(margin, (H.values[v] + Xp.values[v]).dot(sign * nu.values[v]));
  return {margin > margin_floor, margin};
}

template <int N>
struct PerturbResult {
  Hypersurface<N> surface;
  ConvexityReport predicate;
};

// Push the surface by epsilon along the inward normal and verify strict
// X-mean-convexity of the result.  epsilon = 0 is the identity and reports
// the predicate without failing (a stationary surface is legitimately not
// strictly convex).
template <int N>
PerturbResult<N> inward_perturb(const Hypersurface<N>& s, double epsilon,
                                const AmbientVectorField<N>& field =
                                    AmbientVectorField<N>::renormalizing(),
                                RegionSide side = RegionSide::enclosed) {
  if (epsilon < 0) throw std::invalid_argument("inward_perturb: epsilon must be nonnegative");
  const auto H = geom::mean_curvature_vector(s);
  double reach = kInf;
  for (const auto& h : H.values)
    if (h.norm() > 1e-12) reach = std::min(reach, (N - 1) / h.norm());
  if (epsilon > reach / 4.0)
    throw std::invalid_argument("inward_perturb: epsilon exceeds the reach estimate " +
                                std::to_string(reach / 4.0));
  PerturbResult<N> out;
  out.surface = s;
  const auto nu = geom::outward_normals(s);
  const double dir = side == RegionSide::enclosed ? -1.0 : 1.0;
  for (int v = 0; v < s.vertex_count(); ++v)
    out.surface.vertices[v] += dir * epsilon * nu.values[v];
  out.predicate = x_mean_convex(out.surface, field, side);
  if (epsilon > 0 && !out.predicate.holds)
    throw std::runtime_error(
        "inward_perturb: perturbed surface is not strictly X-mean-convex (margin " +
        std::to_string(out.predicate.margin) + "); use a smaller epsilon or a finer mesh");
  return out;
}

// ---------------------------------------------------------------------------
// avoidance bookkeeping between two trajectories

struct AvoidanceSeries {
  std::vector<double> times;
  std::vector<double> distance;
  std::vector<double> weighted;  // e^{-t/2} * distance, for renormalized pairs
};

template <int N>
AvoidanceSeries avoidance_distance(const FlowTrajectory<N>& a, const FlowTrajectory<N>& b,
                                   double match_tolerance = 1e-6) {
  if (a.field.type != b.field.type)
    throw std::invalid_argument("avoidance_distance: trajectories use different vectorfields");
  if (a.samples.empty() || b.samples.empty() || a.end_time() < b.start_time() - match_tolerance ||
      b.end_time() < a.start_time() - match_tolerance)
    throw std::invalid_argument("avoidance_distance: time ranges do not overlap");
  AvoidanceSeries series;
  size_t j = 0;
  for (const auto& sample : a.samples) {
    while (j + 1 < b.samples.size() && b.samples[j].t < sample.t - match_tolerance) ++j;
    if (std::abs(b.samples[j].t - sample.t) > match_tolerance) continue;
    const double d = min_distance(sample.surface, b.samples[j].surface);
    series.times.push_back(sample.t);
    series.distance.push_back(d);
    if (a.field.type == FieldType::renormalizing)
      series.weighted.push_back(std::exp(-0.5 * sample.t) * d);
  }
  if (series.times.empty())
    throw std::invalid_argument("avoidance_distance: no matched sample times");
  if (series.distance.front() <= 0.0)
    throw std::invalid_argument("avoidance_distance: surfaces are not initially disjoint");
  return series;
}

}  // namespace mcflab::flow
