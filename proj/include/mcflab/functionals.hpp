#pragma once

#include "mcflab/differential.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/optimize.hpp"
#include "mcflab/surface.hpp"

#include <algorithm>
#include <type_traits>
#include <cmath>
#include <vector>

namespace mcflab::functionals {

struct GaussianAreaResult {
  double value = 0;
  double quadrature_error_estimate = 0;
};

namespace detail {

// (4 pi)^{-m/2} sum_v w_v exp(-lambda^2 |x_v - c|^2 / 4) * lambda^m,
// the Gaussian area of the translated and rescaled copy without
// materializing it.
template <int N>
double weighted_gaussian_sum(const std::vector<Vec<N>>& verts, const std::vector<double>& weights,
                             const std::type_identity_t<Vec<N>>& center, double scale) {
  constexpr int m = N - 1;
  const double pref = std::pow(4.0 * kPi, -0.5 * m) * std::pow(scale, m);
  const double s2 = scale * scale;
  double acc = 0;
  for (size_t v = 0; v < verts.size(); ++v)
    acc += weights[v] * std::exp(-0.25 * s2 * (verts[v] - center).squaredNorm());
  return pref * acc;
}

template <int N>
double plain_value(const Hypersurface<N>& s, const std::type_identity_t<Vec<N>>& center,
                   double scale) {
  if (s.elements.empty()) return 0.0;
  const ScalarField w = geom::vertex_measures(s);
  return weighted_gaussian_sum<N>(s.vertices, w.values, center, scale);
}

}  // namespace detail

// Gaussian area with a Richardson error estimate from one uniform midpoint
// refinement (the vertex-lumped quadrature is second order on the fixed
// polyhedral surface, so err ~ 4/3 |F_fine - F_coarse|).
template <int N>
GaussianAreaResult gaussian_area(const Hypersurface<N>& s) {
  GaussianAreaResult r;
  if (s.elements.empty()) return r;  // empty surface: zero area, exact
  r.value = detail::plain_value(s, Vec<N>::Zero(), 1.0);
  const double fine = detail::plain_value(refine_uniform(s), Vec<N>::Zero(), 1.0);
  r.quadrature_error_estimate = 4.0 / 3.0 * std::abs(fine - r.value);
  return r;
}

// Gaussian area of scale * (x - center) applied to the surface.
template <int N>
GaussianAreaResult f_translate_scale(const Hypersurface<N>& s,
                                     const std::type_identity_t<Vec<N>>& center, double scale) {
  if (!(scale > 0)) throw std::invalid_argument("f_translate_scale: scale must be positive");
  GaussianAreaResult r;
  if (s.elements.empty()) return r;
  r.value = detail::plain_value(s, center, scale);
  const double fine = detail::plain_value(refine_uniform(s), center, scale);
  r.quadrature_error_estimate = 4.0 / 3.0 * std::abs(fine - r.value);
  return r;
}

// Closed-form entropy of the self-similar k-sphere, evaluated in log space:
// omega_k (k / (2 pi e))^{k/2} with omega_k the unit k-sphere area.
inline double stone_entropy(int k) {
  if (k < 1) throw std::invalid_argument("stone_entropy: k must be at least 1");
  const double log_omega = std::log(2.0) + 0.5 * (k + 1) * std::log(kPi) - std::lgamma(0.5 * (k + 1));
  return std::exp(log_omega + 0.5 * k * (std::log(static_cast<double>(k)) - std::log(2.0 * kPi) - 1.0));
}

// ---------------------------------------------------------------------------
// entropy: multistart ascent of F[scale (x - center)] over center and
// log(scale)

struct OptimizerConfig {
  int restarts = 16;
  uint64_t seed = 0;
  double scale_min = 1e-2;  // times the diameter-normalized unit
  double scale_max = 1e2;
  int max_iterations = 200;
  double gradient_tolerance = 1e-10;
};

template <int N>
struct EntropyResult {
  double value = 0;
  Vec<N> argmax_center = Vec<N>::Zero();
  double argmax_scale = 1.0;
  int restarts_used = 0;
  bool converged = false;
  bool scale_at_bound = false;
  double value_at_identity = 0;
};

template <int N>
EntropyResult<N> entropy(const Hypersurface<N>& s, const OptimizerConfig& cfg = {}) {
  constexpr int m = N - 1;
  const ScalarField wf = geom::vertex_measures(s);
  const std::vector<double>& w = wf.values;
  const std::vector<Vec<N>>& x = s.vertices;

  const double diam = std::max(diameter(s), 1e-12);
  const double unit_scale = 2.0 * std::sqrt(2.0 * m) / diam;  // maps radius diam/2 near the fixed sphere
  // The vertex-lumped quadrature stops resolving the Gaussian once rescaled
  // edges reach unit length; beyond that the discrete sup degenerates to a
  // single-vertex atom, so the scale box is capped by quadrature validity.
  const double quad_cap = 1.0 / std::max(mean_edge_length(s), 1e-12);
  const double log_lo = std::log(cfg.scale_min * unit_scale);
  const double log_hi =
      std::max(std::log(std::min(cfg.scale_max * unit_scale, quad_cap)), log_lo + 1.0);

  // objective with analytic gradient in (center, u = log scale); leaving the
  // scale box is rejected so the line search backtracks into it
  auto objective = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    Vec<N> c;
    for (int d = 0; d < N; ++d) c[d] = p[d];
    const double u = p[N];
    if (u < log_lo || u > log_hi) {
      if (grad) grad->setZero();
      return -kInf;
    }
    const double scale = std::exp(u);
    const double s2 = scale * scale;
    const double pref = std::pow(4.0 * kPi, -0.5 * m) * std::pow(scale, m);
    double acc = 0;
    Vec<N> dcenter = Vec<N>::Zero();
    double du = 0;
    for (size_t v = 0; v < x.size(); ++v) {
      const Vec<N> d = x[v] - c;
      const double term = w[v] * std::exp(-0.25 * s2 * d.squaredNorm());
      acc += term;
      dcenter += term * (0.5 * s2) * d;
      du += term * (m - 0.5 * s2 * d.squaredNorm());
    }
    if (grad) {
      for (int d = 0; d < N; ++d) (*grad)[d] = pref * dcenter[d];
      (*grad)[N] = pref * du;
    }
    return pref * acc;
  };

  // deterministic seeds: identity parameters, plain centroid with scale set
  // from distance quantiles, Gaussian-weighted centroid
  std::vector<Eigen::VectorXd> seeds;
  auto push_seed = [&](const Vec<N>& c, double scale) {
    Eigen::VectorXd p(N + 1);
    for (int d = 0; d < N; ++d) p[d] = c[d];
    p[N] = std::clamp(std::log(scale), log_lo, log_hi);
    seeds.push_back(p);
  };
  push_seed(Vec<N>::Zero(), 1.0);

  Vec<N> centroid = Vec<N>::Zero();
  Vec<N> gauss_centroid = Vec<N>::Zero();
  double wsum = 0, gsum = 0;
  for (size_t v = 0; v < x.size(); ++v) {
    centroid += w[v] * x[v];
    wsum += w[v];
    const double g = w[v] * std::exp(-0.25 * x[v].squaredNorm());
    gauss_centroid += g * x[v];
    gsum += g;
  }
  centroid /= wsum;
  if (gsum > 1e-300) gauss_centroid /= gsum;

  std::vector<double> dist;
  dist.reserve(x.size());
  for (const auto& p : x) dist.push_back((p - centroid).norm());
  std::vector<double> sorted = dist;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    return sorted[std::min(sorted.size() - 1, static_cast<size_t>(q * sorted.size()))];
  };
  double rms = 0;
  for (size_t v = 0; v < x.size(); ++v) rms += w[v] * dist[v] * dist[v];
  rms = std::sqrt(rms / wsum);

  push_seed(centroid, std::sqrt(2.0 * m) / std::max(rms, 1e-12));
  for (double q : {0.05, 0.25, 0.5})
    push_seed(centroid, std::sqrt(2.0) / std::max(quantile(q), 1e-12));
  push_seed(gauss_centroid, 1.0);

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const auto [lo, hi] = bounding_box(s);
  while (static_cast<int>(seeds.size()) < cfg.restarts) {
    Vec<N> c;
    for (int d = 0; d < N; ++d) c[d] = lo[d] + (hi[d] - lo[d]) * uni(rng);
    Eigen::VectorXd p(N + 1);
    for (int d = 0; d < N; ++d) p[d] = c[d];
    p[N] = log_lo + (log_hi - log_lo) * uni(rng);
    seeds.push_back(p);
  }

  EntropyResult<N> best;
  best.value = -kInf;
  opt::LocalMaxOptions options;
  options.max_iterations = cfg.max_iterations;
  options.gradient_tolerance = cfg.gradient_tolerance;
  for (const auto& seed : seeds) {
    const auto res = opt::maximize(objective, seed, options);
    ++best.restarts_used;
    if (res.value > best.value) {
      best.value = res.value;
      for (int d = 0; d < N; ++d) best.argmax_center[d] = res.x[d];
      best.argmax_scale = std::exp(res.x[N]);
      best.converged = res.converged;
      best.scale_at_bound =
          res.x[N] <= log_lo + 1e-6 || res.x[N] >= log_hi - 1e-6;
    }
  }
  best.value_at_identity = detail::plain_value(s, Vec<N>::Zero(), 1.0);
  if (best.value < best.value_at_identity) {
    best.value = best.value_at_identity;
    best.argmax_center = Vec<N>::Zero();
    best.argmax_scale = 1.0;
  }
  return best;
}

// ---------------------------------------------------------------------------
// self-shrinker residual H + x^perp / 2

template <int N>
struct ShrinkerResidual {
  VectorField<N> field;
  double sup_norm = 0;
  double l2_norm = 0;  // sqrt(sum_v w_v |r_v|^2)
};

template <int N>
ShrinkerResidual<N> shrinker_residual(const Hypersurface<N>& s) {
  ShrinkerResidual<N> out;
  out.field.kind = FieldKind::residual;
  out.field.values.resize(s.vertex_count());
  const auto H = geom::mean_curvature_vector(s);
  VertexField<Vec<N>> position;
  position.values = s.vertices;
  const auto xperp = geom::normal_projection(s, position);
  const ScalarField w = geom::vertex_measures(s);
  double l2 = 0;
  for (int v = 0; v < s.vertex_count(); ++v) {
    const Vec<N> r = H.values[v] + 0.5 * xperp.values[v];
    out.field.values[v] = r;
    out.sup_norm = std::max(out.sup_norm, r.norm());
    l2 += w.values[v] * r.squaredNorm();
  }
  out.l2_norm = std::sqrt(l2);
  return out;
}

// ---------------------------------------------------------------------------
// Gauss density from an ordinary mean curvature flow history

struct DensityConfig {
  double kernel_width_edges = 3.0;  // exclude samples with sqrt(2 tau) below this many edges
  double monotone_tolerance = 1e-2;
};

template <int N>
struct DensityEstimate {
  Vec<N> point = Vec<N>::Zero();
  double time = 0;
  std::vector<std::pair<double, double>> samples;  // (t, Huisken integral)
  double extrapolated_theta = 0;
  bool trend_is_monotone = false;
  int excluded_coarse = 0;
};

// Backward heat kernel integral of one surface slice.
template <int N>
double huisken_integral(const Hypersurface<N>& s, const std::type_identity_t<Vec<N>>& x0,
                        double tau) {
  constexpr int m = N - 1;
  if (!(tau > 0)) throw std::invalid_argument("huisken_integral: tau must be positive");
  const ScalarField w = geom::vertex_measures(s);
  const double pref = std::pow(4.0 * kPi * tau, -0.5 * m);
  double acc = 0;
  for (int v = 0; v < s.vertex_count(); ++v)
    acc += w.values[v] * std::exp(-(s.vertices[v] - x0).squaredNorm() / (4.0 * tau));
  return pref * acc;
}

template <int N>
DensityEstimate<N> gauss_density(const flow::FlowTrajectory<N>& traj,
                                 const std::type_identity_t<Vec<N>>& x0, double t0,
                                 const DensityConfig& cfg = {}) {
  if (traj.field.type != flow::FieldType::zero)
    throw std::invalid_argument("gauss_density: trajectory must be an ordinary flow (X = 0)");
  DensityEstimate<N> est;
  est.point = x0;
  est.time = t0;
  int before = 0;
  for (const auto& sample : traj.samples) {
    if (sample.t >= t0) continue;
    ++before;
    const double tau = t0 - sample.t;
    const double width = std::sqrt(2.0 * tau);
    const double h = mean_edge_length(sample.surface);
    if (width < cfg.kernel_width_edges * h) {
      ++est.excluded_coarse;
      continue;  // kernel unresolvable on this mesh
    }
    est.samples.emplace_back(sample.t, huisken_integral(sample.surface, x0, tau));
  }
  if (before < 2)
    throw std::invalid_argument("gauss_density: need at least 2 samples before t0");
  if (est.samples.empty()) {
    est.extrapolated_theta = 0;
    return est;
  }
  est.trend_is_monotone = true;
  for (size_t i = 1; i < est.samples.size(); ++i)
    if (est.samples[i].second > est.samples[i - 1].second + cfg.monotone_tolerance)
      est.trend_is_monotone = false;

  // linear extrapolation in tau = t0 - t over the last three samples when
  // they agree monotonically; the latest sample is the tightest upper
  // estimate otherwise
  est.extrapolated_theta = est.samples.back().second;
  if (est.samples.size() >= 3) {
    const auto& s3 = est.samples;
    const size_t n = s3.size();
    const double v0 = s3[n - 3].second, v1 = s3[n - 2].second, v2 = s3[n - 1].second;
    if (v0 >= v1 - cfg.monotone_tolerance && v1 >= v2 - cfg.monotone_tolerance) {
      const double tau0 = t0 - s3[n - 3].first, tau1 = t0 - s3[n - 2].first,
                   tau2 = t0 - s3[n - 1].first;
      // least squares line v = a + b tau through the three points
      const double mt = (tau0 + tau1 + tau2) / 3.0, mv = (v0 + v1 + v2) / 3.0;
      const double stt = sqr(tau0 - mt) + sqr(tau1 - mt) + sqr(tau2 - mt);
      if (stt > 1e-300) {
        const double b =
            ((tau0 - mt) * (v0 - mv) + (tau1 - mt) * (v1 - mv) + (tau2 - mt) * (v2 - mv)) / stt;
        est.extrapolated_theta = mv - b * mt;
      }
    }
  }
  return est;
}

}  // namespace mcflab::functionals
