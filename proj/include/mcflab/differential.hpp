#pragma once

#include "mcflab/surface.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <string>
#include <vector>

namespace mcflab::geom {

// Lumped vertex weights: half of each incident segment length in R^2, one
// third of each incident triangle area in R^3.  The weights reproduce the
// total surface measure exactly; the scheme is first order.
template <int N>
ScalarField vertex_measures(const Hypersurface<N>& s) {
  ScalarField w;
  w.kind = FieldKind::measure_weight;
  w.values.assign(s.vertex_count(), 0.0);
  const double floor = default_geometry_floor(s);
  for (int e = 0; e < s.element_count(); ++e) {
    const double m = element_measure(s, e);
    if (m <= floor)
      throw std::invalid_argument("vertex_measures: degenerate element " + std::to_string(e));
    for (int k = 0; k < N; ++k) w.values[s.elements[e][k]] += m / N;
  }
  return w;
}

// Per-vertex unit outward normal: measure-weighted average of incident
// element normals, renormalized.
template <int N>
VectorField<N> outward_normals(const Hypersurface<N>& s) {
  VectorField<N> nrm;
  nrm.kind = FieldKind::normal;
  nrm.values.assign(s.vertex_count(), Vec<N>::Zero());
  for (int e = 0; e < s.element_count(); ++e) {
    const Vec<N> n = element_normal(s, e) * element_measure(s, e);
    for (int k = 0; k < N; ++k) nrm.values[s.elements[e][k]] += n;
  }
  for (int v = 0; v < s.vertex_count(); ++v) {
    const double len = nrm.values[v].norm();
    if (len < 1e-12)
      throw std::runtime_error("outward_normals: fold-over at vertex " + std::to_string(v));
    nrm.values[v] /= len;
  }
  return nrm;
}

struct CurvatureDiagnostics {
  std::vector<int> poor_quality_elements;  // aspect ratio above the cap
  double worst_aspect_ratio = 0.0;
};

namespace detail {

// Ordered polygon neighbourhood: for every vertex the (previous, next)
// neighbour along the directed segments.  Open chain endpoints keep -1.
template <int N>
void polygon_neighbors(const Hypersurface<N>& s, std::vector<int>& prev, std::vector<int>& next) {
  prev.assign(s.vertex_count(), -1);
  next.assign(s.vertex_count(), -1);
  for (const auto& el : s.elements) {
    next[el[0]] = el[1];
    prev[el[1]] = el[0];
  }
}

inline double cotangent(const Vec3& at, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - at, v = q - at;
  const double cross = u.cross(v).norm();
  if (cross < 1e-300) return 0.0;
  return u.dot(v) / cross;
}

}  // namespace detail

// Discrete mean curvature vector.
//
// R^2: turning angle over the lumped vertex length, directed along the
// tangent difference (exactly radial on regular polygons).  R^3: cotangent
// Laplacian of the position.  The Laplacian is normalized by the mixed
// Voronoi area rather than the lumped third-areas: barycentric normalization
// leaves an O(1) magnitude error at irregular-valence vertices (e.g. the 12
// five-valent vertices of subdivided icosahedra) and never meets a sup-norm
// tolerance, while the mixed area converges.
//
// Sign convention: for a round sphere of radius R the vector points to the
// center with magnitude (N-1)/R.
template <int N>
VectorField<N> mean_curvature_vector(const Hypersurface<N>& s,
                                     CurvatureDiagnostics* diag = nullptr,
                                     double aspect_ratio_cap = 20.0) {
  VectorField<N> H;
  H.kind = FieldKind::curvature;
  H.values.assign(s.vertex_count(), Vec<N>::Zero());
  if constexpr (N == 2) {
    std::vector<int> prev, next;
    detail::polygon_neighbors(s, prev, next);
    for (int v = 0; v < s.vertex_count(); ++v) {
      if (prev[v] < 0 || next[v] < 0) continue;  // open-chain endpoint
      const Vec2 ep = s.vertices[v] - s.vertices[prev[v]];
      const Vec2 en = s.vertices[next[v]] - s.vertices[v];
      const double lp = ep.norm(), ln = en.norm();
      if (lp < 1e-300 || ln < 1e-300) continue;
      const Vec2 tp = ep / lp, tn = en / ln;
      const double angle = std::atan2(tp.x() * tn.y() - tp.y() * tn.x(), tp.dot(tn));
      const Vec2 d = tn - tp;
      const double dn = d.norm();
      if (dn < 1e-14) continue;  // straight
      H.values[v] = (std::abs(angle) / (0.5 * (lp + ln))) * (d / dn);
    }
  } else {
    std::vector<Vec3> acc(s.vertex_count(), Vec3::Zero());
    std::vector<double> mixed_area(s.vertex_count(), 0.0);
    for (int e = 0; e < s.element_count(); ++e) {
      const auto& el = s.elements[e];
      const Vec3 p[3] = {s.vertices[el[0]], s.vertices[el[1]], s.vertices[el[2]]};
      const double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
      if (area < 1e-300) continue;
      double cot[3];
      bool obtuse[3];
      bool any_obtuse = false;
      double longest = 0.0, shortest = kInf;
      for (int k = 0; k < 3; ++k) {
        cot[k] = detail::cotangent(p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
        obtuse[k] = (p[(k + 1) % 3] - p[k]).dot(p[(k + 2) % 3] - p[k]) < 0.0;
        any_obtuse = any_obtuse || obtuse[k];
        const double l = (p[(k + 1) % 3] - p[k]).norm();
        longest = std::max(longest, l);
        shortest = std::min(shortest, l);
      }
      if (diag) {
        const double aspect = longest * longest / (2.0 * area);
        diag->worst_aspect_ratio = std::max(diag->worst_aspect_ratio, aspect);
        if (aspect > aspect_ratio_cap) diag->poor_quality_elements.push_back(e);
      }
      for (int k = 0; k < 3; ++k) {
        const int i = el[k], j = el[(k + 1) % 3];
        const double w = 0.5 * cot[(k + 2) % 3];
        acc[i] += w * (s.vertices[j] - s.vertices[i]);
        acc[j] += w * (s.vertices[i] - s.vertices[j]);
      }
      for (int k = 0; k < 3; ++k) {
        if (!any_obtuse) {
          const Vec3 e1 = p[(k + 1) % 3] - p[k], e2 = p[(k + 2) % 3] - p[k];
          mixed_area[el[k]] +=
              (e1.squaredNorm() * cot[(k + 2) % 3] + e2.squaredNorm() * cot[(k + 1) % 3]) / 8.0;
        } else {
          mixed_area[el[k]] += obtuse[k] ? area / 2.0 : area / 4.0;
        }
      }
    }
    for (int v = 0; v < s.vertex_count(); ++v) {
      if (mixed_area[v] > 1e-300) H.values[v] = acc[v] / mixed_area[v];
    }
  }
  return H;
}

// Per-vertex projection <v, nu> nu onto the outward normal direction.
template <int N>
VectorField<N> normal_projection(const Hypersurface<N>& s, const VectorField<N>& field) {
  if (field.size() != s.vertex_count())
    throw std::invalid_argument("normal_projection: field length does not match vertex count");
  const VectorField<N> nu = outward_normals(s);
  VectorField<N> out;
  out.kind = field.kind;
  out.values.resize(s.vertex_count());
  for (int v = 0; v < s.vertex_count(); ++v)
    out.values[v] = field.values[v].dot(nu.values[v]) * nu.values[v];
  return out;
}

// Stiffness/mass pair for the linear vertex Laplacian: W is the symmetric
// positive semidefinite stiffness matrix (inverse edge lengths in R^2,
// cotangent weights in R^3), mass the lumped vertex measures.  The discrete
// Laplacian of the position field is -M^{-1} W x.
struct LaplacianOperator {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;
};

template <int N>
LaplacianOperator build_laplacian(const Hypersurface<N>& s) {
  const int nv = s.vertex_count();
  std::vector<Eigen::Triplet<double>> trip;
  auto add_edge = [&](int i, int j, double w) {
    trip.emplace_back(i, j, -w);
    trip.emplace_back(j, i, -w);
    trip.emplace_back(i, i, w);
    trip.emplace_back(j, j, w);
  };
  if constexpr (N == 2) {
    for (const auto& el : s.elements) {
      const double l = (s.vertices[el[1]] - s.vertices[el[0]]).norm();
      if (l > 1e-300) add_edge(el[0], el[1], 1.0 / l);
    }
  } else {
    for (const auto& el : s.elements) {
      const Vec3 p[3] = {s.vertices[el[0]], s.vertices[el[1]], s.vertices[el[2]]};
      for (int k = 0; k < 3; ++k) {
        const double w = 0.5 * detail::cotangent(p[(k + 2) % 3], p[k], p[(k + 1) % 3]);
        add_edge(el[k], el[(k + 1) % 3], w);
      }
    }
  }
  LaplacianOperator op;
  op.stiffness.resize(nv, nv);
  op.stiffness.setFromTriplets(trip.begin(), trip.end());
  const ScalarField w = vertex_measures(s);
  op.mass = Eigen::Map<const Eigen::VectorXd>(w.values.data(), nv);
  return op;
}

}  // namespace mcflab::geom
