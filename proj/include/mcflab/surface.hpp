#pragma once

#include "mcflab/core.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mcflab {

// Discrete codimension-one hypersurface: a polygon in R^2 (elements are
// directed segments) or a triangle mesh in R^3.  Element vertex order induces
// the co-orientation; `outward_oriented` says whether that orientation points
// away from the enclosed region.  Open meshes are permitted as test fixtures
// only; the library's public entry points require closed surfaces.
template <int N>
struct Hypersurface {
  static_assert(N == 2 || N == 3, "ambient dimension must be 2 or 3");
  static constexpr int kAmbientDim = N;
  static constexpr int kSurfaceDim = N - 1;

  std::vector<Vec<N>> vertices;
  std::vector<std::array<int, N>> elements;
  bool outward_oriented = true;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int element_count() const { return static_cast<int>(elements.size()); }
};

using Surface2 = Hypersurface<2>;
using Surface3 = Hypersurface<3>;

enum class FieldKind { generic, measure_weight, normal, curvature, residual };

// One value per vertex of an associated surface.
template <class T>
struct VertexField {
  FieldKind kind = FieldKind::generic;
  std::vector<T> values;

  int size() const { return static_cast<int>(values.size()); }
  const T& operator[](int i) const { return values[i]; }
  T& operator[](int i) { return values[i]; }
};

using ScalarField = VertexField<double>;
template <int N>
using VectorField = VertexField<Vec<N>>;

// ---------------------------------------------------------------------------
// element measures and basic queries

template <int N>
double element_measure(const Hypersurface<N>& s, int e) {
  const auto& el = s.elements[e];
  if constexpr (N == 2) {
    return (s.vertices[el[1]] - s.vertices[el[0]]).norm();
  } else {
    const Vec3 ab = s.vertices[el[1]] - s.vertices[el[0]];
    const Vec3 ac = s.vertices[el[2]] - s.vertices[el[0]];
    return 0.5 * ab.cross(ac).norm();
  }
}

template <int N>
double total_measure(const Hypersurface<N>& s) {
  double sum = 0.0;
  for (int e = 0; e < s.element_count(); ++e) sum += element_measure(s, e);
  return sum;
}

// Unit normal of a single element, on the outward side.
template <int N>
Vec<N> element_normal(const Hypersurface<N>& s, int e) {
  const auto& el = s.elements[e];
  Vec<N> n;
  if constexpr (N == 2) {
    const Vec2 t = s.vertices[el[1]] - s.vertices[el[0]];
    n = Vec2(t.y(), -t.x());
  } else {
    const Vec3 ab = s.vertices[el[1]] - s.vertices[el[0]];
    const Vec3 ac = s.vertices[el[2]] - s.vertices[el[0]];
    n = ab.cross(ac);
  }
  const double len = n.norm();
  if (len == 0.0) throw std::runtime_error("element_normal: degenerate element " + std::to_string(e));
  n /= len;
  return s.outward_oriented ? n : Vec<N>(-n);
}

template <int N>
std::pair<Vec<N>, Vec<N>> bounding_box(const Hypersurface<N>& s) {
  Vec<N> lo = Vec<N>::Constant(kInf), hi = Vec<N>::Constant(-kInf);
  for (const auto& v : s.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

template <int N>
double diameter(const Hypersurface<N>& s) {
  if (s.vertices.empty()) return 0.0;
  auto [lo, hi] = bounding_box(s);
  return (hi - lo).norm();
}

// Default non-degeneracy floor for element measures.
template <int N>
double default_geometry_floor(const Hypersurface<N>& s) {
  const double d = diameter(s);
  return 1e-12 * std::pow(d, N - 1);
}

// Every unordered element edge (segment endpoint when N==2) with its incident
// element count; used by validity and component bookkeeping.
template <int N>
std::map<std::array<int, N - 1>, int> facet_incidence(const Hypersurface<N>& s) {
  std::map<std::array<int, N - 1>, int> count;
  for (const auto& el : s.elements) {
    if constexpr (N == 2) {
      ++count[{el[0]}];
      ++count[{el[1]}];
    } else {
      for (int k = 0; k < 3; ++k) {
        std::array<int, 2> key{el[k], el[(k + 1) % 3]};
        if (key[0] > key[1]) std::swap(key[0], key[1]);
        ++count[key];
      }
    }
  }
  return count;
}

template <int N>
bool is_closed(const Hypersurface<N>& s) {
  if (s.elements.empty()) return false;
  for (const auto& [facet, c] : facet_incidence(s))
    if (c != 2) return false;
  return true;
}

struct ValidityReport {
  bool closed = false;
  bool consistently_oriented = false;
  bool nondegenerate = false;
  std::string detail;
  bool ok() const { return closed && consistently_oriented && nondegenerate; }
};

// Orientation consistency: adjacent elements must induce opposite directions
// on their shared facet, i.e. every directed facet appears exactly once.
template <int N>
bool is_consistently_oriented(const Hypersurface<N>& s) {
  if constexpr (N == 2) {
    std::unordered_map<int, int> out_deg, in_deg;
    for (const auto& el : s.elements) {
      if (++out_deg[el[0]] > 1 || ++in_deg[el[1]] > 1) return false;
    }
    return true;
  } else {
    std::map<std::pair<int, int>, int> directed;
    for (const auto& el : s.elements) {
      for (int k = 0; k < 3; ++k) {
        if (++directed[{el[k], el[(k + 1) % 3]}] > 1) return false;
      }
    }
    return true;
  }
}

template <int N>
ValidityReport check_surface(const Hypersurface<N>& s, double geometry_floor = -1.0) {
  ValidityReport r;
  if (geometry_floor < 0) geometry_floor = default_geometry_floor(s);
  r.closed = is_closed(s);
  if (!r.closed) r.detail += "surface is not closed; ";
  r.consistently_oriented = is_consistently_oriented(s);
  if (!r.consistently_oriented) r.detail += "orientation is inconsistent; ";
  r.nondegenerate = true;
  for (int e = 0; e < s.element_count(); ++e) {
    for (int k = 0; k < N; ++k) {
      if (s.elements[e][k] < 0 || s.elements[e][k] >= s.vertex_count()) {
        r.nondegenerate = false;
        r.detail += "element " + std::to_string(e) + " has out-of-range vertex; ";
        break;
      }
    }
    if (r.nondegenerate && element_measure(s, e) <= geometry_floor) {
      r.nondegenerate = false;
      r.detail += "element " + std::to_string(e) + " is degenerate; ";
    }
  }
  return r;
}

template <int N>
void require_valid(const Hypersurface<N>& s, bool require_closed = true) {
  const ValidityReport r = check_surface(s);
  if (require_closed && !r.closed)
    throw std::invalid_argument("invalid surface: " + r.detail);
  if (!r.consistently_oriented || !r.nondegenerate)
    throw std::invalid_argument("invalid surface: " + r.detail);
}

// ---------------------------------------------------------------------------
// edge statistics

template <int N>
std::vector<std::array<int, 2>> mesh_edges(const Hypersurface<N>& s) {
  std::vector<std::array<int, 2>> edges;
  if constexpr (N == 2) {
    edges.reserve(s.elements.size());
    for (const auto& el : s.elements) edges.push_back({el[0], el[1]});
  } else {
    std::map<std::array<int, 2>, bool> seen;
    for (const auto& el : s.elements) {
      for (int k = 0; k < 3; ++k) {
        std::array<int, 2> key{el[k], el[(k + 1) % 3]};
        if (key[0] > key[1]) std::swap(key[0], key[1]);
        if (!seen.emplace(key, true).second) continue;
        edges.push_back(key);
      }
    }
  }
  return edges;
}

template <int N>
double min_edge_length(const Hypersurface<N>& s) {
  double m = kInf;
  for (const auto& e : mesh_edges(s))
    m = std::min(m, (s.vertices[e[1]] - s.vertices[e[0]]).norm());
  return m;
}

template <int N>
double mean_edge_length(const Hypersurface<N>& s) {
  double sum = 0.0;
  auto edges = mesh_edges(s);
  if (edges.empty()) return 0.0;
  for (const auto& e : edges) sum += (s.vertices[e[1]] - s.vertices[e[0]]).norm();
  return sum / static_cast<double>(edges.size());
}

// ---------------------------------------------------------------------------
// enclosed measure (area in R^2, volume in R^3), via the divergence theorem

template <int N>
double signed_enclosed_measure(const Hypersurface<N>& s) {
  double acc = 0.0;
  if constexpr (N == 2) {
    for (const auto& el : s.elements) {
      const Vec2& a = s.vertices[el[0]];
      const Vec2& b = s.vertices[el[1]];
      acc += 0.5 * (a.x() * b.y() - a.y() * b.x());
    }
  } else {
    for (const auto& el : s.elements) {
      const Vec3& a = s.vertices[el[0]];
      const Vec3& b = s.vertices[el[1]];
      const Vec3& c = s.vertices[el[2]];
      acc += a.dot(b.cross(c)) / 6.0;
    }
  }
  return s.outward_oriented ? acc : -acc;
}

template <int N>
double enclosed_measure(const Hypersurface<N>& s) {
  return std::abs(signed_enclosed_measure(s));
}

// ---------------------------------------------------------------------------
// transforms

template <int N>
Hypersurface<N> transformed(const Hypersurface<N>& s, const Similarity<N>& t) {
  Hypersurface<N> out = s;
  for (auto& v : out.vertices) v = t(v);
  return out;
}

template <int N>
Hypersurface<N> translated(const Hypersurface<N>& s, const Vec<N>& shift) {
  return transformed(s, Similarity<N>::translation(shift));
}

template <int N>
Hypersurface<N> with_flipped_orientation(const Hypersurface<N>& s) {
  Hypersurface<N> out = s;
  out.outward_oriented = !out.outward_oriented;
  return out;
}

// ---------------------------------------------------------------------------
// uniform refinement (midpoint split; elements stay on the input surface)

template <int N>
Hypersurface<N> refine_uniform(const Hypersurface<N>& s) {
  Hypersurface<N> out;
  out.outward_oriented = s.outward_oriented;
  out.vertices = s.vertices;
  std::map<std::array<int, 2>, int> midpoint;
  auto mid = [&](int a, int b) {
    std::array<int, 2> key{std::min(a, b), std::max(a, b)};
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(0.5 * (s.vertices[a] + s.vertices[b]));
    midpoint.emplace(key, id);
    return id;
  };
  if constexpr (N == 2) {
    for (const auto& el : s.elements) {
      const int m = mid(el[0], el[1]);
      out.elements.push_back({el[0], m});
      out.elements.push_back({m, el[1]});
    }
  } else {
    for (const auto& el : s.elements) {
      const int ab = mid(el[0], el[1]);
      const int bc = mid(el[1], el[2]);
      const int ca = mid(el[2], el[0]);
      out.elements.push_back({el[0], ab, ca});
      out.elements.push_back({ab, el[1], bc});
      out.elements.push_back({ca, bc, el[2]});
      out.elements.push_back({ab, bc, ca});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// connected components

template <int N>
std::vector<int> component_labels(const Hypersurface<N>& s, int* count_out = nullptr) {
  const int nv = s.vertex_count();
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& el : s.elements)
    for (int k = 1; k < N; ++k) parent[find(el[0])] = find(el[k]);
  std::vector<int> label(nv, -1);
  int count = 0;
  for (int v = 0; v < nv; ++v) {
    const int r = find(v);
    if (label[r] < 0) label[r] = count++;
    label[v] = label[r];
  }
  if (count_out) *count_out = count;
  return label;
}

template <int N>
int component_count(const Hypersurface<N>& s) {
  if (s.vertex_count() == 0) return 0;
  int c = 0;
  component_labels(s, &c);
  return c;
}

template <int N>
std::vector<Hypersurface<N>> split_components(const Hypersurface<N>& s) {
  int count = 0;
  const std::vector<int> label = component_labels(s, &count);
  std::vector<Hypersurface<N>> parts(count);
  for (auto& p : parts) p.outward_oriented = s.outward_oriented;
  for (const auto& el : s.elements) parts[label[el[0]]].elements.push_back(el);
  // compact vertex arrays per component
  for (int c = 0; c < count; ++c) {
    auto& part = parts[c];
    std::unordered_map<int, int> local;
    for (auto& el : part.elements) {
      for (int k = 0; k < N; ++k) {
        auto it = local.find(el[k]);
        if (it == local.end()) {
          const int id = static_cast<int>(part.vertices.size());
          part.vertices.push_back(s.vertices[el[k]]);
          local.emplace(el[k], id);
          el[k] = id;
        } else {
          el[k] = it->second;
        }
      }
    }
  }
  return parts;
}

// ---------------------------------------------------------------------------
// distances

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // project onto the triangle plane, then clamp to edges if outside
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double t = d1 / (d1 - d3);
    return (p - (a + t * ab)).norm();
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double t = d2 / (d2 - d6);
    return (p - (a + t * ac)).norm();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + t * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + v * ab + w * ac)).norm();
}

inline double segment_segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s, t;
  if (a <= 1e-30 && e <= 1e-30) return r.norm();
  if (a <= 1e-30) {
    s = 0.0;
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-30) {
      t = 0.0;
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom != 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

template <int N>
double point_element_distance(const Vec<N>& p, const Hypersurface<N>& s, int e) {
  const auto& el = s.elements[e];
  if constexpr (N == 2) {
    return point_segment_distance(p, s.vertices[el[0]], s.vertices[el[1]]);
  } else {
    return point_triangle_distance(p, s.vertices[el[0]], s.vertices[el[1]], s.vertices[el[2]]);
  }
}

template <int N>
double distance_to_surface(const Vec<N>& p, const Hypersurface<N>& s) {
  double best = kInf;
  for (int e = 0; e < s.element_count(); ++e)
    best = std::min(best, point_element_distance(p, s, e));
  return best;
}

// Exact minimum distance between two meshes.  In R^2 the minimum between
// disjoint polygons is always attained at a vertex of one of them; in R^3
// edge-edge pairs are checked as well.
template <int N>
double min_distance(const Hypersurface<N>& a, const Hypersurface<N>& b) {
  double best = kInf;
  for (const auto& v : a.vertices) best = std::min(best, distance_to_surface<N>(v, b));
  for (const auto& v : b.vertices) best = std::min(best, distance_to_surface<N>(v, a));
  if constexpr (N == 3) {
    const auto ea = mesh_edges(a), eb = mesh_edges(b);
    for (const auto& i : ea) {
      const Vec3 &p1 = a.vertices[i[0]], &q1 = a.vertices[i[1]];
      const double reach = std::max((q1 - p1).norm(), 0.0);
      for (const auto& j : eb) {
        const Vec3 &p2 = b.vertices[j[0]], &q2 = b.vertices[j[1]];
        // cheap reject against current best
        if ((0.5 * (p1 + q1) - 0.5 * (p2 + q2)).norm() >
            best + 0.5 * reach + 0.5 * (q2 - p2).norm())
          continue;
        best = std::min(best, segment_segment_distance(p1, q1, p2, q2));
      }
    }
  }
  return best;
}

// Vertex-sampled symmetric Hausdorff distance.
template <int N>
double hausdorff_distance(const Hypersurface<N>& a, const Hypersurface<N>& b) {
  double worst = 0.0;
  for (const auto& v : a.vertices) worst = std::max(worst, distance_to_surface<N>(v, b));
  for (const auto& v : b.vertices) worst = std::max(worst, distance_to_surface<N>(v, a));
  return worst;
}

// ---------------------------------------------------------------------------
// self-intersection checks (non-adjacent element pairs)

inline bool segments_properly_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
  };
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

inline bool segment_triangle_intersect(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b,
                                       const Vec3& c) {
  const Vec3 d = q - p;
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 h = d.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < 1e-16) return false;  // parallel / coplanar: ignored
  const double inv = 1.0 / det;
  const Vec3 s = p - a;
  const double u = s.dot(h) * inv;
  if (u <= 0.0 || u >= 1.0) return false;
  const Vec3 qv = s.cross(e1);
  const double v = d.dot(qv) * inv;
  if (v <= 0.0 || u + v >= 1.0) return false;
  const double t = e2.dot(qv) * inv;
  return t > 0.0 && t < 1.0;
}

template <int N>
bool elements_adjacent(const std::array<int, N>& a, const std::array<int, N>& b) {
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (a[i] == b[j]) return true;
  return false;
}

template <int N>
bool has_self_intersection(const Hypersurface<N>& s) {
  // uniform bucket grid over element bounding boxes
  const int ne = s.element_count();
  if (ne < 2) return false;
  const double cell = std::max(2.0 * mean_edge_length(s), 1e-12);
  auto key_of = [&](const Vec<N>& p) {
    std::array<int64_t, N> k;
    for (int d = 0; d < N; ++d) k[d] = static_cast<int64_t>(std::floor(p[d] / cell));
    return k;
  };
  std::map<std::array<int64_t, N>, std::vector<int>> buckets;
  std::vector<std::pair<Vec<N>, Vec<N>>> boxes(ne);
  for (int e = 0; e < ne; ++e) {
    Vec<N> lo = Vec<N>::Constant(kInf), hi = Vec<N>::Constant(-kInf);
    for (int k = 0; k < N; ++k) {
      lo = lo.cwiseMin(s.vertices[s.elements[e][k]]);
      hi = hi.cwiseMax(s.vertices[s.elements[e][k]]);
    }
    boxes[e] = {lo, hi};
    const auto klo = key_of(lo), khi = key_of(hi);
    std::array<int64_t, N> k = klo;
    while (true) {
      buckets[k].push_back(e);
      int d = 0;
      for (; d < N; ++d) {
        if (k[d] < khi[d]) {
          ++k[d];
          for (int dd = 0; dd < d; ++dd) k[dd] = klo[dd];
          break;
        }
      }
      if (d == N) break;
    }
  }
  for (const auto& [key, list] : buckets) {
    for (size_t i = 0; i < list.size(); ++i) {
      for (size_t j = i + 1; j < list.size(); ++j) {
        const int e1 = list[i], e2 = list[j];
        const auto& a = s.elements[e1];
        const auto& b = s.elements[e2];
        if (elements_adjacent<N>(a, b)) continue;
        bool boxsep = false;
        for (int d = 0; d < N; ++d)
          if (boxes[e1].second[d] < boxes[e2].first[d] || boxes[e2].second[d] < boxes[e1].first[d])
            boxsep = true;
        if (boxsep) continue;
        if constexpr (N == 2) {
          if (segments_properly_intersect(s.vertices[a[0]], s.vertices[a[1]], s.vertices[b[0]],
                                          s.vertices[b[1]]))
            return true;
        } else {
          bool hit = false;
          for (int k = 0; k < 3 && !hit; ++k)
            hit = segment_triangle_intersect(s.vertices[a[k]], s.vertices[a[(k + 1) % 3]],
                                             s.vertices[b[0]], s.vertices[b[1]], s.vertices[b[2]]);
          for (int k = 0; k < 3 && !hit; ++k)
            hit = segment_triangle_intersect(s.vertices[b[k]], s.vertices[b[(k + 1) % 3]],
                                             s.vertices[a[0]], s.vertices[a[1]], s.vertices[a[2]]);
          if (hit) return true;
        }
      }
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// orientation repair (used by mesh generators; breadth-first propagation)

template <int N>
void orient_consistently(Hypersurface<N>& s) {
  if constexpr (N == 2) {
    // follow directed chains: require each vertex to have one outgoing segment
    std::unordered_map<int, std::vector<int>> incident;
    for (int e = 0; e < s.element_count(); ++e) {
      incident[s.elements[e][0]].push_back(e);
      incident[s.elements[e][1]].push_back(e);
    }
    std::vector<int> state(s.element_count(), 0);  // 0 unvisited, 1 kept, 2 flipped
    for (int seed = 0; seed < s.element_count(); ++seed) {
      if (state[seed]) continue;
      state[seed] = 1;
      std::vector<int> stack{seed};
      while (!stack.empty()) {
        const int e = stack.back();
        stack.pop_back();
        const auto el = s.elements[e];
        for (int endpoint : {el[0], el[1]}) {
          for (int o : incident[endpoint]) {
            if (o == e || state[o]) continue;
            auto& oe = s.elements[o];
            // consistent when one uses the vertex as head and the other as tail
            const bool this_head = (el[1] == endpoint);
            const bool other_tail = (oe[0] == endpoint);
            if (this_head != other_tail) std::swap(oe[0], oe[1]);
            state[o] = 1;
            stack.push_back(o);
          }
        }
      }
    }
  } else {
    std::map<std::array<int, 2>, std::vector<int>> edge_tris;
    for (int e = 0; e < s.element_count(); ++e) {
      const auto& el = s.elements[e];
      for (int k = 0; k < 3; ++k) {
        std::array<int, 2> key{el[k], el[(k + 1) % 3]};
        if (key[0] > key[1]) std::swap(key[0], key[1]);
        edge_tris[key].push_back(e);
      }
    }
    auto has_directed = [&](const std::array<int, 3>& el, int u, int v) {
      for (int k = 0; k < 3; ++k)
        if (el[k] == u && el[(k + 1) % 3] == v) return true;
      return false;
    };
    std::vector<int> state(s.element_count(), 0);
    for (int seed = 0; seed < s.element_count(); ++seed) {
      if (state[seed]) continue;
      state[seed] = 1;
      std::vector<int> stack{seed};
      while (!stack.empty()) {
        const int e = stack.back();
        stack.pop_back();
        const auto el = s.elements[e];
        for (int k = 0; k < 3; ++k) {
          const int u = el[k], v = el[(k + 1) % 3];
          std::array<int, 2> key{std::min(u, v), std::max(u, v)};
          for (int o : edge_tris[key]) {
            if (o == e || state[o]) continue;
            auto& oe = s.elements[o];
            if (has_directed(oe, u, v)) std::swap(oe[1], oe[2]);
            state[o] = 1;
            stack.push_back(o);
          }
        }
      }
    }
  }
  // fix the global side so that the flag semantics hold
  if (signed_enclosed_measure(s) < 0.0) {
    for (auto& el : s.elements) {
      if constexpr (N == 2)
        std::swap(el[0], el[1]);
      else
        std::swap(el[1], el[2]);
    }
  }
}

}  // namespace mcflab
