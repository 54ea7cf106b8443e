#pragma once

#include "mcflab/differential.hpp"
#include "mcflab/surface.hpp"

#include <map>
#include <set>
#include <vector>

namespace mcflab::remesh {

struct RemeshConfig {
  double target_edge_length = 0;  // 0: frozen to the first surface seen by run()
  double split_ratio = 2.0;
  double collapse_ratio = 0.5;
  int min_vertices = 16;
  int relax_iterations = 2;
  double relax_weight = 0.5;
};

struct RemeshOutcome {
  int splits = 0;
  int collapses = 0;
  bool changed() const { return splits + collapses > 0; }
};

namespace detail {

// tangential Laplacian smoothing: move towards the neighbour average with the
// normal component removed, so the smoothing does not add normal motion
template <int N>
void tangential_relax(Hypersurface<N>& s, int iterations, double weight) {
  if (iterations <= 0) return;
  for (int it = 0; it < iterations; ++it) {
    const VectorField<N> nu = geom::outward_normals(s);
    std::vector<Vec<N>> centroid(s.vertex_count(), Vec<N>::Zero());
    std::vector<double> wsum(s.vertex_count(), 0.0);
    for (const auto& e : mesh_edges(s)) {
      centroid[e[0]] += s.vertices[e[1]];
      centroid[e[1]] += s.vertices[e[0]];
      wsum[e[0]] += 1.0;
      wsum[e[1]] += 1.0;
    }
    for (int v = 0; v < s.vertex_count(); ++v) {
      if (wsum[v] == 0.0) continue;
      Vec<N> delta = centroid[v] / wsum[v] - s.vertices[v];
      delta -= delta.dot(nu.values[v]) * nu.values[v];
      s.vertices[v] += weight * delta;
    }
  }
}

// Polygon loops as ordered vertex index cycles.
inline std::vector<std::vector<int>> polygon_loops(const Surface2& s) {
  std::vector<int> next(s.vertex_count(), -1);
  for (const auto& el : s.elements) next[el[0]] = el[1];
  std::vector<bool> seen(s.vertex_count(), false);
  std::vector<std::vector<int>> loops;
  for (int start = 0; start < s.vertex_count(); ++start) {
    if (seen[start] || next[start] < 0) continue;
    std::vector<int> loop;
    int v = start;
    while (!seen[v]) {
      seen[v] = true;
      loop.push_back(v);
      v = next[v];
      if (v < 0) break;  // open chain: leave untouched
    }
    if (v == start && loop.size() >= 3) loops.push_back(std::move(loop));
  }
  return loops;
}

inline RemeshOutcome remesh_polygon(Surface2& s, const RemeshConfig& cfg) {
  RemeshOutcome out;
  const auto loops = polygon_loops(s);
  std::vector<std::vector<Vec2>> new_loops;
  for (const auto& loop : loops) {
    std::vector<Vec2> pts;
    pts.reserve(loop.size());
    for (int v : loop) pts.push_back(s.vertices[v]);
    // split pass
    std::vector<Vec2> split;
    for (size_t i = 0; i < pts.size(); ++i) {
      const Vec2& a = pts[i];
      const Vec2& b = pts[(i + 1) % pts.size()];
      split.push_back(a);
      if ((b - a).norm() > cfg.split_ratio * cfg.target_edge_length) {
        split.push_back(0.5 * (a + b));
        ++out.splits;
      }
    }
    // collapse pass
    std::vector<Vec2> collapsed;
    size_t i = 0;
    while (i < split.size()) {
      const Vec2& a = split[i];
      const Vec2& b = split[(i + 1) % split.size()];
      const size_t remaining = split.size() - i + collapsed.size();
      if ((b - a).norm() < cfg.collapse_ratio * cfg.target_edge_length &&
          remaining > static_cast<size_t>(cfg.min_vertices) && i + 1 < split.size()) {
        collapsed.push_back(0.5 * (a + b));
        i += 2;
        ++out.collapses;
      } else {
        collapsed.push_back(a);
        i += 1;
      }
    }
    new_loops.push_back(std::move(collapsed));
  }
  if (!out.changed()) return out;
  Surface2 rebuilt;
  rebuilt.outward_oriented = s.outward_oriented;
  for (const auto& loop : new_loops) {
    const int base = rebuilt.vertex_count();
    const int n = static_cast<int>(loop.size());
    for (const auto& p : loop) rebuilt.vertices.push_back(p);
    for (int k = 0; k < n; ++k) rebuilt.elements.push_back({base + k, base + (k + 1) % n});
  }
  s = std::move(rebuilt);
  tangential_relax(s, cfg.relax_iterations, cfg.relax_weight);
  return out;
}

inline RemeshOutcome remesh_triangles(Surface3& s, const RemeshConfig& cfg) {
  RemeshOutcome out;

  // --- split pass ------------------------------------------------------
  {
    std::map<std::array<int, 2>, std::vector<int>> edge_tris;
    for (int e = 0; e < s.element_count(); ++e) {
      const auto& el = s.elements[e];
      for (int k = 0; k < 3; ++k) {
        std::array<int, 2> key{el[k], el[(k + 1) % 3]};
        if (key[0] > key[1]) std::swap(key[0], key[1]);
        edge_tris[key].push_back(e);
      }
    }
    std::set<int> dead;
    std::vector<std::array<int, 3>> added;
    for (const auto& [key, tris] : edge_tris) {
      if (tris.size() != 2) continue;
      const double len = (s.vertices[key[1]] - s.vertices[key[0]]).norm();
      if (len <= cfg.split_ratio * cfg.target_edge_length) continue;
      if (dead.count(tris[0]) || dead.count(tris[1])) continue;
      const int mid = s.vertex_count();
      s.vertices.push_back(0.5 * (s.vertices[key[0]] + s.vertices[key[1]]));
      for (int t : tris) {
        const auto el = s.elements[t];
        for (int k = 0; k < 3; ++k) {
          const int u = el[k], v = el[(k + 1) % 3], w = el[(k + 2) % 3];
          if ((u == key[0] && v == key[1]) || (u == key[1] && v == key[0])) {
            added.push_back({u, mid, w});
            added.push_back({mid, v, w});
            dead.insert(t);
            break;
          }
        }
      }
      ++out.splits;
    }
    if (!dead.empty()) {
      std::vector<std::array<int, 3>> kept;
      for (int e = 0; e < s.element_count(); ++e)
        if (!dead.count(e)) kept.push_back(s.elements[e]);
      for (const auto& el : added) kept.push_back(el);
      s.elements = std::move(kept);
    }
  }

  // --- collapse pass ---------------------------------------------------
  {
    std::map<std::array<int, 2>, std::vector<int>> edge_tris;
    std::map<int, std::set<int>> neighbors;
    for (int e = 0; e < s.element_count(); ++e) {
      const auto& el = s.elements[e];
      for (int k = 0; k < 3; ++k) {
        std::array<int, 2> key{el[k], el[(k + 1) % 3]};
        if (key[0] > key[1]) std::swap(key[0], key[1]);
        edge_tris[key].push_back(e);
        neighbors[el[k]].insert(el[(k + 1) % 3]);
        neighbors[el[(k + 1) % 3]].insert(el[k]);
      }
    }
    std::set<int> frozen;  // vertices already touched this pass
    std::vector<int> remap(s.vertex_count());
    std::iota(remap.begin(), remap.end(), 0);
    int alive = s.vertex_count();
    bool any = false;
    for (const auto& [key, tris] : edge_tris) {
      if (alive <= cfg.min_vertices) break;
      if (tris.size() != 2) continue;
      const int u = key[0], v = key[1];
      if (frozen.count(u) || frozen.count(v)) continue;
      const double len = (s.vertices[v] - s.vertices[u]).norm();
      if (len >= cfg.collapse_ratio * cfg.target_edge_length) continue;
      // manifold link condition: the endpoints share exactly two neighbors
      std::vector<int> common;
      for (int n : neighbors[u])
        if (neighbors[v].count(n)) common.push_back(n);
      if (common.size() != 2) continue;
      s.vertices[u] = 0.5 * (s.vertices[u] + s.vertices[v]);
      remap[v] = u;
      frozen.insert(u);
      frozen.insert(v);
      for (int n : common) frozen.insert(n);
      --alive;
      ++out.collapses;
      any = true;
    }
    if (any) {
      std::vector<std::array<int, 3>> kept;
      for (const auto& el : s.elements) {
        std::array<int, 3> mapped{remap[el[0]], remap[el[1]], remap[el[2]]};
        if (mapped[0] == mapped[1] || mapped[1] == mapped[2] || mapped[0] == mapped[2]) continue;
        kept.push_back(mapped);
      }
      s.elements = std::move(kept);
      // compact vertices
      std::vector<int> newid(s.vertex_count(), -1);
      std::vector<Vec3> verts;
      for (auto& el : s.elements) {
        for (auto& v : el) {
          if (newid[v] < 0) {
            newid[v] = static_cast<int>(verts.size());
            verts.push_back(s.vertices[v]);
          }
          v = newid[v];
        }
      }
      s.vertices = std::move(verts);
    }
  }

  if (out.changed()) tangential_relax(s, cfg.relax_iterations, cfg.relax_weight);
  return out;
}

}  // namespace detail

template <int N>
RemeshOutcome remesh(Hypersurface<N>& s, const RemeshConfig& cfg) {
  if (cfg.target_edge_length <= 0) return {};
  if constexpr (N == 2)
    return detail::remesh_polygon(s, cfg);
  else
    return detail::remesh_triangles(s, cfg);
}

}  // namespace mcflab::remesh
