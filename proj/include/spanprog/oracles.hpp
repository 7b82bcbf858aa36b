#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "spanprog/graph.hpp"

namespace spanprog {

// Brute-force ground truth. Everything here is exponential and gated by size
// limits; it exists to check the span-program machinery, not to be fast.

struct SizeLimits {
  int max_host = 12;
  int max_pattern = 8;
};

// ---------------------------------------------------------------------------
// Connectivity and effective resistance.
// ---------------------------------------------------------------------------

inline bool is_connected(const SimpleGraph& g, int s, int t) {
  int n = g.num_vertices();
  if (s < 0 || t < 0 || s >= n || t >= n)
    throw std::invalid_argument("vertex out of range");
  if (s == t) return true;
  std::vector<uint8_t> seen(n, 0);
  std::queue<int> q;
  q.push(s);
  seen[s] = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : g.neighbors(u)) {
      if (!seen[v]) {
        if (v == t) return true;
        seen[v] = 1;
        q.push(v);
      }
    }
  }
  return false;
}

inline std::vector<int> component_labels(const SimpleGraph& g) {
  int n = g.num_vertices();
  std::vector<int> comp(n, -1);
  int c = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = c;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : g.neighbors(u)) {
        if (comp[v] < 0) {
          comp[v] = c;
          q.push(v);
        }
      }
    }
    ++c;
  }
  return comp;
}

// Unit resistor per edge; disconnected pairs report no value (never a
// floating-point sentinel).
inline std::optional<double> effective_resistance(const SimpleGraph& g, int s,
                                                  int t) {
  int n = g.num_vertices();
  if (s < 0 || t < 0 || s >= n || t >= n)
    throw std::invalid_argument("vertex out of range");
  if (s == t) throw std::invalid_argument("effective_resistance needs s != t");
  if (!is_connected(g, s, t)) return std::nullopt;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [u, v] : g.edges()) {
    lap(u, u) += 1;
    lap(v, v) += 1;
    lap(u, v) -= 1;
    lap(v, u) -= 1;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  double cutoff = 1e-12 * vals.cwiseAbs().maxCoeff();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(t) = 1;
  b(s) = -1;
  double r = 0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(vals(i)) <= cutoff) continue;
    double c = vecs.col(i).dot(b);
    r += c * c / vals(i);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Subgraph containment (injective homomorphism) by backtracking.
// ---------------------------------------------------------------------------

namespace detail {

inline bool subgraph_search(const SimpleGraph& host, const SimpleGraph& pattern,
                            const std::vector<int>& order, size_t pos,
                            std::vector<int>& image, std::vector<uint8_t>& used) {
  if (pos == order.size()) return true;
  int pv = order[pos];
  for (int hv = 0; hv < host.num_vertices(); ++hv) {
    if (used[hv]) continue;
    bool ok = true;
    for (size_t j = 0; j < pos && ok; ++j) {
      int pu = order[j];
      if (pattern.has_edge(pv, pu) && !host.has_edge(hv, image[pu])) ok = false;
    }
    if (!ok) continue;
    image[pv] = hv;
    used[hv] = 1;
    if (subgraph_search(host, pattern, order, pos + 1, image, used)) return true;
    used[hv] = 0;
  }
  return false;
}

// Pattern vertices ordered so each new vertex (after the first in its
// component) touches an already-placed one; high degree first.
inline std::vector<int> pattern_order(const SimpleGraph& pattern) {
  int p = pattern.num_vertices();
  std::vector<int> order;
  std::vector<uint8_t> placed(p, 0);
  while (static_cast<int>(order.size()) < p) {
    int best = -1, best_score = -1;
    for (int v = 0; v < p; ++v) {
      if (placed[v]) continue;
      int attached = 0;
      for (int u : pattern.neighbors(v))
        if (placed[u]) attached = 1;
      int score = attached * 1000 + pattern.degree(v);
      if (score > best_score) {
        best_score = score;
        best = v;
      }
    }
    placed[best] = 1;
    order.push_back(best);
  }
  return order;
}

}  // namespace detail

inline bool contains_subgraph(const SimpleGraph& host,
                              const SimpleGraph& pattern,
                              const SizeLimits& limits = {}) {
  if (pattern.num_vertices() > host.num_vertices()) return false;
  if (pattern.num_edges() > host.num_edges()) return false;
  if (pattern.num_vertices() > limits.max_pattern ||
      host.num_vertices() > limits.max_host)
    throw std::invalid_argument("contains_subgraph: size limit exceeded");
  auto order = detail::pattern_order(pattern);
  std::vector<int> image(pattern.num_vertices(), -1);
  std::vector<uint8_t> used(host.num_vertices(), 0);
  return detail::subgraph_search(host, pattern, order, 0, image, used);
}

// ---------------------------------------------------------------------------
// Minor containment via branch sets.
// ---------------------------------------------------------------------------

// Branch sets: one nonempty connected host-vertex subset per pattern vertex,
// pairwise disjoint, with a host edge between V_x and V_y for every pattern
// edge (x, y).
struct BranchDecomposition {
  std::vector<std::vector<int>> branch_sets;  // indexed by pattern vertex
};

namespace detail {

inline bool mask_connected(const SimpleGraph& g, uint32_t mask) {
  if (mask == 0) return false;
  int start = 0;
  while (!((mask >> start) & 1)) ++start;
  uint32_t seen = 1u << start;
  uint32_t frontier = seen;
  while (frontier) {
    uint32_t next = 0;
    for (int u = 0; u < g.num_vertices(); ++u) {
      if (!((frontier >> u) & 1)) continue;
      for (int v : g.neighbors(u)) next |= 1u << v;
    }
    next &= mask & ~seen;
    seen |= next;
    frontier = next;
  }
  return seen == mask;
}

inline bool masks_adjacent(const SimpleGraph& g, uint32_t a, uint32_t b) {
  for (const auto& [u, v] : g.edges()) {
    uint32_t mu = 1u << u, mv = 1u << v;
    if (((a & mu) && (b & mv)) || ((a & mv) && (b & mu))) return true;
  }
  return false;
}

inline bool minor_search(const SimpleGraph& host, const SimpleGraph& pattern,
                         const std::vector<uint32_t>& connected_masks,
                         const std::vector<int>& order, size_t pos,
                         uint32_t used, std::vector<uint32_t>& chosen,
                         std::vector<std::vector<int>>* out) {
  int h = host.num_vertices();
  if (pos == order.size()) {
    if (out) {
      out->assign(pattern.num_vertices(), {});
      for (size_t i = 0; i < order.size(); ++i)
        for (int v = 0; v < h; ++v)
          if ((chosen[order[i]] >> v) & 1) (*out)[order[i]].push_back(v);
    }
    return true;
  }
  int remaining = static_cast<int>(order.size() - pos);
  int pv = order[pos];
  for (uint32_t mask : connected_masks) {
    if (mask & used) continue;
    int free_after = h - __builtin_popcount(used | mask);
    if (free_after < remaining - 1) continue;
    bool ok = true;
    for (size_t j = 0; j < pos && ok; ++j) {
      int pu = order[j];
      if (pattern.has_edge(pv, pu) &&
          !masks_adjacent(host, mask, chosen[pu]))
        ok = false;
    }
    if (!ok) continue;
    chosen[pv] = mask;
    if (minor_search(host, pattern, connected_masks, order, pos + 1,
                     used | mask, chosen, out))
      return true;
  }
  chosen[pv] = 0;
  return false;
}

}  // namespace detail

inline std::optional<BranchDecomposition> find_minor(
    const SimpleGraph& host, const SimpleGraph& pattern,
    const SizeLimits& limits = {}) {
  if (pattern.num_vertices() > host.num_vertices()) return std::nullopt;
  if (pattern.num_edges() > host.num_edges()) return std::nullopt;
  if (pattern.num_vertices() > limits.max_pattern ||
      host.num_vertices() > limits.max_host)
    throw std::invalid_argument("contains_minor: size limit exceeded");
  if (host.num_vertices() > 31)
    throw std::invalid_argument("contains_minor: host too large for bitmask search");
  int h = host.num_vertices();
  std::vector<uint32_t> connected_masks;
  for (uint32_t m = 1; m < (1u << h); ++m)
    if (detail::mask_connected(host, m)) connected_masks.push_back(m);
  // Smaller sets first keeps early levels cheap.
  std::stable_sort(connected_masks.begin(), connected_masks.end(),
                   [](uint32_t a, uint32_t b) {
                     return __builtin_popcount(a) < __builtin_popcount(b);
                   });
  auto order = detail::pattern_order(pattern);
  std::vector<uint32_t> chosen(pattern.num_vertices(), 0);
  std::vector<std::vector<int>> sets;
  if (detail::minor_search(host, pattern, connected_masks, order, 0, 0, chosen,
                           &sets))
    return BranchDecomposition{sets};
  return std::nullopt;
}

inline bool contains_minor(const SimpleGraph& host, const SimpleGraph& pattern,
                           const SizeLimits& limits = {}) {
  return find_minor(host, pattern, limits).has_value();
}

inline bool verify_branch_decomposition(const SimpleGraph& host,
                                        const SimpleGraph& pattern,
                                        const BranchDecomposition& bd) {
  if (bd.branch_sets.size() != static_cast<size_t>(pattern.num_vertices()))
    return false;
  std::vector<int> owner(host.num_vertices(), -1);
  for (size_t x = 0; x < bd.branch_sets.size(); ++x) {
    if (bd.branch_sets[x].empty()) return false;
    uint32_t mask = 0;
    for (int v : bd.branch_sets[x]) {
      if (v < 0 || v >= host.num_vertices() || owner[v] >= 0) return false;
      owner[v] = static_cast<int>(x);
      mask |= 1u << v;
    }
    if (!detail::mask_connected(host, mask)) return false;
  }
  for (const auto& [x, y] : pattern.edges()) {
    bool found = false;
    for (int u : bd.branch_sets[x]) {
      for (int v : bd.branch_sets[y])
        if (host.has_edge(u, v)) {
          found = true;
          break;
        }
      if (found) break;
    }
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Correctly colored subgraph: injection i from pattern vertices into host with
// c(i(v)) = v and every pattern edge mapped to a host edge.
// ---------------------------------------------------------------------------

inline bool has_correctly_colored_subgraph(const SimpleGraph& host,
                                           const Coloring& c,
                                           const SimpleGraph& pattern) {
  if (c.num_labels != pattern.num_vertices())
    throw std::invalid_argument("coloring labels must be the pattern vertices");
  if (c.assign.size() != static_cast<size_t>(host.num_vertices()))
    throw std::invalid_argument("coloring must cover the host");
  int p = pattern.num_vertices();
  std::vector<std::vector<int>> classes(p);
  for (int v = 0; v < host.num_vertices(); ++v) classes[c.assign[v]].push_back(v);
  std::vector<int> image(p, -1);
  // Distinct pattern vertices draw from distinct color classes, so the map is
  // automatically injective.
  std::vector<int> order = detail::pattern_order(pattern);
  std::function<bool(size_t)> rec = [&](size_t pos) -> bool {
    if (pos == order.size()) return true;
    int pv = order[pos];
    for (int hv : classes[pv]) {
      bool ok = true;
      for (size_t j = 0; j < pos && ok; ++j) {
        int pu = order[j];
        if (pattern.has_edge(pv, pu) && !host.has_edge(hv, image[pu])) ok = false;
      }
      if (!ok) continue;
      image[pv] = hv;
      if (rec(pos + 1)) return true;
    }
    return false;
  };
  return rec(0);
}

}  // namespace spanprog
