#pragma once

#include <array>
#include <map>
#include <queue>
#include <set>
#include <string>

#include "spanprog/graph.hpp"
#include "spanprog/oracles.hpp"
#include "spanprog/span_program.hpp"

namespace spanprog {

// ---------------------------------------------------------------------------
// st-connectivity.
// ---------------------------------------------------------------------------

inline int pair_count(int n) { return n * (n - 1) / 2; }

// Lexicographic index of the unordered pair {u,v} among the C(n,2) pairs.
inline int pair_index(int n, int u, int v) {
  if (u == v || u < 0 || v < 0 || u >= n || v >= n)
    throw std::invalid_argument("bad vertex pair");
  if (u > v) std::swap(u, v);
  return u * (2 * n - u - 1) / 2 + (v - u - 1);
}

// One bit per vertex pair (lexicographic order): the edge-indicator input.
inline Assignment edge_assignment(const SimpleGraph& g) {
  int n = g.num_vertices();
  Assignment x;
  x.bits.reserve(pair_count(n));
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      x.bits.push_back(g.has_edge(u, v) ? 1 : 0);
  return x;
}

struct StConnInstance {
  SpanProgram program;
  int n = 0;
  int s = 0, t = 0;

  int var_of_pair(int u, int v) const { return pair_index(n, u, v); }
};

// Target e_t - e_s; vector e_u - e_v per vertex pair, available when the
// edge is present.
inline StConnInstance stconn_program(int n, int s, int t) {
  if (s == t) throw std::invalid_argument("stconn needs s != t");
  if (s < 0 || t < 0 || s >= n || t >= n)
    throw std::invalid_argument("vertex out of range");
  StConnInstance inst;
  inst.n = n;
  inst.s = s;
  inst.t = t;
  inst.program.dim = n;
  inst.program.nvars = pair_count(n);
  inst.program.target = Eigen::VectorXd::Zero(n);
  inst.program.target(t) = 1;
  inst.program.target(s) = -1;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      Eigen::VectorXd vec = Eigen::VectorXd::Zero(n);
      vec(u) = 1;
      vec(v) = -1;
      inst.program.inputs.push_back({vec, pair_index(n, u, v), 1});
    }
  return inst;
}

// ---------------------------------------------------------------------------
// Path detection by color coding.  Colors are 0..k, attached in
// ascending order along a candidate path.  H lives on n+2 vertices with s = n and t = n+1.
// ---------------------------------------------------------------------------

struct PathInstance {
  StConnInstance stconn;
  Assignment x;      // edge indicator of H
  SimpleGraph h;     // the realized graph H
};

inline PathInstance path_instance(const SimpleGraph& g, int k,
                                  const Coloring& c) {
  if (k < 1) throw std::invalid_argument("path length must be >= 1");
  if (c.num_labels != k + 1)
    throw std::invalid_argument("coloring must use exactly k+1 labels");
  if (c.assign.size() != static_cast<size_t>(g.num_vertices()))
    throw std::invalid_argument("coloring must cover the graph");
  int n = g.num_vertices();
  int s = n, t = n + 1;
  std::vector<Edge> hedges;
  for (const auto& [u, v] : g.edges())
    if (std::abs(c.assign[u] - c.assign[v]) == 1)
      hedges.emplace_back(u, v);
  for (int u = 0; u < n; ++u) {
    if (c.assign[u] == 0) hedges.push_back(normalize_edge(u, s));
    if (c.assign[u] == k) hedges.push_back(normalize_edge(u, t));
  }
  PathInstance inst;
  inst.h = SimpleGraph(n + 2, hedges);
  inst.stconn = stconn_program(n + 2, s, t);
  inst.x = edge_assignment(inst.h);
  return inst;
}

// ---------------------------------------------------------------------------
// Subdivided-star span program (the breadcrumb construction).
// ---------------------------------------------------------------------------

struct StarPattern {
  std::vector<int> leg_lengths;

  StarPattern() = default;
  explicit StarPattern(std::vector<int> lens) : leg_lengths(std::move(lens)) {
    if (leg_lengths.empty())
      throw std::invalid_argument("star needs at least one leg");
    for (int l : leg_lengths)
      if (l < 1) throw std::invalid_argument("leg lengths must be positive");
  }

  int num_legs() const { return static_cast<int>(leg_lengths.size()); }
  int num_vertices() const {
    int n = 1;
    for (int l : leg_lengths) n += l;
    return n;
  }
  SimpleGraph graph() const { return subdivided_star(leg_lengths); }

  // Pattern labels follow the generator's numbering: root = 0, then leg j's
  // vertices in depth order.  label_of(j, i) is v_{j,i} with 1-based j, i.
  int label_of(int j, int i) const {
    int lab = 1;
    for (int jj = 1; jj < j; ++jj) lab += leg_lengths[jj - 1];
    return lab + (i - 1);
  }
  // inverse: label -> (j, i); the root returns (0, 0)
  std::pair<int, int> leg_depth(int label) const {
    if (label == 0) return {0, 0};
    int lab = 1;
    for (int j = 1; j <= num_legs(); ++j) {
      if (label < lab + leg_lengths[j - 1]) return {j, label - lab + 1};
      lab += leg_lengths[j - 1];
    }
    throw std::invalid_argument("label out of range");
  }
};

// H: basis vertices of the span program, with its edges classified.  Edges
// correspond to the available input vectors for a concrete input graph.
struct GadgetGraph {
  int num_vertices = 0;
  std::vector<std::string> labels;              // per H vertex
  std::vector<Edge> edges;                      // all H edges
  std::vector<int> free_edges;                  // indices into edges
  std::vector<std::pair<int, int>> paired_edges;  // pairs of indices into edges

  SimpleGraph graph() const { return SimpleGraph(num_vertices, edges); }
};

// Edge-list format plus "#paired" / "#free" sections (both read back as
// comments by the plain parser).
inline std::string serialize_gadget(const GadgetGraph& h) {
  std::ostringstream out;
  out << h.num_vertices << ' ' << h.edges.size() << '\n';
  for (const auto& [u, v] : h.edges) out << u << ' ' << v << '\n';
  out << "#free\n";
  for (int i : h.free_edges) out << "# " << i << '\n';
  out << "#paired\n";
  for (const auto& [a, b] : h.paired_edges) out << "# " << a << ' ' << b << '\n';
  return out.str();
}

struct StarInstance {
  StarPattern pattern;
  Coloring coloring;
  int n = 0;  // vertices of G
  SpanProgram program;
  GadgetGraph gadget;
  int s_index = 0, t_index = 1;
  // slot[u] = basis indices of u's copies: d+1 entries (b = 0..d) when u is
  // root-colored, else 2 entries (b = 0, 1)
  std::vector<std::vector<int>> slot;
};

// The exact program of the star construction: basis {s, t} + root copies
// (u, 0..d) + two copies (u, 0/1) of every other vertex; one boolean variable
// per vertex pair of G.
inline StarInstance star_program(const StarPattern& T, const Coloring& c,
                                 const SimpleGraph& g) {
  if (c.num_labels != T.num_vertices())
    throw std::invalid_argument("coloring labels must be the star's vertices");
  if (c.assign.size() != static_cast<size_t>(g.num_vertices()))
    throw std::invalid_argument("coloring must cover the graph");
  StarInstance inst;
  inst.pattern = T;
  inst.coloring = c;
  inst.n = g.num_vertices();
  int d = T.num_legs();

  // basis layout
  inst.gadget.labels = {"s", "t"};
  inst.slot.assign(inst.n, {});
  int next = 2;
  for (int u = 0; u < inst.n; ++u) {
    int copies = c.assign[u] == 0 ? d + 1 : 2;
    for (int b = 0; b < copies; ++b) {
      inst.slot[u].push_back(next++);
      inst.gadget.labels.push_back(std::to_string(u) + "," + std::to_string(b));
    }
  }
  int dim = next;
  inst.gadget.num_vertices = dim;

  auto unit = [dim](int i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v(i) = 1;
    return v;
  };
  SpanProgram& p = inst.program;
  p.dim = dim;
  p.nvars = pair_count(inst.n);
  p.target = unit(inst.t_index) - unit(inst.s_index);

  GadgetGraph& h = inst.gadget;
  auto add_edge = [&h](int a, int b) {
    h.edges.push_back(normalize_edge(a, b));
    return static_cast<int>(h.edges.size()) - 1;
  };

  // free vectors
  for (int u = 0; u < inst.n; ++u) {
    if (c.assign[u] == 0) {
      p.free_vectors.push_back(unit(inst.slot[u][0]) - unit(inst.s_index));
      h.free_edges.push_back(add_edge(inst.s_index, inst.slot[u][0]));
      p.free_vectors.push_back(unit(inst.t_index) - unit(inst.slot[u][d]));
      h.free_edges.push_back(add_edge(inst.slot[u][d], inst.t_index));
    } else {
      auto [j, i] = T.leg_depth(c.assign[u]);
      if (i == T.leg_lengths[j - 1]) {  // leg tip: free turnaround edge
        p.free_vectors.push_back(unit(inst.slot[u][1]) - unit(inst.slot[u][0]));
        h.free_edges.push_back(add_edge(inst.slot[u][0], inst.slot[u][1]));
      }
    }
  }

  // input vectors, one or two per correctly colored candidate edge of G
  for (int u = 0; u < inst.n; ++u) {
    for (int v = u + 1; v < inst.n; ++v) {
      int cu = c.assign[u], cv = c.assign[v];
      if (cu == cv) continue;
      int var = pair_index(inst.n, u, v);
      bool avail = g.has_edge(u, v);
      // orient: root-to-leg or consecutive depths on one leg
      int root = -1, leaf = -1;
      if (cu == 0 && T.leg_depth(cv).second == 1) root = u, leaf = v;
      if (cv == 0 && T.leg_depth(cu).second == 1) root = v, leaf = u;
      if (root >= 0) {
        int j = T.leg_depth(c.assign[leaf]).first;
        // four-term breadcrumb vector: out along (root,j-1)->(leaf,0) and
        // back along (leaf,1)->(root,j)
        Eigen::VectorXd vec = unit(inst.slot[leaf][0]) -
                              unit(inst.slot[root][j - 1]) +
                              unit(inst.slot[root][j]) -
                              unit(inst.slot[leaf][1]);
        p.inputs.push_back({vec, var, 1});
        if (avail) {
          int e1 = add_edge(inst.slot[root][j - 1], inst.slot[leaf][0]);
          int e2 = add_edge(inst.slot[leaf][1], inst.slot[root][j]);
          h.paired_edges.emplace_back(e1, e2);
        }
        continue;
      }
      if (cu == 0 || cv == 0) continue;
      auto [ju, iu] = T.leg_depth(cu);
      auto [jv, iv] = T.leg_depth(cv);
      if (ju != jv || std::abs(iu - iv) != 1) continue;
      int lo = iu < iv ? u : v;  // smaller depth
      int hi = iu < iv ? v : u;
      p.inputs.push_back(
          {unit(inst.slot[hi][0]) - unit(inst.slot[lo][0]), var, 1});
      p.inputs.push_back(
          {unit(inst.slot[lo][1]) - unit(inst.slot[hi][1]), var, 1});
      if (avail) {
        add_edge(inst.slot[lo][0], inst.slot[hi][0]);
        add_edge(inst.slot[hi][1], inst.slot[lo][1]);
      }
    }
  }
  return inst;
}

// The H' surgery of the negative case: per leg j, add shortcut edges
// ((u,j-1),(u,j)) where (u,j-1) reaches R_j through H_j, and delete the H_j
// vertices that reach both R_{j-1} and R_j through H_j.  Both rules are
// decided against the original H, then applied at once.  Returns the
// component-indicator witness if s,t end up disconnected, otherwise nullopt.
inline std::optional<NegativeWitness> star_hprime_witness(
    const StarInstance& inst) {
  const StarPattern& T = inst.pattern;
  int d = T.num_legs();
  int dim = inst.program.dim;
  SimpleGraph hgraph = inst.gadget.graph();

  // color (pattern label) of each basis vertex; -1 for s, t
  std::vector<int> color(dim, -1);
  std::vector<int> bcoord(dim, -1);
  for (int u = 0; u < inst.n; ++u)
    for (size_t b = 0; b < inst.slot[u].size(); ++b) {
      color[inst.slot[u][b]] = inst.coloring.assign[u];
      bcoord[inst.slot[u][b]] = static_cast<int>(b);
    }

  // For each leg j: the set of H_j vertices that reach R_j (resp. R_{j-1})
  // via paths internal to H_j.
  auto reaches = [&](int j, int rb) {
    // rb is the b-coordinate of the target root copies R_rb
    std::vector<uint8_t> in_hj(dim, 0);
    for (int v = 0; v < dim; ++v)
      if (color[v] > 0 && T.leg_depth(color[v]).first == j) in_hj[v] = 1;
    std::vector<uint8_t> hit(dim, 0);
    std::queue<int> q;
    for (int v = 0; v < dim; ++v) {
      if (!in_hj[v]) continue;
      for (int w : hgraph.neighbors(v))
        if (color[w] == 0 && bcoord[w] == rb) {
          hit[v] = 1;
          q.push(v);
          break;
        }
    }
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int w : hgraph.neighbors(v))
        if (in_hj[w] && !hit[w]) {
          hit[w] = 1;
          q.push(w);
        }
    }
    return hit;
  };

  std::vector<Edge> new_edges;
  std::vector<uint8_t> removed(dim, 0);
  for (int j = 1; j <= d; ++j) {
    auto to_rj = reaches(j, j);
    auto to_rjm1 = reaches(j, j - 1);
    for (int u = 0; u < inst.n; ++u) {
      if (inst.coloring.assign[u] != 0) continue;
      int a = inst.slot[u][j - 1];
      bool connected = false;
      for (int w : hgraph.neighbors(a)) {
        if (to_rj[w]) connected = true;
        if (color[w] == 0 && bcoord[w] == j) connected = true;  // direct hop
      }
      if (connected) new_edges.push_back(normalize_edge(a, inst.slot[u][j]));
    }
    for (int v = 0; v < dim; ++v)
      if (to_rj[v] && to_rjm1[v]) removed[v] = 1;
  }

  std::vector<Edge> hp_edges;
  for (const auto& [a, b] : hgraph.edges())
    if (!removed[a] && !removed[b]) hp_edges.emplace_back(a, b);
  for (const auto& e : new_edges) hp_edges.push_back(e);
  SimpleGraph hprime(dim, hp_edges);

  // component of s in H'
  std::vector<uint8_t> reach(dim, 0);
  std::queue<int> q;
  reach[inst.s_index] = 1;
  q.push(inst.s_index);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : hprime.neighbors(v))
      if (!removed[w] && !reach[w]) {
        reach[w] = 1;
        q.push(w);
      }
  }
  if (reach[inst.t_index]) return std::nullopt;

  // indicator pairs with s - t; negate so <w', e_t - e_s> = 1
  NegativeWitness nw;
  nw.wprime = Eigen::VectorXd::Zero(dim);
  for (int v = 0; v < dim; ++v)
    if (reach[v] && !removed[v]) nw.wprime(v) = -1;
  double size = 0;
  for (const auto& iv : inst.program.inputs) {
    double ip = iv.vec.dot(nw.wprime);
    size += ip * ip;
  }
  nw.size = size;
  return nw;
}

inline std::optional<NegativeWitness> star_hprime_witness(
    const StarPattern& T, const Coloring& c, const SimpleGraph& g) {
  return star_hprime_witness(star_program(T, c, g));
}

// One star program per forest component: the shared coloring uses the
// union's label set, and each component's program runs on G restricted to
// its own colors.
struct StarForestPiece {
  StarInstance instance;
  SimpleGraph sub;
};

inline std::vector<StarForestPiece> star_forest_split(
    const std::vector<StarPattern>& components, const SimpleGraph& g,
    const Coloring& c) {
  int total_labels = 0;
  for (const auto& T : components) total_labels += T.num_vertices();
  if (c.num_labels != total_labels)
    throw std::invalid_argument("coloring labels must cover all components");
  if (c.assign.size() != static_cast<size_t>(g.num_vertices()))
    throw std::invalid_argument("coloring must cover the graph");
  std::vector<StarForestPiece> pieces;
  int offset = 0;
  for (const auto& T : components) {
    int span = T.num_vertices();
    // induced subgraph on the vertices colored by this component
    std::vector<int> keep, back(g.num_vertices(), -1);
    for (int v = 0; v < g.num_vertices(); ++v)
      if (c.assign[v] >= offset && c.assign[v] < offset + span) {
        back[v] = static_cast<int>(keep.size());
        keep.push_back(v);
      }
    std::vector<Edge> edges;
    for (const auto& [u, v] : g.edges())
      if (back[u] >= 0 && back[v] >= 0)
        edges.push_back(normalize_edge(back[u], back[v]));
    SimpleGraph sub(static_cast<int>(keep.size()), edges);
    Coloring cc;
    cc.num_labels = span;
    for (int v : keep) cc.assign.push_back(c.assign[v] - offset);
    pieces.push_back({star_program(T, cc, sub), std::move(sub)});
    offset += span;
  }
  return pieces;
}

// Vertex-disjoint unions of stars: all component programs must accept.
inline bool star_forest_detect(const std::vector<StarPattern>& components,
                               const SimpleGraph& g, uint64_t seed) {
  if (components.empty()) return true;
  int total_labels = 0;
  for (const auto& T : components) total_labels += T.num_vertices();
  Coloring c = random_coloring(g, total_labels, seed);
  for (const auto& piece : star_forest_split(components, g, c))
    if (!evaluate(piece.instance.program, edge_assignment(piece.sub)))
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// Triangle span program.
// ---------------------------------------------------------------------------

struct TriangleInstance {
  Coloring coloring;
  int n = 0;
  SpanProgram program;
  int s_index = 0, t_index = 1;
  std::vector<int> slot_main;   // (u, c(u)) for every vertex
  std::vector<int> slot_three;  // (u, 3) for color-0 vertices, else -1
};

// Basis {s, t} + (u, c(u)) + (u, 3) for color-0 u.  Free vectors
// e_t - e_s + e_{u,0} - e_{u,3}; inputs e_{u',j+1} - e_{u,j} around the color
// cycle, with j+1 = 3 (not 0) when wrapping.
inline TriangleInstance triangle_program(const Coloring& c,
                                         const SimpleGraph& g) {
  if (c.num_labels != 3)
    throw std::invalid_argument("triangle coloring uses labels {0,1,2}");
  if (c.assign.size() != static_cast<size_t>(g.num_vertices()))
    throw std::invalid_argument("coloring must cover the graph");
  TriangleInstance inst;
  inst.coloring = c;
  inst.n = g.num_vertices();
  inst.slot_main.resize(inst.n);
  inst.slot_three.assign(inst.n, -1);
  int next = 2;
  for (int u = 0; u < inst.n; ++u) inst.slot_main[u] = next++;
  for (int u = 0; u < inst.n; ++u)
    if (c.assign[u] == 0) inst.slot_three[u] = next++;
  int dim = next;
  auto unit = [dim](int i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v(i) = 1;
    return v;
  };
  SpanProgram& p = inst.program;
  p.dim = dim;
  p.nvars = pair_count(inst.n);
  p.target = unit(inst.t_index) - unit(inst.s_index);
  for (int u = 0; u < inst.n; ++u)
    if (c.assign[u] == 0)
      p.free_vectors.push_back(p.target + unit(inst.slot_main[u]) -
                               unit(inst.slot_three[u]));
  for (int u = 0; u < inst.n; ++u)
    for (int v = u + 1; v < inst.n; ++v) {
      int cu = c.assign[u], cv = c.assign[v];
      if (cu == cv) continue;
      // orient from color j to color j+1 mod 3
      int from = -1, to = -1;
      if ((cu + 1) % 3 == cv) from = u, to = v;
      if ((cv + 1) % 3 == cu) from = v, to = u;
      if (from < 0) continue;  // unreachable for 3 labels, kept for clarity
      int to_slot = c.assign[from] == 2 ? inst.slot_three[to]
                                        : inst.slot_main[to];
      p.inputs.push_back({unit(to_slot) - unit(inst.slot_main[from]),
                          pair_index(inst.n, u, v), 1});
    }
  return inst;
}

struct TriangleWitnessDetail {
  NegativeWitness witness;
  std::vector<int> level_main;   // per vertex, coefficient at (u, c(u))
  std::vector<int> level_three;  // per color-0 vertex, coefficient at (u, 3)
  std::vector<int> depth;        // depth d(u) in H
};

// Level-function negative witness for forests.  Roots: minimum-index vertex
// per G-component; H-components rooted at least G-depth (ties by index); the
// color-0 split vertex starts at its (u, 0) copy.
inline TriangleWitnessDetail triangle_negative_witness(const Coloring& c,
                                                       const SimpleGraph& g) {
  int n = g.num_vertices();
  // must be a forest
  {
    std::vector<int> comp = component_labels(g);
    int ncomp = 0;
    for (int v = 0; v < n; ++v) ncomp = std::max(ncomp, comp[v] + 1);
    if (g.num_edges() != n - ncomp)
      throw std::invalid_argument("input graph has a cycle");
  }
  auto inst = triangle_program(c, g);

  // depths in G from per-component minimum-index roots
  std::vector<int> gdepth(n, -1);
  for (int v = 0; v < n; ++v) {
    if (gdepth[v] >= 0) continue;
    // v is the least-index vertex of an unvisited component
    std::queue<int> q;
    gdepth[v] = 0;
    q.push(v);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int w : g.neighbors(u))
        if (gdepth[w] < 0) {
          gdepth[w] = gdepth[u] + 1;
          q.push(w);
        }
    }
  }

  // H: drop monochromatic edges
  std::vector<Edge> hedges;
  for (const auto& [u, v] : g.edges())
    if (c.assign[u] != c.assign[v]) hedges.emplace_back(u, v);
  SimpleGraph h(n, hedges);

  // H' on 2 coordinates per color-0 vertex: node ids (u, lo=0) and (u, hi=1)
  // where lo carries edges to color-1 neighbors and hi to color-2 neighbors.
  auto hp_id = [&](int u, int three) {
    return 2 * u + (three ? 1 : 0);
  };
  std::vector<std::vector<int>> hp_adj(2 * n);
  auto hp_link = [&](int a, int b) {
    hp_adj[a].push_back(b);
    hp_adj[b].push_back(a);
  };
  for (const auto& [u, v] : h.edges()) {
    int cu = c.assign[u], cv = c.assign[v];
    int a = hp_id(u, cu == 0 && cv == 2);
    int b = hp_id(v, cv == 0 && cu == 2);
    hp_link(a, b);
  }
  std::vector<uint8_t> is_new(2 * n, 0);
  for (int u = 0; u < n; ++u)
    if (c.assign[u] == 0) {
      hp_link(hp_id(u, 0), hp_id(u, 1));
      is_new[hp_id(u, 0)] = 1;  // the split edge (u,0)-(u,3) is "new"
    }

  // BFS each H-component from its root (least G-depth, ties by index),
  // propagating the level: crossing a split edge from (u,3) to (u,0) adds 1,
  // the reverse subtracts 1, ordinary edges keep the level.
  std::vector<int> hdepth(n, -1);
  std::vector<int> level(2 * n, 0);
  std::vector<uint8_t> seen(2 * n, 0);
  std::vector<int> hcomp = component_labels(h);
  int ncomp = 0;
  for (int v = 0; v < n; ++v) ncomp = std::max(ncomp, hcomp[v] + 1);
  std::vector<int> root(ncomp, -1);
  {
    // bfs H for depths per component root selection
    std::vector<int> order(n);
    for (int v = 0; v < n; ++v) order[v] = v;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (gdepth[a] != gdepth[b]) return gdepth[a] < gdepth[b];
      return a < b;
    });
    for (int v : order)
      if (root[hcomp[v]] < 0) root[hcomp[v]] = v;
  }
  for (int r = 0; r < ncomp; ++r) {
    int rv = root[r];
    int start = hp_id(rv, 0);  // color-0 roots start at their (u, 0) copy
    std::queue<int> q;
    seen[start] = 1;
    level[start] = 0;
    hdepth[rv] = 0;
    q.push(start);
    while (!q.empty()) {
      int a = q.front();
      q.pop();
      for (int b : hp_adj[a]) {
        if (seen[b]) continue;
        seen[b] = 1;
        int delta = 0;
        if ((a / 2) == (b / 2)) {
          // split edge: (u,3) -> (u,0) is +1, (u,0) -> (u,3) is -1
          delta = (b % 2 == 0) ? 1 : -1;
        } else if (hdepth[b / 2] < 0) {
          hdepth[b / 2] = hdepth[a / 2] + 1;
        }
        level[b] = level[a] + delta;
        q.push(b);
      }
    }
  }

  // assemble the witness; the indicator pairs with s - t, store negated
  Eigen::VectorXd w = Eigen::VectorXd::Zero(inst.program.dim);
  w(inst.s_index) = 1;
  for (int u = 0; u < n; ++u) {
    int three = c.assign[u] == 0 ? 1 : 0;
    w(inst.slot_main[u]) = level[hp_id(u, 0)];
    if (three) w(inst.slot_three[u]) = level[hp_id(u, 1)];
  }
  TriangleWitnessDetail out;
  out.witness.wprime = -w;
  double size = 0;
  for (const auto& iv : inst.program.inputs) {
    double ip = iv.vec.dot(out.witness.wprime);
    size += ip * ip;
  }
  out.witness.size = size;
  out.level_main.resize(n);
  out.level_three.assign(n, 0);
  out.depth.resize(n);
  for (int u = 0; u < n; ++u) {
    out.level_main[u] = level[hp_id(u, 0)];
    if (c.assign[u] == 0) out.level_three[u] = level[hp_id(u, 1)];
    out.depth[u] = hdepth[u];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Star with two subdivided legs (no breadcrumbs; hub splitting instead).
// ---------------------------------------------------------------------------

// T: path v_1..v_k, hub v_l carrying d extra length-1 legs w_1..w_d.
// Pattern labels: v_j -> j-1, w_i -> k+i-1.
struct TwoLegStarPattern {
  int k = 0, l = 0, d = 0;

  TwoLegStarPattern(int k_, int l_, int d_) : k(k_), l(l_), d(d_) {
    if (k < 3 || l < 2 || l > k - 1)
      throw std::invalid_argument("hub must be interior: 2 <= l <= k-1");
    if (d < 1) throw std::invalid_argument("need at least one short leg");
  }

  int num_vertices() const { return k + d; }
  SimpleGraph graph() const {
    std::vector<Edge> edges;
    for (int j = 0; j + 1 < k; ++j) edges.emplace_back(j, j + 1);
    for (int i = 0; i < d; ++i) edges.push_back(normalize_edge(l - 1, k + i));
    return SimpleGraph(k + d, edges);
  }
};

struct TwoLegStarInstance {
  TwoLegStarPattern pattern{3, 2, 1};
  Coloring coloring;
  int n = 0;
  SpanProgram program;  // over the H vertex space; one variable per G pair
  int s = 0, t = 1;
  int h_vertices = 0;
  std::vector<int> base_index;              // H index of unsplit vertices, else -1
  std::vector<std::vector<int>> hub_copies;  // u in c^-1(v_l): u_0..u_d
  std::map<std::pair<int, int>, int> w_copy;  // (mu, u) -> index of mu_u
  std::vector<Edge> h_free_edges;
  std::vector<std::pair<Edge, int>> h_input_edges;  // (H edge, G pair var)

  // the subgraph of H realized by a concrete input graph
  SimpleGraph realized_h(const SimpleGraph& g) const {
    Assignment x = edge_assignment(g);
    std::vector<Edge> edges = h_free_edges;
    for (const auto& [e, var] : h_input_edges)
      if (x.bits[var]) edges.push_back(e);
    return SimpleGraph(h_vertices, edges);
  }
};

inline TwoLegStarInstance two_leg_star_instance(const TwoLegStarPattern& T,
                                                const Coloring& c,
                                                const SimpleGraph& g) {
  if (c.num_labels != T.num_vertices())
    throw std::invalid_argument("coloring labels must be the pattern vertices");
  if (c.assign.size() != static_cast<size_t>(g.num_vertices()))
    throw std::invalid_argument("coloring must cover the graph");
  TwoLegStarInstance inst;
  inst.pattern = T;
  inst.coloring = c;
  inst.n = g.num_vertices();
  int k = T.k, l = T.l, d = T.d;
  int hub_label = l - 1;

  // H vertex layout: s = 0, t = 1, then per G vertex in index order: one
  // vertex for path colors other than the hub, 1+d hub copies for hub-colored
  // vertices; then the w-colored copies mu_u grouped by (mu, u).
  inst.base_index.assign(inst.n, -1);
  inst.hub_copies.assign(inst.n, {});
  int next = 2;
  for (int u = 0; u < inst.n; ++u) {
    int lab = c.assign[u];
    if (lab < k && lab != hub_label) {
      inst.base_index[u] = next++;
    } else if (lab == hub_label) {
      for (int b = 0; b <= d; ++b) inst.hub_copies[u].push_back(next++);
    }
  }
  for (int mu = 0; mu < inst.n; ++mu) {
    if (c.assign[mu] < k) continue;
    for (int u = 0; u < inst.n; ++u)
      if (c.assign[u] == hub_label) inst.w_copy[{mu, u}] = next++;
  }
  inst.h_vertices = next;

  // free edges to s and t
  for (int u = 0; u < inst.n; ++u) {
    if (c.assign[u] == 0 && inst.base_index[u] >= 0)
      inst.h_free_edges.push_back(normalize_edge(inst.s, inst.base_index[u]));
    if (c.assign[u] == k - 1 && inst.base_index[u] >= 0)
      inst.h_free_edges.push_back(normalize_edge(inst.base_index[u], inst.t));
  }
  // hub at an endpoint is excluded by 2 <= l <= k-1, so v_1 and v_k vertices
  // are always unsplit.

  // candidate H edges, labeled by the G pair variable
  for (int u = 0; u < inst.n; ++u)
    for (int v = u + 1; v < inst.n; ++v) {
      int cu = c.assign[u], cv = c.assign[v];
      int var = pair_index(inst.n, u, v);
      // consecutive path colors; the hub contributes its first copy when
      // entered from below and its last copy when left upward
      if (cu < k && cv < k && std::abs(cu - cv) == 1) {
        int lo = cu < cv ? u : v;  // smaller color
        int hi = cu < cv ? v : u;
        int ia, ib;
        if (c.assign[hi] == hub_label)
          ia = inst.base_index[lo], ib = inst.hub_copies[hi][0];
        else if (c.assign[lo] == hub_label)
          ia = inst.hub_copies[lo][d], ib = inst.base_index[hi];
        else
          ia = inst.base_index[lo], ib = inst.base_index[hi];
        inst.h_input_edges.push_back({normalize_edge(ia, ib), var});
        continue;
      }
      // hub-to-leg edges: two H edges per candidate pair
      int hub = -1, leg = -1;
      if (cu == hub_label && cv >= k) hub = u, leg = v;
      if (cv == hub_label && cu >= k) hub = v, leg = u;
      if (hub >= 0) {
        int i = c.assign[leg] - k;  // 0-based leg index, w_{i+1}
        int mu_u = inst.w_copy.at({leg, hub});
        inst.h_input_edges.push_back(
            {normalize_edge(inst.hub_copies[hub][i], mu_u), var});
        inst.h_input_edges.push_back(
            {normalize_edge(mu_u, inst.hub_copies[hub][i + 1]), var});
      }
    }

  // assemble the span program over the H space
  int dim = inst.h_vertices;
  auto unit = [dim](int i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v(i) = 1;
    return v;
  };
  SpanProgram& p = inst.program;
  p.dim = dim;
  p.nvars = pair_count(inst.n);
  p.target = unit(inst.t) - unit(inst.s);
  for (const auto& [a, b] : inst.h_free_edges)
    p.free_vectors.push_back(unit(b) - unit(a));
  for (const auto& [e, var] : inst.h_input_edges)
    p.inputs.push_back({unit(e.first) - unit(e.second), var, 1});
  return inst;
}

// ---------------------------------------------------------------------------
// The K5 skew-product counterexample.
// ---------------------------------------------------------------------------

// Edge marks in the order of complete_graph(5).edges():
// (0,1)(0,2)(0,3)(0,4)(1,2)(1,3)(1,4)(2,3)(2,4)(3,4).
// Frozen as the least bitstring whose product has no K5 minor.
inline const std::array<uint8_t, 10>& k5_skew_marks() {
  static const std::array<uint8_t, 10> marks = {0, 0, 0, 0, 0,
                                                0, 1, 1, 0, 0};
  return marks;
}

struct K5Report {
  bool k5_minor_absent = false;    // product contains no K5 minor
  bool edges_double_lifted = false;  // every K5 edge lifts to exactly 2 edges
  SimpleGraph product;
};

inline K5Report k5_counterexample_check() {
  auto base = k5_graph();
  const auto& marks = k5_skew_marks();
  MarkedGraph marked(base, {marks.begin(), marks.end()});
  K5Report rep;
  rep.product = skew_product(marked);
  rep.k5_minor_absent =
      !contains_minor(rep.product, base, SizeLimits{12, 8});
  rep.edges_double_lifted = true;
  for (const auto& [u, v] : base.edges()) {
    int lifts = 0;
    for (int i = 0; i < 2; ++i)
      for (int jj = 0; jj < 2; ++jj)
        if (rep.product.has_edge(u + 5 * i, v + 5 * jj)) ++lifts;
    if (lifts != 2) rep.edges_double_lifted = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Frozen illustration datasets (reconstructed instances).
// ---------------------------------------------------------------------------

struct StarDataset {
  StarPattern pattern;
  SimpleGraph g;
  Coloring coloring;
};

// A (1,3,1) star with an 8-vertex graph that contains the star as a subgraph
// but never with matching colors: the two root-colored vertices each miss one
// leg.  The program must reject.
inline StarDataset star_reject_dataset() {
  StarDataset ds{StarPattern({1, 3, 1}),
                 SimpleGraph(8, {{0, 2},
                                 {0, 3},
                                 {0, 4},
                                 {1, 4},
                                 {1, 7},
                                 {4, 5},
                                 {5, 6}}),
                 Coloring{6, {0, 0, 1, 1, 2, 3, 4, 5}}};
  return ds;
}

// A (2,2,2,2) star with a 15-vertex graph containing it only as a minor, not
// as a subgraph; the program still accepts (a documented false accept outside
// the promise).  Root-colored u, u', u'' at 0..2; y_j at 3..6 and yhat_j at
// 7..10, both colored v_{j,1}; depth-2 tails z_1, z_2 at 11, 12 (legs 1-2,
// hanging off y) and 13, 14 (legs 3-4, hanging off yhat).  u completes legs
// 1-2 through z and cancels legs 3-4 against u' at the z-less y_3, y_4; u''
// mirrors this on legs 3-4; u' only cancels.  No vertex has four disjoint
// legs (candidate tips collide), so T is a minor but not a subgraph.
inline StarDataset star_minor_accept_dataset() {
  std::vector<Edge> edges;
  for (int j = 0; j < 4; ++j) edges.push_back(normalize_edge(0, 3 + j));
  edges.push_back(normalize_edge(1, 5));
  edges.push_back(normalize_edge(1, 6));
  edges.push_back(normalize_edge(1, 7));
  edges.push_back(normalize_edge(1, 8));
  for (int j = 0; j < 4; ++j) edges.push_back(normalize_edge(2, 7 + j));
  edges.push_back(normalize_edge(3, 11));
  edges.push_back(normalize_edge(4, 12));
  edges.push_back(normalize_edge(9, 13));
  edges.push_back(normalize_edge(10, 14));
  Coloring c{9, {0, 0, 0, 1, 3, 5, 7, 1, 3, 5, 7, 2, 4, 6, 8}};
  return StarDataset{StarPattern({2, 2, 2, 2}), SimpleGraph(15, edges), c};
}

}  // namespace spanprog
