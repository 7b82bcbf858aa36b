#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spanprog {

// ---------------------------------------------------------------------------
// SimpleGraph: undirected simple graph on vertices 0..n-1.
// Immutable after construction; edges stored normalized (u < v) and sorted.
// ---------------------------------------------------------------------------

using Edge = std::pair<int, int>;

inline Edge normalize_edge(int u, int v) {
  return u < v ? Edge{u, v} : Edge{v, u};
}

class SimpleGraph {
 public:
  SimpleGraph() : n_(0) {}

  SimpleGraph(int n, std::vector<Edge> edges) : n_(n) {
    if (n < 0) throw std::invalid_argument("negative vertex count");
    for (auto& e : edges) e = normalize_edge(e.first, e.second);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (const auto& [u, v] : edges) {
      if (u == v) throw std::invalid_argument("self-loop");
      if (u < 0 || v >= n) throw std::invalid_argument("endpoint out of range");
    }
    edges_ = std::move(edges);
    adj_.assign(static_cast<size_t>(n) * n, 0);
    neighbors_.assign(n, {});
    for (const auto& [u, v] : edges_) {
      adj_[static_cast<size_t>(u) * n + v] = 1;
      adj_[static_cast<size_t>(v) * n + u] = 1;
      neighbors_[u].push_back(v);
      neighbors_[v].push_back(u);
    }
  }

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_edge(int u, int v) const {
    if (u < 0 || v < 0 || u >= n_ || v >= n_) return false;
    return adj_[static_cast<size_t>(u) * n_ + v] != 0;
  }

  const std::vector<int>& neighbors(int u) const { return neighbors_[u]; }

  int degree(int u) const { return static_cast<int>(neighbors_[u].size()); }

  bool operator==(const SimpleGraph& o) const {
    return n_ == o.n_ && edges_ == o.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<uint8_t> adj_;
  std::vector<std::vector<int>> neighbors_;
};

// ---------------------------------------------------------------------------
// Edge-list text format.
// First line "n m"; then m lines "u v", 0-based endpoints, u != v.
// Lines starting with '#' are comments.
// ---------------------------------------------------------------------------

enum class ParseErrorKind {
  MalformedLine,
  VertexOutOfRange,
  DuplicateEdge,
  SelfLoop,
};

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ParseErrorKind kind() const { return kind_; }

 private:
  ParseErrorKind kind_;
};

namespace detail {
inline bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string::npos) continue;
    if (line[i] == '#') continue;
    return true;
  }
  return false;
}
}  // namespace detail

inline SimpleGraph parse_edge_list(std::istream& in) {
  std::string line;
  if (!detail::next_content_line(in, line))
    throw ParseError(ParseErrorKind::MalformedLine, "missing header line");
  long long n, m;
  {
    std::istringstream ss(line);
    std::string extra;
    if (!(ss >> n >> m) || (ss >> extra))
      throw ParseError(ParseErrorKind::MalformedLine, "bad header: " + line);
  }
  if (n < 0 || m < 0)
    throw ParseError(ParseErrorKind::MalformedLine, "negative header counts");
  std::vector<Edge> edges;
  std::vector<uint8_t> seen(static_cast<size_t>(n) * n, 0);
  for (long long i = 0; i < m; ++i) {
    if (!detail::next_content_line(in, line))
      throw ParseError(ParseErrorKind::MalformedLine, "missing edge line");
    long long u, v;
    std::istringstream ss(line);
    std::string extra;
    if (!(ss >> u >> v) || (ss >> extra))
      throw ParseError(ParseErrorKind::MalformedLine, "bad edge line: " + line);
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw ParseError(ParseErrorKind::VertexOutOfRange,
                       "vertex out of range: " + line);
    if (u == v)
      throw ParseError(ParseErrorKind::SelfLoop, "self-loop: " + line);
    auto [a, b] = normalize_edge(static_cast<int>(u), static_cast<int>(v));
    if (seen[static_cast<size_t>(a) * n + b])
      throw ParseError(ParseErrorKind::DuplicateEdge, "duplicate edge: " + line);
    seen[static_cast<size_t>(a) * n + b] = 1;
    edges.emplace_back(a, b);
  }
  return SimpleGraph(static_cast<int>(n), std::move(edges));
}

inline SimpleGraph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  return parse_edge_list(in);
}

inline void serialize_edge_list(const SimpleGraph& g, std::ostream& out) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

inline std::string serialize_edge_list(const SimpleGraph& g) {
  std::ostringstream out;
  serialize_edge_list(g, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Named pattern generators with a fixed canonical vertex numbering.
// ---------------------------------------------------------------------------

inline SimpleGraph complete_graph(int n) {
  if (n <= 0) throw std::invalid_argument("complete: n must be positive");
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  return SimpleGraph(n, std::move(edges));
}

inline SimpleGraph complete_bipartite(int m, int n) {
  if (m <= 0 || n <= 0)
    throw std::invalid_argument("complete-bipartite: sizes must be positive");
  std::vector<Edge> edges;
  for (int u = 0; u < m; ++u)
    for (int v = 0; v < n; ++v) edges.emplace_back(u, m + v);
  return SimpleGraph(m + n, std::move(edges));
}

// path(k): k edges on vertices 0..k, numbered along the path.
inline SimpleGraph path_graph(int k) {
  if (k <= 0) throw std::invalid_argument("path: length must be positive");
  std::vector<Edge> edges;
  for (int i = 0; i < k; ++i) edges.emplace_back(i, i + 1);
  return SimpleGraph(k + 1, std::move(edges));
}

// Subdivided star with legs of lengths leg_lengths[0..d-1].
// Canonical numbering: root is 0; leg j occupies the next leg_lengths[j]
// vertices in depth order.
inline SimpleGraph subdivided_star(const std::vector<int>& leg_lengths) {
  if (leg_lengths.empty())
    throw std::invalid_argument("subdivided-star: need at least one leg");
  for (int l : leg_lengths)
    if (l <= 0) throw std::invalid_argument("subdivided-star: leg length must be positive");
  std::vector<Edge> edges;
  int next = 1;
  for (int l : leg_lengths) {
    int prev = 0;
    for (int i = 0; i < l; ++i) {
      edges.emplace_back(prev, next);
      prev = next++;
    }
  }
  return SimpleGraph(next, std::move(edges));
}

inline SimpleGraph triangle_graph() { return complete_graph(3); }
inline SimpleGraph k5_graph() { return complete_graph(5); }

// Descriptor strings for the CLI: "complete(n)", "complete-bipartite(m,n)",
// "path(k)", "subdivided-star(l1,...,ld)", "triangle", "K5".
inline SimpleGraph generate_named(const std::string& descriptor) {
  auto lp = descriptor.find('(');
  std::string kind = descriptor.substr(0, lp);
  std::vector<int> args;
  if (lp != std::string::npos) {
    auto rp = descriptor.rfind(')');
    if (rp == std::string::npos || rp < lp)
      throw std::invalid_argument("bad descriptor: " + descriptor);
    std::string inner = descriptor.substr(lp + 1, rp - lp - 1);
    std::istringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ','))
      args.push_back(std::stoi(tok));
  }
  if (kind == "complete" && args.size() == 1) return complete_graph(args[0]);
  if (kind == "complete-bipartite" && args.size() == 2)
    return complete_bipartite(args[0], args[1]);
  if (kind == "path" && args.size() == 1) return path_graph(args[0]);
  if (kind == "subdivided-star" && !args.empty()) return subdivided_star(args);
  if (kind == "triangle" && args.empty()) return triangle_graph();
  if ((kind == "K5" || kind == "k5") && args.empty()) return k5_graph();
  throw std::invalid_argument("unknown pattern descriptor: " + descriptor);
}

// ---------------------------------------------------------------------------
// MarkedGraph and the skew product with Z/2Z.
// ---------------------------------------------------------------------------

// Edge marks live in Z/2Z, aligned with base.edges() order.
struct MarkedGraph {
  SimpleGraph base;
  std::vector<uint8_t> marks;

  MarkedGraph(SimpleGraph g, std::vector<uint8_t> mk)
      : base(std::move(g)), marks(std::move(mk)) {
    if (marks.size() != static_cast<size_t>(base.num_edges()))
      throw std::invalid_argument("marks must cover exactly the edge set");
    for (uint8_t m : marks)
      if (m > 1) throw std::invalid_argument("marks must be 0 or 1");
  }
};

// Vertex (v, i) of the product maps to index v + i * n.
inline SimpleGraph skew_product(const MarkedGraph& t) {
  int n = t.base.num_vertices();
  std::vector<Edge> edges;
  for (size_t e = 0; e < t.base.edges().size(); ++e) {
    auto [u, v] = t.base.edges()[e];
    int s = t.marks[e];
    for (int i = 0; i < 2; ++i) {
      int a = u + i * n;
      int b = v + ((i + s) & 1) * n;
      edges.push_back(normalize_edge(a, b));
    }
  }
  return SimpleGraph(2 * n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Colorings.
// ---------------------------------------------------------------------------

// Labels are 0..num_labels-1; the meaning of a label is fixed by the pattern
// at hand (see constructors.hpp for the star/triangle conventions).
struct Coloring {
  int num_labels = 0;
  std::vector<int> assign;  // one label per vertex of G

  int label_of(int v) const { return assign[v]; }
};

namespace detail {
// Deterministic bounded uniform draw (rejection sampling on mt19937_64
// output) so colorings are byte-stable across platforms.
inline uint64_t uniform_below(std::mt19937_64& rng, uint64_t bound) {
  uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}

// splitmix64; used to derive per-trial seeds from a master seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed + index * 0x9e3779b97f4a7c15ULL + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Each vertex gets an independent uniform label, driven by mt19937_64(seed).
inline Coloring random_coloring(const SimpleGraph& g, int num_labels,
                                uint64_t seed) {
  if (num_labels <= 0) throw std::invalid_argument("empty label set");
  Coloring c;
  c.num_labels = num_labels;
  c.assign.resize(g.num_vertices());
  std::mt19937_64 rng(seed);
  for (int v = 0; v < g.num_vertices(); ++v)
    c.assign[v] = static_cast<int>(
        detail::uniform_below(rng, static_cast<uint64_t>(num_labels)));
  return c;
}

// Coloring file: one ASCII integer label per line, line i = label of vertex i.
inline Coloring parse_coloring(std::istream& in, int num_labels) {
  Coloring c;
  c.num_labels = num_labels;
  std::string line;
  while (detail::next_content_line(in, line)) {
    std::istringstream ss(line);
    int lab;
    std::string extra;
    if (!(ss >> lab) || (ss >> extra))
      throw ParseError(ParseErrorKind::MalformedLine, "bad coloring line: " + line);
    if (lab < 0 || lab >= num_labels)
      throw ParseError(ParseErrorKind::VertexOutOfRange,
                       "label out of range: " + line);
    c.assign.push_back(lab);
  }
  return c;
}

// ---------------------------------------------------------------------------
// GF(2^m) and the k-wise independent hash family h(a) = low bits of p(a),
// p a degree-(k-1) polynomial over GF(2^m).
// ---------------------------------------------------------------------------

namespace gf2 {

// Carry-less product of two polynomials over GF(2).
inline uint64_t clmul(uint32_t a, uint32_t b) {
  uint64_t r = 0;
  while (b) {
    if (b & 1) r ^= a;
    a <<= 1;
    b >>= 1;
  }
  return r;
}

inline int poly_degree(uint64_t p) {
  int d = -1;
  while (p) {
    ++d;
    p >>= 1;
  }
  return d;
}

inline uint64_t poly_mod(uint64_t a, uint64_t mod) {
  int dm = poly_degree(mod);
  int da = poly_degree(a);
  while (da >= dm) {
    a ^= mod << (da - dm);
    da = poly_degree(a);
  }
  return a;
}

inline bool is_irreducible(uint32_t poly, int m) {
  // Trial division by all polynomials of degree 1..m/2.
  for (int d = 1; 2 * d <= m; ++d) {
    for (uint32_t q = (1u << d); q < (2u << d); ++q) {
      if (poly_mod(poly, q) == 0) return false;
    }
  }
  return true;
}

// Least irreducible polynomial of degree m, ordered by the integer value of
// its coefficient bitstring. Fixed per field size so hash values reproduce.
inline uint32_t least_irreducible(int m) {
  if (m < 1 || m > 24) throw std::invalid_argument("field degree out of range");
  for (uint32_t p = (1u << m) + 1; p < (2u << m); p += 2) {
    if (is_irreducible(p, m)) return p;
  }
  throw std::logic_error("no irreducible polynomial found");
}

struct Field {
  int m;
  uint32_t modulus;

  explicit Field(int m_) : m(m_), modulus(least_irreducible(m_)) {}

  uint32_t size() const { return 1u << m; }

  uint32_t mul(uint32_t a, uint32_t b) const {
    return static_cast<uint32_t>(poly_mod(clmul(a, b), modulus));
  }
  uint32_t add(uint32_t a, uint32_t b) const { return a ^ b; }
};

}  // namespace gf2

struct KWiseHash {
  int log_n = 0;    // n = 2^log_n, the domain size
  int log_l = 0;    // l = 2^log_l, the range size
  int k = 0;        // independence
  std::vector<uint32_t> coeffs;  // k field elements, degree-(k-1) polynomial

  KWiseHash(int log_n_, int log_l_, int k_, std::vector<uint32_t> coeffs_)
      : log_n(log_n_), log_l(log_l_), k(k_), coeffs(std::move(coeffs_)) {
    if (log_l > log_n) throw std::invalid_argument("range must not exceed domain");
    if (k <= 0) throw std::invalid_argument("independence must be positive");
    if (coeffs.size() != static_cast<size_t>(k))
      throw std::invalid_argument("need exactly k coefficients");
    uint32_t n = 1u << log_n;
    for (uint32_t c : coeffs)
      if (c >= n) throw std::invalid_argument("coefficient out of field");
  }

  static KWiseHash sample(int log_n, int log_l, int k, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<uint32_t> cs(k);
    for (auto& c : cs)
      c = static_cast<uint32_t>(detail::uniform_below(rng, 1ull << log_n));
    return KWiseHash(log_n, log_l, k, std::move(cs));
  }
};

// Horner evaluation of the polynomial at a, keeping the low log_l bits.
inline uint32_t khash_eval(const KWiseHash& h, uint32_t a) {
  if (a >= (1u << h.log_n)) throw std::invalid_argument("point out of domain");
  gf2::Field f(h.log_n);
  uint32_t acc = 0;
  for (int i = h.k - 1; i >= 0; --i) acc = f.add(f.mul(acc, a), h.coeffs[i]);
  return acc & ((1u << h.log_l) - 1);
}

}  // namespace spanprog
