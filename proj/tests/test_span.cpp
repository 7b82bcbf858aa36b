#include <catch_amalgamated.hpp>
#include <random>

#include "spanprog/oracles.hpp"
#include "spanprog/span_program.hpp"

using namespace spanprog;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::VectorXd unit_diff(int dim, int plus, int minus) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v(plus) += 1;
  v(minus) -= 1;
  return v;
}

// A hand-rolled st-connectivity program (target e_t - e_s, vector e_u - e_v
// per vertex pair), kept local so span-core tests do not lean on the
// constructors module.
SpanProgram local_stconn(int n, int s, int t) {
  SpanProgram p;
  p.dim = n;
  p.nvars = n * (n - 1) / 2;
  p.target = unit_diff(n, t, s);
  int var = 0;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) p.inputs.push_back({unit_diff(n, u, v), var++, 1});
  return p;
}

Assignment edge_assignment(const SimpleGraph& g) {
  int n = g.num_vertices();
  Assignment x;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      x.bits.push_back(g.has_edge(u, v) ? 1 : 0);
  return x;
}

SpanProgram random_program(std::mt19937_64& rng, int dim, int nvars,
                           int nfree, int ninputs) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto rand_vec = [&]() {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = std::round(4 * gauss(rng)) / 2.0;
    return v;
  };
  SpanProgram p;
  p.dim = dim;
  p.nvars = nvars;
  p.target = rand_vec();
  while (p.target.norm() < 0.5) p.target = rand_vec();
  for (int i = 0; i < nfree; ++i) p.free_vectors.push_back(rand_vec());
  for (int i = 0; i < ninputs; ++i)
    p.inputs.push_back({rand_vec(), static_cast<int>(rng() % nvars),
                        static_cast<int>(rng() % 2)});
  return p;
}

Assignment random_assignment(std::mt19937_64& rng, int nvars) {
  Assignment x;
  for (int i = 0; i < nvars; ++i) x.bits.push_back(rng() & 1);
  return x;
}

// Independent optimum for min y^T G y subject to c^T y = 1, by
// eigendecomposition of G: zero if c meets ker(G), else 1 / (c^T G^+ c).
double constrained_quadratic_oracle(const Eigen::MatrixXd& g,
                                    const Eigen::VectorXd& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  double cut = 1e-10 * std::max(lmax, 1.0);
  double quad = 0.0, kernel_mass = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double proj = es.eigenvectors().col(i).dot(c);
    if (std::abs(es.eigenvalues()(i)) <= cut)
      kernel_mass += proj * proj;
    else
      quad += proj * proj / es.eigenvalues()(i);
  }
  if (kernel_mass > 1e-12) return 0.0;
  return 1.0 / quad;
}

}  // namespace

TEST_CASE("available matrix") {
  std::mt19937_64 rng(2);
  auto p = random_program(rng, 4, 3, 2, 6);
  SECTION("all-zeros assignment picks the b=0 vectors") {
    Assignment x{std::vector<uint8_t>(3, 0)};
    auto m = available_matrix(p, x);
    REQUIRE(m.num_free == 2);
    size_t zeros = 0;
    for (const auto& iv : p.inputs)
      if (iv.bit == 0) ++zeros;
    REQUIRE(m.input_index.size() == zeros);
    for (size_t j = 0; j < m.input_index.size(); ++j) {
      REQUIRE(p.inputs[m.input_index[j]].bit == 0);
      REQUIRE((m.cols.col(m.num_free + j) - p.inputs[m.input_index[j]].vec)
                  .norm() == 0.0);
    }
  }
  SECTION("no inputs leaves just the free columns") {
    SpanProgram q = p;
    q.inputs.clear();
    auto m = available_matrix(q, Assignment{std::vector<uint8_t>(3, 1)});
    REQUIRE(m.cols.cols() == 2);
    REQUIRE(m.input_index.empty());
  }
  SECTION("stconn on K3 with all edges present") {
    auto q = local_stconn(3, 0, 2);
    auto m = available_matrix(q, edge_assignment(complete_graph(3)));
    REQUIRE(m.cols.cols() == 3);
  }
  SECTION("wrong assignment length") {
    CHECK_THROWS_AS(available_matrix(p, Assignment{{0, 1}}),
                    std::invalid_argument);
  }
}

TEST_CASE("evaluation") {
  SECTION("zero target is always accepted") {
    SpanProgram p;
    p.dim = 2;
    p.nvars = 1;
    p.target = Eigen::VectorXd::Zero(2);
    p.inputs.push_back({unit_diff(2, 0, 1), 0, 1});
    CHECK(evaluate(p, Assignment{{0}}));
    CHECK(evaluate(p, Assignment{{1}}));
  }
  SECTION("nonzero target with nothing available") {
    SpanProgram p;
    p.dim = 2;
    p.nvars = 1;
    p.target = unit_diff(2, 0, 1);
    p.inputs.push_back({unit_diff(2, 0, 1), 0, 1});
    CHECK(!evaluate(p, Assignment{{0}}));
    CHECK(evaluate(p, Assignment{{1}}));
  }
  SECTION("stconn agrees with the BFS oracle, exhaustively for n <= 4") {
    for (int n = 2; n <= 4; ++n) {
      auto p = local_stconn(n, 0, n - 1);
      int slots = n * (n - 1) / 2;
      for (uint32_t mask = 0; mask < (1u << slots); ++mask) {
        std::vector<Edge> edges;
        int var = 0;
        for (int u = 0; u < n; ++u)
          for (int v = u + 1; v < n; ++v, ++var)
            if ((mask >> var) & 1) edges.emplace_back(u, v);
        SimpleGraph g(n, edges);
        REQUIRE(evaluate(p, edge_assignment(g)) == is_connected(g, 0, n - 1));
      }
    }
  }
}

TEST_CASE("positive witnesses") {
  SECTION("series path has size 2") {
    auto p = local_stconn(3, 0, 2);
    auto w = positive_witness(p, edge_assignment(path_graph(2)));
    REQUIRE(w);
    CHECK_THAT(w->size, WithinAbs(2.0, 1e-9));
  }
  SECTION("two disjoint length-2 paths have size 1") {
    SimpleGraph g(4, {{0, 1}, {1, 3}, {0, 2}, {2, 3}});
    auto p = local_stconn(4, 0, 3);
    auto w = positive_witness(p, edge_assignment(g));
    REQUIRE(w);
    CHECK_THAT(w->size, WithinAbs(1.0, 1e-9));
  }
  SECTION("optimal size equals effective resistance") {
    std::mt19937_64 rng(11);
    int done = 0;
    while (done < 60) {
      int n = 2 + static_cast<int>(rng() % 4);
      std::vector<Edge> edges;
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
          if (rng() % 3) edges.emplace_back(u, v);
      SimpleGraph g(n, edges);
      if (!is_connected(g, 0, n - 1)) continue;
      ++done;
      auto p = local_stconn(n, 0, n - 1);
      auto w = positive_witness(p, edge_assignment(g));
      REQUIRE(w);
      auto r = effective_resistance(g, 0, n - 1);
      REQUIRE(r);
      REQUIRE_THAT(w->size, WithinAbs(*r, 1e-8));
    }
  }
  SECTION("free coefficients are not charged") {
    // free vector already spans the target; optimal w is zero
    SpanProgram p;
    p.dim = 2;
    p.nvars = 1;
    p.target = unit_diff(2, 0, 1);
    p.free_vectors.push_back(2 * unit_diff(2, 0, 1));
    p.inputs.push_back({unit_diff(2, 0, 1), 0, 1});
    auto w = positive_witness(p, Assignment{{1}});
    REQUIRE(w);
    CHECK_THAT(w->size, WithinAbs(0.0, 1e-12));
    CHECK_THAT(w->w_free(0), WithinAbs(0.5, 1e-9));
  }
  SECTION("returned size is minimal against random feasible witnesses") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int tested = 0;
    while (tested < 10) {
      auto p = random_program(rng, 4, 3, 1, 7);
      auto x = random_assignment(rng, 3);
      auto w = positive_witness(p, x);
      if (!w) continue;
      ++tested;
      auto m = available_matrix(p, x);
      // perturb within the nullspace of the full available matrix and
      // compare the w-part of the witness size
      Eigen::MatrixXd nullb =
          detail::colspace_complement(m.cols.transpose(), tol::nullspace_rel);
      if (nullb.cols() == 0) continue;
      for (int trial = 0; trial < 1000; ++trial) {
        Eigen::VectorXd y(nullb.cols());
        for (int i = 0; i < y.size(); ++i) y(i) = gauss(rng);
        Eigen::VectorXd full(m.cols.cols());
        full.head(m.num_free) = w->w_free;
        full.tail(w->w.size()) = w->w;
        full += nullb * y;
        // still a witness (perturbation is in the kernel of the matrix)
        REQUIRE((m.cols * full - p.target).norm() <
                1e-6 * std::max(1.0, p.target.norm()));
        REQUIRE(full.tail(w->w.size()).squaredNorm() >= w->size - 1e-9);
      }
    }
  }
  SECTION("infeasible on 0-inputs") {
    auto p = local_stconn(3, 0, 2);
    SimpleGraph g(3, {{0, 1}});
    CHECK(!positive_witness(p, edge_assignment(g)));
  }
}

TEST_CASE("negative witnesses") {
  SECTION("component indicator is feasible; optimum no larger") {
    SimpleGraph g(4, {{0, 1}, {2, 3}});
    auto p = local_stconn(4, 0, 3);
    auto x = edge_assignment(g);
    auto nw = negative_witness(p, x);
    REQUIRE(nw);
    // indicator of t's component, sign-adjusted so <w', e_t - e_s> = 1
    Eigen::VectorXd ind = Eigen::VectorXd::Zero(4);
    ind(2) = ind(3) = 1;
    REQUIRE_THAT(ind.dot(p.target), WithinAbs(1.0, 1e-12));
    auto m = available_matrix(p, x);
    REQUIRE((m.cols.transpose() * ind).norm() < 1e-12);  // feasibility
    Eigen::MatrixXd vall(4, p.inputs.size());
    for (size_t j = 0; j < p.inputs.size(); ++j) vall.col(j) = p.inputs[j].vec;
    double ind_size = (vall.transpose() * ind).squaredNorm();
    REQUIRE(nw->size <= ind_size + 1e-9);
  }
  SECTION("witness constraints hold to 1e-9") {
    std::mt19937_64 rng(41);
    int tested = 0;
    while (tested < 40) {
      auto p = random_program(rng, 5, 3, 1, 6);
      auto x = random_assignment(rng, 3);
      auto nw = negative_witness(p, x);
      if (!nw) continue;
      ++tested;
      REQUIRE_THAT(nw->wprime.dot(p.target), WithinAbs(1.0, 1e-9));
      auto m = available_matrix(p, x);
      REQUIRE((m.cols.transpose() * nw->wprime).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
  SECTION("size matches the constrained-quadratic oracle") {
    std::mt19937_64 rng(43);
    int tested = 0;
    while (tested < 40) {
      auto p = random_program(rng, 5, 3, 1, 6);
      auto x = random_assignment(rng, 3);
      auto nw = negative_witness(p, x);
      if (!nw) continue;
      ++tested;
      auto m = available_matrix(p, x);
      Eigen::MatrixXd nbasis =
          detail::colspace_complement(m.cols, tol::nullspace_rel);
      Eigen::MatrixXd vall(p.dim, p.inputs.size());
      for (size_t j = 0; j < p.inputs.size(); ++j) vall.col(j) = p.inputs[j].vec;
      Eigen::MatrixXd a = vall.transpose() * nbasis;
      double expect = constrained_quadratic_oracle(
          a.transpose() * a, nbasis.transpose() * p.target);
      REQUIRE_THAT(nw->size, WithinAbs(expect, 1e-6));
    }
  }
  SECTION("target orthogonal to the single vector of a 1-dim program") {
    SpanProgram p;
    p.dim = 2;
    p.nvars = 1;
    p.target = Eigen::VectorXd::Zero(2);
    p.target(0) = 2;
    Eigen::VectorXd other = Eigen::VectorXd::Zero(2);
    other(1) = 1;
    p.inputs.push_back({other, 0, 1});
    auto nw = negative_witness(p, Assignment{{1}});
    REQUIRE(nw);
    CHECK_THAT(nw->size, WithinAbs(0.0, 1e-12));
    CHECK_THAT(nw->wprime(0), WithinAbs(0.5, 1e-9));  // tau / |tau|^2
  }
}

TEST_CASE("witness duality") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 150; ++trial) {
    auto p = random_program(rng, 2 + static_cast<int>(rng() % 5), 3, 1,
                            1 + static_cast<int>(rng() % 8));
    auto x = random_assignment(rng, 3);
    bool f = evaluate(p, x);
    auto pos = positive_witness(p, x);
    auto neg = negative_witness(p, x);
    REQUIRE(pos.has_value() == f);
    REQUIRE(neg.has_value() == !f);
  }
}

TEST_CASE("witness sizes over a domain") {
  auto p = local_stconn(3, 0, 2);
  SECTION("singleton 1-input domain") {
    auto ws = witness_size(p, {edge_assignment(path_graph(2))});
    REQUIRE(ws.w1);
    CHECK_THAT(*ws.w1, WithinAbs(2.0, 1e-9));
    CHECK(!ws.w0);
    CHECK(!ws.w);
  }
  SECTION("mixed domain gives the geometric mean") {
    SimpleGraph disc(3, {{0, 1}});
    auto ws = witness_size(p, {edge_assignment(path_graph(2)),
                               edge_assignment(disc)});
    REQUIRE(ws.w0);
    REQUIRE(ws.w1);
    REQUIRE(ws.w);
    CHECK_THAT(*ws.w, WithinAbs(std::sqrt(*ws.w0 * *ws.w1), 1e-12));
  }
  SECTION("empty domain is an error") {
    CHECK_THROWS_AS(witness_size(p, {}), std::invalid_argument);
  }
}

TEST_CASE("scaling covariance") {
  std::mt19937_64 rng(61);
  int tested = 0;
  while (tested < 20) {
    auto p = random_program(rng, 4, 2, 1, 5);
    auto x = random_assignment(rng, 2);
    SpanProgram scaled = p;
    double lambda = 2.5;
    scaled.target *= lambda;
    REQUIRE(evaluate(p, x) == evaluate(scaled, x));
    if (auto w = positive_witness(p, x)) {
      ++tested;
      auto ws = positive_witness(scaled, x);
      REQUIRE(ws);
      REQUIRE_THAT(ws->size, WithinAbs(lambda * lambda * w->size, 1e-6));
    } else {
      auto nw = negative_witness(p, x);
      auto nws = negative_witness(scaled, x);
      REQUIRE(nw);
      REQUIRE(nws);
      REQUIRE_THAT(nws->size, WithinAbs(nw->size / (lambda * lambda), 1e-6));
    }
  }
}

TEST_CASE("canonicalizing free vectors") {
  std::mt19937_64 rng(71);
  SECTION("no free vectors: unchanged up to the new variable") {
    auto p = random_program(rng, 3, 2, 0, 4);
    auto q = canonicalize_free(p);
    REQUIRE(q.nvars == p.nvars + 1);
    REQUIRE(q.inputs.size() == p.inputs.size());
    for (size_t i = 0; i < p.inputs.size(); ++i)
      REQUIRE(q.inputs[i].var == p.inputs[i].var + 1);
  }
  SECTION("evaluation agrees with x0 = 1") {
    for (int trial = 0; trial < 30; ++trial) {
      auto p = random_program(rng, 4, 2, 2, 5);
      auto q = canonicalize_free(p);
      auto x = random_assignment(rng, 2);
      REQUIRE(evaluate(q, extend_assignment(x)) == evaluate(p, x));
    }
  }
  SECTION("positive size growth is the now-charged free coefficients") {
    // The canonical optimum re-balances between formerly-free and input
    // coefficients, so its size is sandwiched between the old optimum and
    // the old optimum plus its free-coefficient norm.
    int tested = 0;
    while (tested < 15) {
      auto p = random_program(rng, 4, 2, 2, 5);
      auto x = random_assignment(rng, 2);
      auto w = positive_witness(p, x);
      if (!w) continue;
      ++tested;
      auto q = canonicalize_free(p);
      auto wq = positive_witness(q, extend_assignment(x));
      REQUIRE(wq);
      REQUIRE(wq->size >= w->size - 1e-6);
      REQUIRE(wq->size <= w->size + w->w_free.squaredNorm() + 1e-6);
    }
  }
  SECTION("growth is exact when the free span is orthogonal to the inputs") {
    SpanProgram p;
    p.dim = 3;
    p.nvars = 1;
    p.target = Eigen::VectorXd::Zero(3);
    p.target(0) = 1;
    p.target(2) = 2;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(3);
    f(2) = 1;
    p.free_vectors.push_back(f);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
    sum(0) = sum(1) = 1;
    p.inputs.push_back({unit_diff(3, 0, 1), 0, 1});  // both in span{e0,e1}
    p.inputs.push_back({sum, 0, 1});
    auto w = positive_witness(p, Assignment{{1}});
    REQUIRE(w);
    auto wq = positive_witness(canonicalize_free(p),
                               extend_assignment(Assignment{{1}}));
    REQUIRE(wq);
    REQUIRE_THAT(wq->size,
                 WithinAbs(w->size + w->w_free.squaredNorm(), 1e-6));
  }
  SECTION("never-available vectors count toward negative size") {
    SpanProgram p;
    p.dim = 2;
    p.nvars = 1;
    p.target = Eigen::VectorXd::Zero(2);
    p.target(0) = 1;
    p.inputs.push_back({unit_diff(2, 0, 1), 0, 1});
    Eigen::VectorXd extra = Eigen::VectorXd::Zero(2);
    extra(0) = 3;
    auto q = canonicalize_free(p, {extra});
    auto nw0 = negative_witness(p, Assignment{{0}});
    auto nw1 = negative_witness(q, extend_assignment(Assignment{{0}}));
    REQUIRE(nw0);
    REQUIRE(nw1);
    REQUIRE(nw1->size >= nw0->size);
    // w' = e_0 meets the extra vector with inner product 3
    REQUIRE_THAT(nw1->size, WithinAbs(nw0->size + 9.0, 1e-9));
  }
}

TEST_CASE("json round trip") {
  std::mt19937_64 rng(81);
  auto p = random_program(rng, 4, 3, 2, 6);
  auto j = span_to_json(p);
  auto q = span_from_json(j);
  REQUIRE(q.dim == p.dim);
  REQUIRE(q.nvars == p.nvars);
  REQUIRE((q.target - p.target).norm() == 0.0);
  REQUIRE(q.free_vectors.size() == p.free_vectors.size());
  REQUIRE(q.inputs.size() == p.inputs.size());
  for (size_t i = 0; i < p.inputs.size(); ++i) {
    REQUIRE((q.inputs[i].vec - p.inputs[i].vec).norm() == 0.0);
    REQUIRE(q.inputs[i].var == p.inputs[i].var);
    REQUIRE(q.inputs[i].bit == p.inputs[i].bit);
  }
  // byte stability: dumping twice gives identical text
  REQUIRE(span_to_json(q).dump() == j.dump());
}
