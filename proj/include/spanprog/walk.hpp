#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Eigenvalues>

#include "spanprog/constructors.hpp"
#include "spanprog/span_program.hpp"

namespace spanprog {

namespace tol {
inline constexpr double phase_match = 1e-8;   // eigenphases vs 2*arccos(sigma)
inline constexpr double phase_class = 1e-5;   // classifying phases as 0 or pi
inline constexpr double spectrum_set = 1e-9;  // merging eigenvalue sets
}  // namespace tol

// ---------------------------------------------------------------------------
// Evaluator configuration: alpha = C1*sqrt(W1), Theta = 1/(C2*W).
// ---------------------------------------------------------------------------

struct EvaluatorConfig {
  double c1 = 1.0, c2 = 10.0;
  double w1_bound = 1.0;  // upper bound on the optimal positive witness size
  double w0_bound = 1.0;  // upper bound on the optimal negative witness size
  double accept_threshold = 0.25;

  double alpha() const { return c1 * std::sqrt(w1_bound); }
  double w() const { return std::sqrt(w0_bound * w1_bound); }
  double theta() const { return 1.0 / (c2 * w()); }

  void validate() const {
    if (!(c1 > 0) || !(c2 > 0) || !(w1_bound > 0) || !(w0_bound > 0))
      throw std::invalid_argument("evaluator constants must be positive");
    if (c1 * w() < 1.0 - 1e-12)
      throw std::invalid_argument("need C1 * W >= 1");
  }
};

// ---------------------------------------------------------------------------
// Phase decomposition of a real orthogonal matrix via its real Schur form.
// The Schur basis is orthonormal and block-diagonalizes U into 1x1 blocks
// (eigenvalue +-1, phase 0 or pi) and 2x2 rotation blocks (phases +-theta).
// ---------------------------------------------------------------------------

struct PhaseBlock {
  double theta = 0.0;  // in [0, pi]
  int col = 0;         // first column in q
  int size = 1;        // 1 or 2
};

struct PhaseDecomposition {
  Eigen::MatrixXd q;  // orthonormal Schur basis
  Eigen::MatrixXd t;  // quasi-triangular factor, q * t * q^T = U
  std::vector<PhaseBlock> blocks;

  // all eigenphases in (-pi, pi], sorted; 2x2 blocks contribute +-theta
  std::vector<double> phases() const {
    std::vector<double> out;
    for (const auto& b : blocks) {
      out.push_back(b.theta);
      if (b.size == 2) out.push_back(-b.theta);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

inline PhaseDecomposition phase_decompose(const Eigen::MatrixXd& u) {
  if (u.rows() != u.cols()) throw std::invalid_argument("matrix not square");
  Eigen::RealSchur<Eigen::MatrixXd> schur(u);
  PhaseDecomposition pd;
  pd.q = schur.matrixU();
  pd.t = schur.matrixT();
  int m = static_cast<int>(u.rows());
  for (int i = 0; i < m;) {
    if (i + 1 < m && std::abs(pd.t(i + 1, i)) > 1e-10) {
      double a = pd.t(i, i), d = pd.t(i + 1, i + 1);
      double disc = 0.25 * (a - d) * (a - d) + pd.t(i, i + 1) * pd.t(i + 1, i);
      double im = std::sqrt(std::max(0.0, -disc));
      pd.blocks.push_back({std::atan2(im, 0.5 * (a + d)), i, 2});
      i += 2;
    } else {
      pd.blocks.push_back({pd.t(i, i) > 0 ? 0.0 : M_PI, i, 1});
      i += 1;
    }
  }
  return pd;
}

// squared norm of the projection of psi onto eigenspaces with |phase| <= Theta
inline double phase_mass(const PhaseDecomposition& pd,
                         const Eigen::VectorXd& psi, double Theta) {
  double mass = 0;
  for (const auto& b : pd.blocks) {
    if (b.theta > Theta + 1e-12) continue;
    for (int k = 0; k < b.size; ++k) {
      double ip = pd.q.col(b.col + k).dot(psi);
      mass += ip * ip;
    }
  }
  return mass;
}

// ---------------------------------------------------------------------------
// The two-reflection evaluator U = R_Lambda R_Pi.
// ---------------------------------------------------------------------------

struct BuiltU {
  Eigen::MatrixXd v;       // dim x m, column 0 = tau/alpha
  Eigen::MatrixXd lambda;  // projector onto ker(v)
  Eigen::MatrixXd u;       // m x m orthogonal
  std::vector<uint8_t> avail;  // per column; avail[0] = 1
};

inline BuiltU build_U(const SpanProgram& p, const Assignment& x,
                      const EvaluatorConfig& cfg) {
  if (!p.free_vectors.empty())
    throw std::invalid_argument(
        "build_U needs a program without free vectors; canonicalize first");
  cfg.validate();
  if (x.bits.size() != static_cast<size_t>(p.nvars))
    throw std::invalid_argument("assignment length mismatch");
  BuiltU out;
  int m = 1 + static_cast<int>(p.inputs.size());
  out.v.resize(p.dim, m);
  out.v.col(0) = p.target / cfg.alpha();
  out.avail.assign(m, 0);
  out.avail[0] = 1;
  for (size_t j = 0; j < p.inputs.size(); ++j) {
    out.v.col(1 + j) = p.inputs[j].vec;
    out.avail[1 + j] = x.bits[p.inputs[j].var] == p.inputs[j].bit;
  }
  // Lambda: orthogonal projector onto the nullspace of v
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.v, Eigen::ComputeFullV);
  double cut = svd.singularValues().size() > 0
                   ? tol::nullspace_rel * svd.singularValues()(0)
                   : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > cut) ++rank;
  Eigen::MatrixXd null_basis = svd.matrixV().rightCols(m - rank);
  out.lambda = null_basis * null_basis.transpose();
  Eigen::VectorXd rpi_diag(m);
  for (int j = 0; j < m; ++j) rpi_diag(j) = out.avail[j] ? 1.0 : -1.0;
  Eigen::MatrixXd rlambda =
      2.0 * out.lambda - Eigen::MatrixXd::Identity(m, m);
  out.u = rlambda * rpi_diag.asDiagonal();
  return out;
}

struct EvaluatorResult {
  bool accept = false;
  double mass = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  std::vector<double> phases;
};

inline EvaluatorResult run_evaluator(const SpanProgram& p, const Assignment& x,
                                     const EvaluatorConfig& cfg) {
  BuiltU built = build_U(p, x, cfg);
  PhaseDecomposition pd = phase_decompose(built.u);
  int m = static_cast<int>(built.u.rows());
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(m);
  e0(0) = 1;
  EvaluatorResult res;
  res.theta = cfg.theta();
  res.alpha = cfg.alpha();
  res.mass = phase_mass(pd, e0, res.theta);
  res.accept = res.mass >= cfg.accept_threshold;
  res.phases = pd.phases();
  return res;
}

// ---------------------------------------------------------------------------
// Products of two reflections: Spectral Lemma and Effective Spectral Gap.
// ---------------------------------------------------------------------------

struct ReflectionSystem {
  Eigen::MatrixXd a, b;  // orthonormal columns in a common ambient space

  Eigen::MatrixXd d() const { return a.transpose() * b; }

  void check() const {
    if (a.rows() != b.rows())
      throw std::invalid_argument("reflection systems need one ambient space");
    auto gram_err = [](const Eigen::MatrixXd& m) {
      Eigen::MatrixXd g = m.transpose() * m;
      return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols()))
          .cwiseAbs()
          .maxCoeff();
    };
    if (gram_err(a) > tol::ortho || gram_err(b) > tol::ortho)
      throw std::invalid_argument("columns are not orthonormal");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d());
    if (svd.singularValues().size() > 0 &&
        svd.singularValues()(0) > 1.0 + tol::ortho)
      throw std::invalid_argument("singular value above one");
  }

  Eigen::MatrixXd product_u() const {  // R_B R_A
    int nr = static_cast<int>(a.rows());
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(nr, nr);
    return (2.0 * b * b.transpose() - id) * (2.0 * a * a.transpose() - id);
  }
};

inline ReflectionSystem random_reflection_system(int dim, int acols, int bcols,
                                                 uint64_t seed) {
  if (acols > dim || bcols > dim)
    throw std::invalid_argument("more columns than dimensions");
  std::mt19937_64 rng(detail::mix_seed(seed, 0x5eedbeef));
  std::normal_distribution<double> gauss;
  auto sample = [&](int cols) {
    Eigen::MatrixXd m(dim, cols);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return Eigen::MatrixXd(
        qr.householderQ() * Eigen::MatrixXd::Identity(dim, cols));
  };
  return ReflectionSystem{sample(acols), sample(bcols)};
}

struct SpectralReport {
  int plus_count = 0, minus_count = 0;        // phases at 0 and pi
  int expected_plus = 0, expected_minus = 0;  // from the lemma's subspaces
  double max_phase_mismatch = 0.0;  // nontrivial phases vs 2*arccos(sigma)
  bool ok = false;
};

// Eigen-decompose U = R_B R_A and verify the Spectral Lemma numerically:
// +-1 eigenspace dimensions from intersection counts, and nontrivial phases
// equal to +-2*arccos of singular values of D in (0, 1).
inline std::pair<PhaseDecomposition, SpectralReport>
spectral_decompose_product(const ReflectionSystem& rs) {
  rs.check();
  PhaseDecomposition pd = phase_decompose(rs.product_u());
  SpectralReport rep;
  int nr = static_cast<int>(rs.a.rows());
  int acols = static_cast<int>(rs.a.cols());
  int bcols = static_cast<int>(rs.b.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rs.d());
  const auto& sv = svd.singularValues();
  int ones = 0, rank = 0;
  std::vector<double> nontrivial;  // expected phases 2*arccos(sigma)
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-8) ++rank;
    if (sv(i) > 1.0 - 1e-10)
      ++ones;
    else if (sv(i) > 1e-8)
      nontrivial.push_back(2.0 * std::acos(std::min(sv(i), 1.0)));
  }
  rep.expected_plus = nr - acols - bcols + 2 * ones;
  rep.expected_minus = acols + bcols - 2 * rank;
  std::vector<double> observed;
  for (const auto& blk : pd.blocks) {
    int copies = blk.size;
    if (blk.theta < tol::phase_class) {
      rep.plus_count += copies;
    } else if (blk.theta > M_PI - tol::phase_class) {
      rep.minus_count += copies;
    } else {
      for (int k = 0; k < copies / 2 + copies % 2; ++k)
        observed.push_back(blk.theta);
    }
  }
  std::sort(observed.begin(), observed.end());
  std::sort(nontrivial.begin(), nontrivial.end());
  rep.ok = rep.plus_count == rep.expected_plus &&
           rep.minus_count == rep.expected_minus &&
           observed.size() == nontrivial.size();
  if (rep.ok) {
    for (size_t i = 0; i < observed.size(); ++i)
      rep.max_phase_mismatch =
          std::max(rep.max_phase_mismatch,
                   std::abs(observed[i] - nontrivial[i]));
    rep.ok = rep.max_phase_mismatch <= tol::phase_match;
  } else {
    rep.max_phase_mismatch = M_PI;
  }
  return {std::move(pd), rep};
}

// max over random |u> in C(A)^perp of ||P_Theta Pi_B u|| / ||u||; the
// Effective Spectral Gap Lemma bounds this by Theta/2.
inline double effective_gap_check(const ReflectionSystem& rs, double Theta,
                                  int trials, uint64_t seed) {
  if (Theta < 0 || Theta > M_PI)
    throw std::invalid_argument("Theta out of [0, pi]");
  rs.check();
  PhaseDecomposition pd = phase_decompose(rs.product_u());
  int nr = static_cast<int>(rs.a.rows());
  Eigen::MatrixXd pi_a = rs.a * rs.a.transpose();
  Eigen::MatrixXd pi_b = rs.b * rs.b.transpose();
  std::mt19937_64 rng(detail::mix_seed(seed, 0xeffec71f));
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::VectorXd g(nr);
    for (int i = 0; i < nr; ++i) g(i) = gauss(rng);
    Eigen::VectorXd u = g - pi_a * g;
    double nu = u.norm();
    if (nu < 1e-12) continue;
    double mass = phase_mass(pd, pi_b * u, Theta);
    worst = std::max(worst, std::sqrt(mass) / nu);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Block spectra: M_n = A (x) I_n + B (x) J_n/n.
// ---------------------------------------------------------------------------

struct LayerBlockSpec {
  int ell = 0;
  // blocks[k][k'] = {a, b} meaning a*I_n + b*J_n/n
  std::vector<std::vector<std::array<double, 2>>> blocks;

  LayerBlockSpec() = default;
  explicit LayerBlockSpec(int l)
      : ell(l),
        blocks(l, std::vector<std::array<double, 2>>(l, {0.0, 0.0})) {}

  void add(int k, int kk, double da, double db) {
    blocks[k][kk][0] += da;
    blocks[k][kk][1] += db;
  }

  bool symmetric() const {
    for (int k = 0; k < ell; ++k)
      for (int kk = 0; kk < ell; ++kk)
        if (std::abs(blocks[k][kk][0] - blocks[kk][k][0]) > 1e-12 ||
            std::abs(blocks[k][kk][1] - blocks[kk][k][1]) > 1e-12)
          return false;
    return true;
  }

  Eigen::MatrixXd amat() const {
    Eigen::MatrixXd m(ell, ell);
    for (int k = 0; k < ell; ++k)
      for (int kk = 0; kk < ell; ++kk) m(k, kk) = blocks[k][kk][0];
    return m;
  }
  Eigen::MatrixXd bmat() const {
    Eigen::MatrixXd m(ell, ell);
    for (int k = 0; k < ell; ++k)
      for (int kk = 0; kk < ell; ++kk) m(k, kk) = blocks[k][kk][1];
    return m;
  }

  Eigen::MatrixXd direct(int n) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ell * n, ell * n);
    for (int k = 0; k < ell; ++k)
      for (int kk = 0; kk < ell; ++kk)
        for (int s = 0; s < n; ++s)
          for (int ss = 0; ss < n; ++ss) {
            double val = blocks[k][kk][1] / n;
            if (s == ss) val += blocks[k][kk][0];
            m(k * n + s, kk * n + ss) = val;
          }
    return m;
  }
};

namespace detail {
inline std::vector<double> eigenvalue_set(const Eigen::MatrixXd& m,
                                          double merge_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  std::vector<double> vals(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(vals.begin(), vals.end());
  std::vector<double> out;
  for (double v : vals)
    if (out.empty() || v - out.back() > merge_tol) out.push_back(v);
  return out;
}
}  // namespace detail

struct BlockSpectra {
  std::vector<double> reduced;  // eig(A) union eig(A+B), as a set
  std::vector<double> direct;   // eig(M_n), as a set
};

inline BlockSpectra block_spectrum(const LayerBlockSpec& spec, int n) {
  if (!spec.symmetric()) throw std::invalid_argument("asymmetric block spec");
  if (n < 1) throw std::invalid_argument("need n >= 1");
  BlockSpectra out;
  Eigen::MatrixXd a = spec.amat(), b = spec.bmat();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(a), eab(a + b);
  std::vector<double> merged;
  for (int i = 0; i < spec.ell; ++i) {
    if (n > 1) merged.push_back(ea.eigenvalues()(i));
    merged.push_back(eab.eigenvalues()(i));
  }
  std::sort(merged.begin(), merged.end());
  for (double v : merged)
    if (out.reduced.empty() || v - out.reduced.back() > tol::spectrum_set)
      out.reduced.push_back(v);
  out.direct = detail::eigenvalue_set(spec.direct(n), tol::spectrum_set);
  return out;
}

// smallest nonzero eigenvalue magnitude of the n-independent spectrum
inline double delta_gap(const LayerBlockSpec& spec) {
  auto spectra = block_spectrum(spec, 2);
  double gap = 0.0;
  for (double v : spectra.reduced)
    if (std::abs(v) > tol::spectrum_set &&
        (gap == 0.0 || std::abs(v) < gap))
      gap = std::abs(v);
  if (gap == 0.0) throw std::invalid_argument("all-zero spectrum");
  return gap;
}

// ---------------------------------------------------------------------------
// Layered, padded span programs: every layer has n slots, every slot pair of
// adjacent layers carries one column (never-available for dummy endpoints),
// paired edges become four-layer quadruples, and s-t are joined by the scaled
// target plus one never-available column.  Layers form a cycle.
// ---------------------------------------------------------------------------

struct LayeredProgram {
  int n = 0, ell = 0, dim = 0;
  double alpha = 1.0;
  SpanProgram program;  // target |t> - |s>; inputs hold the scaled columns
  int always_var = 0, never_var = 0;
  int s_vertex = 0, t_vertex = 0;
  int special_input = -1;  // index of sqrt(1 - 1/alpha^2)(|t> - |s>)
  std::vector<std::pair<int, int>> ordinary_pairs;  // includes the wrap pair
  std::vector<std::array<int, 4>> quads;
  LayerBlockSpec spec;

  int vid(int layer, int slot) const { return layer * n + slot; }

  Assignment assignment(const SimpleGraph& g) const {
    if (g.num_vertices() != n)
      throw std::invalid_argument("graph size mismatch");
    Assignment x = edge_assignment(g);
    x.bits.push_back(1);  // always_var
    x.bits.push_back(0);  // never_var
    return x;
  }

  Eigen::MatrixXd vmatrix() const {  // column 0 = tau/alpha, then inputs
    Eigen::MatrixXd v(dim, 1 + program.inputs.size());
    v.col(0) = program.target / alpha;
    for (size_t j = 0; j < program.inputs.size(); ++j)
      v.col(1 + j) = program.inputs[j].vec;
    return v;
  }
};

namespace detail {

// Availability rules for the complete bipartite column set between layers.
enum class PairRule {
  kFreeAttach,  // both endpoints real -> always available
  kVarEdge,     // both real -> tied to the G edge variable
  kDiagLink,    // same color on both sides: diagonal always, rest never
  kLinkOrVar,   // diagonal always, off-diagonal tied to the edge variable
};

class LayeredAssembler {
 public:
  LayeredAssembler(int n, int ell, double alpha) {
    if (alpha < 1.0)
      throw std::invalid_argument("layering needs alpha >= 1");
    lp_.n = n;
    lp_.ell = ell;
    lp_.dim = ell * n;
    lp_.alpha = alpha;
    lp_.always_var = pair_count(n);
    lp_.never_var = pair_count(n) + 1;
    lp_.spec = LayerBlockSpec(ell);
    lp_.program.dim = lp_.dim;
    lp_.program.nvars = pair_count(n) + 2;
  }

  Eigen::VectorXd unit(int layer, int slot) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(lp_.dim);
    v(lp_.vid(layer, slot)) = 1;
    return v;
  }

  // real(k, slot) predicates, one per layer
  void set_real(std::vector<std::function<bool(int)>> real) {
    real_ = std::move(real);
  }

  void push(const Eigen::VectorXd& vec, int avail) {
    // avail: -2 never, -1 always, >= 0 the G pair variable
    int var = avail == -2 ? lp_.never_var
              : avail == -1 ? lp_.always_var
                            : avail;
    lp_.program.inputs.push_back({vec, var, 1});
  }

  void ordinary(int ka, int kb, PairRule rule) {
    for (int s = 0; s < lp_.n; ++s)
      for (int ss = 0; ss < lp_.n; ++ss) {
        Eigen::VectorXd vec = unit(kb, ss) - unit(ka, s);
        int avail = -2;
        if (real_[ka](s) && real_[kb](ss)) {
          switch (rule) {
            case PairRule::kFreeAttach:
              avail = -1;
              break;
            case PairRule::kVarEdge:
              avail = pair_index(lp_.n, s, ss);
              break;
            case PairRule::kDiagLink:
              avail = s == ss ? -1 : -2;
              break;
            case PairRule::kLinkOrVar:
              avail = s == ss ? -1 : pair_index(lp_.n, s, ss);
              break;
          }
        }
        push(vec, avail);
      }
    ordinary_spec(ka, kb);
    lp_.ordinary_pairs.emplace_back(ka, kb);
  }

  // the t-layer to s-layer pair: the (t, s) slot carries the scaled target
  // (column 0, not an input) plus one never-available parallel column
  void wrap(int kt, int t_slot, int ks, int s_slot) {
    lp_.s_vertex = lp_.vid(ks, s_slot);
    lp_.t_vertex = lp_.vid(kt, t_slot);
    Eigen::VectorXd st = unit(ks, s_slot) - unit(kt, t_slot);
    lp_.program.target = -st;  // |t> - |s>
    for (int s = 0; s < lp_.n; ++s)
      for (int ss = 0; ss < lp_.n; ++ss) {
        if (s == t_slot && ss == s_slot) continue;
        push(unit(ks, ss) - unit(kt, s), -2);
      }
    lp_.special_input = static_cast<int>(lp_.program.inputs.size());
    double scale = std::sqrt(std::max(0.0, 1.0 - 1.0 / (alpha() * alpha())));
    push(scale * -st, -2);
    ordinary_spec(kt, ks);
    lp_.ordinary_pairs.emplace_back(kt, ks);
  }

  // paired quadruple: out from k1 to k2, back from k3 to k4; the vector is
  // (1/sqrt2)(-|k1,s> + |k2,ss> - |k3,ss> + |k4,s>)
  void quad(int k1, int k2, int k3, int k4,
            const std::function<int(int, int)>& avail_of) {
    const double r = 1.0 / std::sqrt(2.0);
    for (int s = 0; s < lp_.n; ++s)
      for (int ss = 0; ss < lp_.n; ++ss) {
        Eigen::VectorXd vec =
            r * (unit(k2, ss) - unit(k1, s) + unit(k4, s) - unit(k3, ss));
        push(vec, avail_of(s, ss));
      }
    int k[4] = {k1, k2, k3, k4};
    for (int i = 0; i < 4; ++i) lp_.spec.add(k[i], k[i], 0.125, 0.0);
    lp_.spec.add(k1, k2, 0.0, -0.125);
    lp_.spec.add(k2, k1, 0.0, -0.125);
    lp_.spec.add(k3, k4, 0.0, -0.125);
    lp_.spec.add(k4, k3, 0.0, -0.125);
    lp_.spec.add(k1, k3, 0.0, 0.125);
    lp_.spec.add(k3, k1, 0.0, 0.125);
    lp_.spec.add(k2, k4, 0.0, 0.125);
    lp_.spec.add(k4, k2, 0.0, 0.125);
    lp_.spec.add(k1, k4, -0.125, 0.0);
    lp_.spec.add(k4, k1, -0.125, 0.0);
    lp_.spec.add(k2, k3, -0.125, 0.0);
    lp_.spec.add(k3, k2, -0.125, 0.0);
    lp_.quads.push_back({k1, k2, k3, k4});
  }

  double alpha() const { return lp_.alpha; }
  LayeredProgram take() { return std::move(lp_); }

 private:
  void ordinary_spec(int ka, int kb) {
    lp_.spec.add(ka, ka, 0.25, 0.0);
    lp_.spec.add(kb, kb, 0.25, 0.0);
    lp_.spec.add(ka, kb, 0.0, -0.25);
    lp_.spec.add(kb, ka, 0.0, -0.25);
  }

  LayeredProgram lp_;
  std::vector<std::function<bool(int)>> real_;
};

}  // namespace detail

// st-connectivity: two all-real layers (a bipartite double cover of the
// complete graph) with diagonal linking columns; wrap carries the s-t pair.
inline LayeredProgram layered_stconn(const StConnInstance& inst,
                                     double alpha) {
  detail::LayeredAssembler asmb(inst.n, 2, alpha);
  auto all = [](int) { return true; };
  asmb.set_real({all, all});
  asmb.wrap(1, inst.t, 0, inst.s);
  asmb.ordinary(0, 1, detail::PairRule::kLinkOrVar);
  return asmb.take();
}

// Subdivided star, split variant: per leg, an out root layer, the leg layers
// out and back, and an in root layer; consecutive root copies are linked on
// the diagonal.  The breadcrumb pair of each leg becomes a layer quadruple.
inline LayeredProgram layered_star(const StarInstance& inst, double alpha) {
  const StarPattern& T = inst.pattern;
  const Coloring& c = inst.coloring;
  int d = T.num_legs();
  int ell = 2;
  for (int l : T.leg_lengths) ell += 2 * (l + 1);
  detail::LayeredAssembler asmb(inst.n, ell, alpha);

  std::vector<std::function<bool(int)>> real;
  auto color_layer = [&c](int color) {
    return [&c, color](int s) { return c.assign[s] == color; };
  };
  real.push_back([](int s) { return s == 0; });  // s layer, slot 0
  std::vector<int> out_root(d + 1), in_root(d + 1);
  std::vector<std::vector<int>> leg0(d + 1), leg1(d + 1);
  int k = 1;
  for (int j = 1; j <= d; ++j) {
    out_root[j] = k++;
    real.push_back(color_layer(0));
    leg0[j].assign(T.leg_lengths[j - 1] + 1, 0);
    leg1[j].assign(T.leg_lengths[j - 1] + 1, 0);
    for (int i = 1; i <= T.leg_lengths[j - 1]; ++i) {
      leg0[j][i] = k++;
      real.push_back(color_layer(T.label_of(j, i)));
    }
    for (int i = T.leg_lengths[j - 1]; i >= 1; --i) {
      leg1[j][i] = k++;
      real.push_back(color_layer(T.label_of(j, i)));
    }
    in_root[j] = k++;
    real.push_back(color_layer(0));
  }
  int t_layer = k++;
  real.push_back([](int s) { return s == 0; });
  asmb.set_real(std::move(real));

  asmb.wrap(t_layer, 0, 0, 0);
  asmb.ordinary(0, out_root[1], detail::PairRule::kFreeAttach);
  for (int j = 1; j <= d; ++j) {
    int len = T.leg_lengths[j - 1];
    int tip = T.label_of(j, 1);
    asmb.quad(out_root[j], leg0[j][1], leg1[j][1], in_root[j],
              [&c, tip, n = inst.n](int s, int ss) {
                if (c.assign[s] != 0 || c.assign[ss] != tip) return -2;
                return pair_index(n, s, ss);
              });
    for (int i = 1; i < len; ++i)
      asmb.ordinary(leg0[j][i], leg0[j][i + 1], detail::PairRule::kVarEdge);
    asmb.ordinary(leg0[j][len], leg1[j][len], detail::PairRule::kDiagLink);
    for (int i = len - 1; i >= 1; --i)
      asmb.ordinary(leg1[j][i + 1], leg1[j][i], detail::PairRule::kVarEdge);
    if (j < d)
      asmb.ordinary(in_root[j], out_root[j + 1], detail::PairRule::kDiagLink);
  }
  asmb.ordinary(in_root[d], t_layer, detail::PairRule::kFreeAttach);
  return asmb.take();
}

// Triangle: 6 layers; the four-term vectors |t>-|s>+|u,0>-|u,3> become the
// quadruple spanning the (u,3), t, s, and (u,0) layers.
inline LayeredProgram layered_triangle(const TriangleInstance& inst,
                                       double alpha) {
  const Coloring& c = inst.coloring;
  detail::LayeredAssembler asmb(inst.n, 6, alpha);
  auto color_layer = [&c](int color) {
    return [&c, color](int s) { return c.assign[s] == color; };
  };
  std::function<bool(int)> st_layer = [](int s) { return s == 0; };
  asmb.set_real({st_layer, color_layer(0), color_layer(1), color_layer(2),
                 color_layer(0), st_layer});
  asmb.wrap(5, 0, 0, 0);
  asmb.quad(4, 5, 0, 1, [&c](int s, int ss) {
    return (c.assign[s] == 0 && ss == 0) ? -1 : -2;
  });
  asmb.ordinary(1, 2, detail::PairRule::kVarEdge);
  asmb.ordinary(2, 3, detail::PairRule::kVarEdge);
  asmb.ordinary(3, 4, detail::PairRule::kVarEdge);
  return asmb.take();
}

// ---------------------------------------------------------------------------
// The a_i / b_j factorization of V' = (1/2 sqrt n) V, realized on the space
// of (vertex, column) incidences.
// ---------------------------------------------------------------------------

inline ReflectionSystem layered_reflections(const LayeredProgram& lp) {
  int m = 1 + static_cast<int>(lp.program.inputs.size());
  Eigen::MatrixXd v = lp.vmatrix();
  // endpoints and b-coefficients per column
  std::vector<std::vector<std::pair<int, double>>> bcoef(m);
  for (int j = 0; j < m; ++j) {
    if (j == 0 || j == 1 + lp.special_input) {
      // both s-t columns reflect through (1/sqrt2)(|t> - |s>)
      bcoef[j] = {{lp.t_vertex, 1.0 / std::sqrt(2.0)},
                  {lp.s_vertex, -1.0 / std::sqrt(2.0)}};
      continue;
    }
    const Eigen::VectorXd& col = v.col(j);
    double norm = col.norm();
    for (int i = 0; i < lp.dim; ++i)
      if (col(i) != 0.0) bcoef[j].emplace_back(i, col(i) / norm);
  }
  // incidence rows
  std::vector<std::vector<std::pair<int, int>>> incident(lp.dim);  // (j, row)
  int rows = 0;
  for (int j = 0; j < m; ++j)
    for (const auto& [i, coef] : bcoef[j]) incident[i].emplace_back(j, rows++);
  ReflectionSystem rs;
  rs.a = Eigen::MatrixXd::Zero(rows, lp.dim);
  rs.b = Eigen::MatrixXd::Zero(rows, m);
  double base = 1.0 / std::sqrt(2.0 * lp.n);
  double a2 = lp.alpha * lp.alpha;
  for (int j = 0; j < m; ++j)
    for (const auto& [i, coef] : bcoef[j])
      for (const auto& [jj, row] : incident[i])
        if (jj == j) rs.b(row, j) = coef;
  for (int i = 0; i < lp.dim; ++i)
    for (const auto& [j, row] : incident[i]) {
      double coef = base;
      if (i == lp.s_vertex || i == lp.t_vertex) {
        if (j == 0)
          coef = base / lp.alpha;
        else if (j == 1 + lp.special_input)
          coef = std::sqrt(std::max(0.0, 1.0 - 1.0 / a2) / (2.0 * lp.n));
      }
      rs.a(row, i) = coef;
    }
  return rs;
}

struct FactorizationCheck {
  double max_residual = 0.0;  // | (A^T B)_ij - V'_ij |
  int nullity_v = 0, nullity_vprime = 0;
  bool ok = false;
};

inline FactorizationCheck factorization_identity_check(
    const ReflectionSystem& rs, const LayeredProgram& lp) {
  FactorizationCheck out;
  Eigen::MatrixXd v = lp.vmatrix();
  Eigen::MatrixXd vprime = v / (2.0 * std::sqrt(static_cast<double>(lp.n)));
  out.max_residual = (rs.d() - vprime).cwiseAbs().maxCoeff();
  auto nullity = [](const Eigen::MatrixXd& mat) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
    const auto& sv = svd.singularValues();
    double cut = sv.size() > 0 ? tol::nullspace_rel * sv(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++rank;
    return static_cast<int>(mat.cols()) - rank;
  };
  out.nullity_v = nullity(v);
  out.nullity_vprime = nullity(vprime);
  out.ok = out.max_residual <= 1e-10 && out.nullity_v == out.nullity_vprime;
  return out;
}

// ---------------------------------------------------------------------------
// A-priori witness bounds per family, as the evaluator would know them.
// ---------------------------------------------------------------------------

inline EvaluatorConfig stconn_config(int n) {
  EvaluatorConfig cfg;
  cfg.w1_bound = n - 1;
  cfg.w0_bound = 4.0 * pair_count(n);
  return cfg;
}

inline EvaluatorConfig star_config(const StarInstance& inst) {
  EvaluatorConfig cfg;
  int suml = 0;
  for (int l : inst.pattern.leg_lengths) suml += l;
  cfg.w1_bound = 2.0 * suml + 2.0;
  cfg.w0_bound =
      16.0 * std::max<std::size_t>(1, inst.program.inputs.size());
  return cfg;
}

inline EvaluatorConfig triangle_config(const TriangleInstance& inst) {
  EvaluatorConfig cfg;
  cfg.w1_bound = 4.0;  // the free four-term vector is charged after
                       // canonicalization
  double nn = inst.n;
  cfg.w0_bound = 4.0 * nn * nn * (nn + 1.0) * (nn + 1.0);
  return cfg;
}

}  // namespace spanprog
