#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <vector>

namespace spanprog {

// Pinned numerical tolerances, shared by every module.
namespace tol {
constexpr double membership_rel = 1e-8;   // span-membership residual, relative
constexpr double pinv_rel = 1e-12;        // pseudoinverse singular-value cutoff
constexpr double nullspace_rel = 1e-10;   // nullspace singular-value cutoff
constexpr double ortho = 1e-10;           // orthogonality / identity checks
constexpr double spectrum = 1e-9;         // block-spectrum comparisons
}  // namespace tol

struct InputVector {
  Eigen::VectorXd vec;
  int var = 0;
  int bit = 0;
};

// Real span program: target tau, free vectors (always available), and input
// vectors available when variable `var` of the assignment equals `bit`.
struct SpanProgram {
  int dim = 0;
  int nvars = 0;
  Eigen::VectorXd target;
  std::vector<Eigen::VectorXd> free_vectors;
  std::vector<InputVector> inputs;

  void check() const {
    if (dim < 0 || nvars < 0) throw std::invalid_argument("negative shape");
    if (target.size() != dim) throw std::invalid_argument("target length != dim");
    for (const auto& v : free_vectors)
      if (v.size() != dim) throw std::invalid_argument("free vector length != dim");
    for (const auto& iv : inputs) {
      if (iv.vec.size() != dim)
        throw std::invalid_argument("input vector length != dim");
      if (iv.var < 0 || iv.var >= nvars)
        throw std::invalid_argument("variable index out of range");
      if (iv.bit != 0 && iv.bit != 1)
        throw std::invalid_argument("bit must be 0 or 1");
    }
  }
};

struct Assignment {
  std::vector<uint8_t> bits;

  int operator[](int i) const { return bits.at(i); }
};

inline Assignment assignment_from_bits(std::initializer_list<int> bits) {
  Assignment x;
  for (int b : bits) x.bits.push_back(static_cast<uint8_t>(b));
  return x;
}

// Columns: free vectors first, then available input vectors in program order.
// input_index maps columns at position >= num_free back into p.inputs.
struct AvailableMatrix {
  Eigen::MatrixXd cols;
  int num_free = 0;
  std::vector<int> input_index;
};

inline AvailableMatrix available_matrix(const SpanProgram& p,
                                        const Assignment& x) {
  if (x.bits.size() != static_cast<size_t>(p.nvars))
    throw std::invalid_argument("assignment length != nvars");
  AvailableMatrix m;
  m.num_free = static_cast<int>(p.free_vectors.size());
  for (size_t i = 0; i < p.inputs.size(); ++i)
    if (p.inputs[i].bit == x.bits[p.inputs[i].var])
      m.input_index.push_back(static_cast<int>(i));
  m.cols.resize(p.dim, m.num_free + m.input_index.size());
  for (int j = 0; j < m.num_free; ++j) m.cols.col(j) = p.free_vectors[j];
  for (size_t j = 0; j < m.input_index.size(); ++j)
    m.cols.col(m.num_free + j) = p.inputs[m.input_index[j]].vec;
  return m;
}

namespace detail {

// Orthonormal basis of the column space, SVD with relative cutoff.
inline Eigen::MatrixXd colspace_basis(const Eigen::MatrixXd& a, double rel_cut) {
  if (a.cols() == 0 || a.rows() == 0)
    return Eigen::MatrixXd(a.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  double cut = rel_cut * svd.singularValues()(0);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

// Orthonormal basis of the orthogonal complement of the column space.
inline Eigen::MatrixXd colspace_complement(const Eigen::MatrixXd& a,
                                           double rel_cut) {
  long d = a.rows();
  if (a.cols() == 0) return Eigen::MatrixXd::Identity(d, d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU);
  double cut = rel_cut * svd.singularValues()(0);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > cut) ++r;
  return svd.matrixU().rightCols(d - r);
}

// Minimum-norm least-squares solve via SVD pseudoinverse. The cutoff is
// relative to max(smax, scale_floor); pass the scale of an unprojected
// parent matrix as scale_floor so that projection roundoff is not mistaken
// for signal.
inline Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& a,
                                  const Eigen::VectorXd& b, double rel_cut,
                                  double scale_floor = 0.0) {
  if (a.cols() == 0) return Eigen::VectorXd(0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  double cut = rel_cut * std::max(smax, scale_floor);
  Eigen::VectorXd y = svd.matrixU().transpose() * b;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    double s = svd.singularValues()(i);
    y(i) = s > cut ? y(i) / s : 0.0;
  }
  return svd.matrixV() * y;
}

}  // namespace detail

inline bool evaluate(const SpanProgram& p, const Assignment& x) {
  auto m = available_matrix(p, x);
  double tn = p.target.norm();
  if (tn == 0.0) return true;  // the zero vector lies in every span
  if (m.cols.cols() == 0) return false;
  Eigen::VectorXd w = detail::pinv_solve(m.cols, p.target, tol::pinv_rel);
  double res = (p.target - m.cols * w).norm();
  return res / tn < tol::membership_rel;
}

struct PositiveWitness {
  Eigen::VectorXd w;       // over available input vectors (AvailableMatrix order)
  Eigen::VectorXd w_free;  // over free vectors
  std::vector<int> input_index;
  double size = 0.0;       // ||w||^2; free coefficients are not charged
};

// Minimum-size positive witness: project out the free span with Q, solve the
// projected system for w by pseudoinverse, then soak up the residual with the
// free vectors exactly.
inline std::optional<PositiveWitness> positive_witness(const SpanProgram& p,
                                                       const Assignment& x) {
  auto m = available_matrix(p, x);
  Eigen::MatrixXd vfree = m.cols.leftCols(m.num_free);
  Eigen::MatrixXd vx = m.cols.rightCols(m.cols.cols() - m.num_free);
  Eigen::MatrixXd fbasis = detail::colspace_basis(vfree, tol::nullspace_rel);
  Eigen::MatrixXd qvx = vx - fbasis * (fbasis.transpose() * vx);
  Eigen::VectorXd qtau = p.target - fbasis * (fbasis.transpose() * p.target);

  PositiveWitness pw;
  pw.input_index = m.input_index;
  pw.w = detail::pinv_solve(qvx, qtau, tol::pinv_rel, vx.norm());
  if (pw.w.size() == 0) pw.w = Eigen::VectorXd::Zero(vx.cols());
  Eigen::VectorXd resid = p.target - vx * pw.w;
  pw.w_free = detail::pinv_solve(vfree, resid, tol::pinv_rel);
  if (pw.w_free.size() == 0) pw.w_free = Eigen::VectorXd::Zero(m.num_free);
  Eigen::VectorXd recon = vx * pw.w + vfree * pw.w_free;
  double tn = p.target.norm();
  double rel = tn == 0.0 ? (recon - p.target).norm()
                         : (recon - p.target).norm() / tn;
  if (rel >= tol::membership_rel) return std::nullopt;  // f(x) = 0
  pw.size = pw.w.squaredNorm();
  return pw;
}

struct NegativeWitness {
  Eigen::VectorXd wprime;  // length dim; <wprime,tau>=1, orthogonal to available
  double size = 0.0;       // sum of squared inner products with all input vectors
};

// Optimal negative witness: parameterize w' = N y over the orthogonal
// complement N of the available columns, normalize <w',tau> = 1, and minimize
// the quadratic y^T (A^T A) y with A = V_inputs^T N.
inline std::optional<NegativeWitness> negative_witness(const SpanProgram& p,
                                                       const Assignment& x) {
  auto m = available_matrix(p, x);
  Eigen::MatrixXd nbasis = detail::colspace_complement(m.cols, tol::nullspace_rel);
  if (nbasis.cols() == 0) return std::nullopt;
  Eigen::VectorXd c = nbasis.transpose() * p.target;
  if (c.norm() <= tol::membership_rel * std::max(1.0, p.target.norm()))
    return std::nullopt;  // tau in the available span: f(x) = 1

  Eigen::MatrixXd vall(p.dim, p.inputs.size());
  for (size_t j = 0; j < p.inputs.size(); ++j) vall.col(j) = p.inputs[j].vec;
  Eigen::MatrixXd a = vall.transpose() * nbasis;
  Eigen::MatrixXd g = a.transpose() * a;

  // If c meets the nullspace of g, a zero-size witness exists along it.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  double lmax = es.eigenvalues().size() ? es.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
  double cut = tol::nullspace_rel * std::max(lmax, 1.0);
  Eigen::VectorXd cnull = Eigen::VectorXd::Zero(c.size());
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i)) <= cut)
      cnull += es.eigenvectors().col(i).dot(c) * es.eigenvectors().col(i);

  Eigen::VectorXd y;
  if (cnull.norm() > tol::ortho * std::max(1.0, c.norm())) {
    y = cnull / cnull.squaredNorm();
  } else {
    Eigen::VectorXd gpc = Eigen::VectorXd::Zero(c.size());
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      double l = es.eigenvalues()(i);
      if (std::abs(l) > cut)
        gpc += es.eigenvectors().col(i).dot(c) / l * es.eigenvectors().col(i);
    }
    double denom = c.dot(gpc);
    y = gpc / denom;
  }
  NegativeWitness nw;
  nw.wprime = nbasis * y;
  nw.size = (vall.transpose() * nw.wprime).squaredNorm();
  return nw;
}

struct WitnessSizes {
  std::optional<double> w0;  // max negative size over 0-inputs in the domain
  std::optional<double> w1;  // max positive size over 1-inputs in the domain
  std::optional<double> w;   // sqrt(w0 * w1) when both exist
};

inline WitnessSizes witness_size(const SpanProgram& p,
                                 const std::vector<Assignment>& domain) {
  if (domain.empty()) throw std::invalid_argument("empty domain");
  WitnessSizes ws;
  for (const auto& x : domain) {
    if (auto pw = positive_witness(p, x)) {
      ws.w1 = std::max(ws.w1.value_or(0.0), pw->size);
    } else {
      auto nw = negative_witness(p, x);
      if (!nw) throw std::logic_error("neither witness feasible");
      ws.w0 = std::max(ws.w0.value_or(0.0), nw->size);
    }
  }
  if (ws.w0 && ws.w1) ws.w = std::sqrt(*ws.w0 * *ws.w1);
  return ws;
}

// Free vectors become inputs on a fresh variable x_0 (always set to 1); old
// variable i becomes i+1. Extra vectors, if given, are attached to (0, 0) so
// they are never available but still count toward negative witness size.
inline SpanProgram canonicalize_free(
    const SpanProgram& p,
    const std::vector<Eigen::VectorXd>& never_available = {}) {
  SpanProgram q;
  q.dim = p.dim;
  q.nvars = p.nvars + 1;
  q.target = p.target;
  for (const auto& v : p.free_vectors) q.inputs.push_back({v, 0, 1});
  for (const auto& v : never_available) {
    if (v.size() != p.dim)
      throw std::invalid_argument("never-available vector length != dim");
    q.inputs.push_back({v, 0, 0});
  }
  for (const auto& iv : p.inputs)
    q.inputs.push_back({iv.vec, iv.var + 1, iv.bit});
  return q;
}

inline Assignment extend_assignment(const Assignment& x) {
  Assignment y;
  y.bits.reserve(x.bits.size() + 1);
  y.bits.push_back(1);
  y.bits.insert(y.bits.end(), x.bits.begin(), x.bits.end());
  return y;
}

// ---------------------------------------------------------------------------
// JSON serialization: {dim, nvars, target, free, inputs:[{vec,var,bit}]}.
// ---------------------------------------------------------------------------

inline nlohmann::json span_to_json(const SpanProgram& p) {
  nlohmann::json j;
  j["dim"] = p.dim;
  j["nvars"] = p.nvars;
  j["target"] = std::vector<double>(p.target.begin(), p.target.end());
  j["free"] = nlohmann::json::array();
  for (const auto& v : p.free_vectors)
    j["free"].push_back(std::vector<double>(v.begin(), v.end()));
  j["inputs"] = nlohmann::json::array();
  for (const auto& iv : p.inputs)
    j["inputs"].push_back(
        {{"vec", std::vector<double>(iv.vec.begin(), iv.vec.end())},
         {"var", iv.var},
         {"bit", iv.bit}});
  return j;
}

inline SpanProgram span_from_json(const nlohmann::json& j) {
  SpanProgram p;
  p.dim = j.at("dim").get<int>();
  p.nvars = j.at("nvars").get<int>();
  auto vec_of = [&](const nlohmann::json& a) {
    auto v = a.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()).eval();
  };
  p.target = vec_of(j.at("target"));
  for (const auto& a : j.at("free")) p.free_vectors.push_back(vec_of(a));
  for (const auto& a : j.at("inputs"))
    p.inputs.push_back({vec_of(a.at("vec")), a.at("var").get<int>(),
                        a.at("bit").get<int>()});
  p.check();
  return p;
}

}  // namespace spanprog
