#pragma once

// Dense decomposition kernels and numerical rank estimation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

#include "ics_psd/errors.hpp"

namespace ics_psd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Rows are observations, columns are variables.
using DataMatrix = Eigen::MatrixXd;

/// Machine epsilon as used by the relative rank rules.
inline constexpr double kNu = 2.2e-16;

inline double sqrt_nu() { return std::sqrt(kNu); }

/// Symmetry is checked relative to the largest absolute entry.
inline constexpr double kSymmetryTol = 1e-10;

/// Generalized singular values below this fraction of max(alpha, beta)
/// are snapped to exact zero.
inline constexpr double kSnapTol = 1e-10;

namespace detail {

// Flips column j of `vecs` (and of `paired`, when given) so that its
// largest-magnitude entry is positive. Ties go to the lowest row index.
inline void normalize_signs(Matrix& vecs, Matrix* paired = nullptr) {
  for (Index j = 0; j < vecs.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < vecs.rows(); ++i) {
      const double m = std::abs(vecs(i, j));
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    if (vecs.rows() > 0 && vecs(arg, j) < 0.0) {
      vecs.col(j) *= -1.0;
      if (paired != nullptr && j < paired->cols()) paired->col(j) *= -1.0;
    }
  }
}

inline std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rank estimation
// ---------------------------------------------------------------------------

/// Relative rules for cutting a non-increasing spectrum.
struct RankRule {
  enum class Kind { sqrt_eps, dim_eps, inertia };

  Kind kind = Kind::sqrt_eps;
  double q = 0.99;  // only used by inertia

  static RankRule sqrt_eps() { return {Kind::sqrt_eps, 0.99}; }
  static RankRule dim_eps() { return {Kind::dim_eps, 0.99}; }
  static RankRule inertia(double q = 0.99) { return {Kind::inertia, q}; }

  std::string name() const {
    switch (kind) {
      case Kind::sqrt_eps:
        return "sqrt-eps";
      case Kind::dim_eps:
        return "dim-eps";
      case Kind::inertia: {
        std::ostringstream os;
        os << "inertia(" << q << ")";
        return os.str();
      }
    }
    return "unknown";
  }
};

struct RankEstimate {
  Index rank = 0;
  std::string rule;
  Vector spectrum;
  /// Singular values >= threshold are counted.
  double threshold = 0.0;
  /// Set when the spectrum is empty or identically zero.
  bool degenerate = false;
};

/// Estimates the numerical rank of an n x p matrix from its singular values.
///
/// sqrt-eps keeps s_i / s_1 >= sqrt(nu); dim-eps keeps s_i / s_1 >= max(n, p) nu;
/// inertia(q) returns the smallest l whose leading squared mass reaches q.
inline RankEstimate estimate_rank(const Vector& singular_values, Index n, Index p,
                                  const RankRule& rule = RankRule::sqrt_eps()) {
  RankEstimate est;
  est.rule = rule.name();
  est.spectrum = singular_values;
  const Index k = singular_values.size();
  if (k == 0) {
    est.degenerate = true;
    return est;
  }
  for (Index i = 0; i < k; ++i) {
    if (singular_values(i) < 0.0 || (i > 0 && singular_values(i) > singular_values(i - 1))) {
      throw PreconditionError("estimate_rank: spectrum must be nonnegative and non-increasing");
    }
  }
  const double top = singular_values(0);
  if (top <= 0.0) {
    est.degenerate = true;
    return est;
  }
  const Index cap = std::min<Index>(k, std::min(n, p));

  switch (rule.kind) {
    case RankRule::Kind::sqrt_eps:
    case RankRule::Kind::dim_eps: {
      const double rel = rule.kind == RankRule::Kind::sqrt_eps
                             ? sqrt_nu()
                             : static_cast<double>(std::max(n, p)) * kNu;
      est.threshold = rel * top;
      Index count = 0;
      for (Index i = 0; i < k; ++i) {
        if (singular_values(i) / top >= rel) ++count;
      }
      est.rank = std::min(count, cap);
      break;
    }
    case RankRule::Kind::inertia: {
      if (!(rule.q > 0.0 && rule.q <= 1.0)) {
        throw DomainError("estimate_rank: inertia level must lie in (0, 1]");
      }
      const double total = singular_values.squaredNorm();
      double acc = 0.0;
      Index l = k;
      for (Index i = 0; i < k; ++i) {
        acc += singular_values(i) * singular_values(i);
        if (acc / total >= rule.q) {
          l = i + 1;
          break;
        }
      }
      est.rank = std::min(l, cap);
      est.threshold = est.rank > 0 ? singular_values(est.rank - 1) : top;
      break;
    }
  }
  return est;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition
// ---------------------------------------------------------------------------

struct SymEig {
  Vector eigenvalues;   // non-increasing
  Matrix eigenvectors;  // column j pairs with eigenvalue j
};

inline void require_symmetric(const Matrix& s, std::string_view what) {
  if (s.rows() != s.cols()) {
    throw ShapeError(std::string(what) + ": expected a square matrix, got " + detail::shape_str(s));
  }
  if (s.size() == 0) return;
  const double scale = s.cwiseAbs().maxCoeff();
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (!std::isfinite(scale) || asym > kSymmetryTol * scale) {
    throw PreconditionError(std::string(what) + " is not symmetric");
  }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues non-increasing.
/// Each eigenvector has its largest-magnitude entry positive.
inline SymEig sym_eig(const Matrix& s, std::string_view what = "matrix") {
  require_symmetric(s, what);
  const Index p = s.rows();
  SymEig out;
  if (p == 0) return out;
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw DecompositionError("sym_eig: eigensolver did not converge on " + std::string(what));
  }
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  detail::normalize_signs(out.eigenvectors);
  return out;
}

/// Orthonormal basis of the range of a PSD matrix and the retained eigenvalues.
struct PsdRange {
  Matrix basis;   // p x r, eigenvectors of the kept eigenvalues
  Vector values;  // r positive eigenvalues, non-increasing
  Matrix null_basis;  // p x (p - r)
};

/// Keeps eigenvalues with lambda_i / lambda_1 > tol. Throws NotPsdError when an
/// eigenvalue is below -tol * lambda_1.
inline PsdRange psd_range(const Matrix& s, double tol = sqrt_nu(),
                          std::string_view what = "matrix") {
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("psd_range: tol must lie in (0, 1)");
  const SymEig eig = sym_eig(s, what);
  const Index p = eig.eigenvalues.size();
  PsdRange out;
  const double top = p > 0 ? eig.eigenvalues(0) : 0.0;
  if (p > 0 && eig.eigenvalues(p - 1) < -tol * std::max(top, 0.0)) {
    throw NotPsdError(std::string(what) + " has a negative eigenvalue beyond tolerance");
  }
  Index r = 0;
  if (top > 0.0) {
    while (r < p && eig.eigenvalues(r) / top > tol) ++r;
  }
  out.basis = eig.eigenvectors.leftCols(r);
  out.values = eig.eigenvalues.head(r);
  out.null_basis = eig.eigenvectors.rightCols(p - r);
  return out;
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix.
inline Matrix pinv_psd(const Matrix& s, double tol = sqrt_nu()) {
  const PsdRange range = psd_range(s, tol, "pinv_psd input");
  return range.basis * range.values.cwiseInverse().asDiagonal() * range.basis.transpose();
}

/// Symmetric square root of a PSD matrix. Eigenvalues at or below tol times
/// the largest are rounding noise of the null space and map to exact zeros, as
/// in psd_range; otherwise their roots (~1e-7) would pose as a real range.
/// Diagonal inputs are handled entrywise so exact zeros stay exact.
inline Matrix psd_sqrt(const Matrix& s, double tol = sqrt_nu()) {
  require_symmetric(s, "psd_sqrt input");
  if (s.isDiagonal(0.0)) {
    Vector d = s.diagonal();
    for (Index i = 0; i < d.size(); ++i) {
      if (d(i) < 0.0) throw NotPsdError("psd_sqrt: negative diagonal entry");
      d(i) = std::sqrt(d(i));
    }
    return d.asDiagonal();
  }
  const SymEig eig = sym_eig(s, "psd_sqrt input");
  const double cut = eig.eigenvalues.size() > 0 ? tol * std::max(eig.eigenvalues(0), 0.0) : 0.0;
  const Vector root = eig.eigenvalues.unaryExpr([cut](double v) { return v > cut ? std::sqrt(v) : 0.0; });
  return eig.eigenvectors * root.asDiagonal() * eig.eigenvectors.transpose();
}

// ---------------------------------------------------------------------------
// Thin SVD
// ---------------------------------------------------------------------------

struct ThinSvd {
  Matrix left_vectors;    // n x k
  Vector singular_values; // k, non-increasing
  Matrix right_vectors;   // p x k
};

inline ThinSvd thin_svd(const Matrix& x) {
  ThinSvd out;
  const Index k = std::min(x.rows(), x.cols());
  if (k == 0) {
    out.left_vectors = Matrix::Zero(x.rows(), 0);
    out.right_vectors = Matrix::Zero(x.cols(), 0);
    return out;
  }
  if (!x.allFinite()) throw DecompositionError("thin_svd: input contains non-finite values");
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw DecompositionError("thin_svd: SVD did not converge on " + detail::shape_str(x) + " input");
  }
  out.left_vectors = svd.matrixU();
  out.singular_values = svd.singularValues();
  out.right_vectors = svd.matrixV();
  detail::normalize_signs(out.right_vectors, &out.left_vectors);
  return out;
}

// ---------------------------------------------------------------------------
// Generalized SVD of a matrix pair
// ---------------------------------------------------------------------------

/// a = u * d1 * [0 r_mat] * q'  and  b = v * d2 * [0 r_mat] * q'.
///
/// d1 (n1 x r) carries alphas at (j, j); d2 (n2 x r) carries betas at
/// (t, t + r - min(n2, r)). alpha_j^2 + beta_j^2 = 1. The leading p - r columns
/// of q span the common null space of a and b.
struct GsvdFactors {
  Matrix u;
  Matrix v;
  Matrix q;
  Matrix r_mat;
  Matrix d1;
  Matrix d2;
  Vector alphas;
  Vector betas;
  Index r = 0;

  /// Right factor [0 R] Q' shared by both matrices.
  Matrix shared_right() const {
    const Index p = q.rows();
    Matrix zr = Matrix::Zero(r, p);
    zr.rightCols(r) = r_mat;
    return zr * q.transpose();
  }

  /// Columns are the generalized eigenvectors: Q diag(I, R^{-1}).
  Matrix eigenvector_columns() const {
    Matrix bt = q;
    if (r > 0) {
      const Matrix rinv = r_mat.triangularView<Eigen::Upper>().solve(Matrix::Identity(r, r));
      bt.rightCols(r) = q.rightCols(r) * rinv;
    }
    return bt;
  }
};

/// Generalized singular value decomposition of (a, b).
///
/// The pair is stacked, reduced orthogonally to its row space, and the
/// orthonormal factor of that reduction is split with a CS decomposition.
/// No crossproduct a'a or b'b is formed.
inline GsvdFactors gsvd_pair(const Matrix& a, const Matrix& b,
                             const RankRule& rule = RankRule::sqrt_eps()) {
  if (a.cols() != b.cols()) {
    throw ShapeError("gsvd_pair: column mismatch (" + detail::shape_str(a) + " vs " +
                     detail::shape_str(b) + ")");
  }
  const Index n1 = a.rows();
  const Index n2 = b.rows();
  const Index p = a.cols();
  if (n1 == 0 || n2 == 0 || p == 0) throw ShapeError("gsvd_pair: empty input");
  const Index m = n1 + n2;

  Matrix stacked(m, p);
  stacked << a, b;
  if (!stacked.allFinite()) throw DecompositionError("gsvd_pair: input contains non-finite values");

  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw DecompositionError("gsvd_pair: SVD of the stacked pair did not converge");
  }
  const RankEstimate rank = estimate_rank(svd.singularValues(), m, p, rule);
  const Index r = rank.rank;

  GsvdFactors out;
  out.r = r;
  const Matrix pv = svd.matrixV();
  const Matrix p1 = pv.leftCols(r);
  const Matrix p2 = pv.rightCols(p - r);

  if (r == 0) {
    out.u = Matrix::Identity(n1, n1);
    out.v = Matrix::Identity(n2, n2);
    out.q = p2;
    out.r_mat = Matrix::Zero(0, 0);
    out.d1 = Matrix::Zero(n1, 0);
    out.d2 = Matrix::Zero(n2, 0);
    return out;
  }

  // Orthogonal reduction: stacked * p1 = q1 * rt, q1 with orthonormal columns.
  const Matrix t = stacked * p1;
  Eigen::HouseholderQR<Matrix> qr(t);
  const Matrix rt = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const Matrix q1 = qr.householderQ() * Matrix::Identity(m, r);
  const Matrix q11 = q1.topRows(n1);
  const Matrix q21 = q1.bottomRows(n2);

  // CS decomposition: q11 = u c z', q21 = v s z'.
  Eigen::JacobiSVD<Matrix> cs(q11, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (cs.info() != Eigen::Success) throw DecompositionError("gsvd_pair: CS split did not converge");
  out.u = cs.matrixU();
  const Matrix z = cs.matrixV();
  Vector c = Vector::Zero(r);
  c.head(std::min(n1, r)) = cs.singularValues();

  // Columns of q21 z are mutually orthogonal with norms s_j (ascending in j).
  // Householder QR on the trailing block, largest norm first, yields an
  // exactly orthogonal v.
  const Matrix w = q21 * z;
  const Index k2 = std::min(n2, r);
  const Index off = r - k2;
  Matrix wrev(n2, k2);
  for (Index i = 0; i < k2; ++i) wrev.col(i) = w.col(r - 1 - i);
  Eigen::HouseholderQR<Matrix> qr2(wrev);
  Matrix vq = qr2.householderQ();
  Vector s = Vector::Zero(r);
  for (Index i = 0; i < k2; ++i) {
    double d = qr2.matrixQR()(i, i);
    if (d < 0.0) {
      vq.col(i) *= -1.0;
      d = -d;
    }
    s(r - 1 - i) = d;
  }
  out.v.resize(n2, n2);
  for (Index t2 = 0; t2 < n2; ++t2) {
    out.v.col(t2) = t2 < k2 ? vq.col(k2 - 1 - t2) : vq.col(t2);
  }

  out.alphas.resize(r);
  out.betas.resize(r);
  for (Index j = 0; j < r; ++j) {
    const double h = std::hypot(c(j), s(j));
    out.alphas(j) = h > 0.0 ? c(j) / h : 0.0;
    out.betas(j) = h > 0.0 ? s(j) / h : 0.0;
  }

  // RQ of z' rt: z' rt = r_mat qz'.
  const Matrix k = z.transpose() * rt;
  const Matrix kj = k.transpose().rowwise().reverse();
  Eigen::HouseholderQR<Matrix> qr3(kj);
  const Matrix r0 = qr3.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const Matrix q0 = qr3.householderQ() * Matrix::Identity(r, r);
  Matrix r_mat = r0.transpose().reverse();
  Matrix qz = q0.rowwise().reverse();
  for (Index j = 0; j < r; ++j) {
    if (r_mat(j, j) < 0.0) {
      r_mat.col(j) *= -1.0;
      qz.col(j) *= -1.0;
    }
  }
  out.r_mat = r_mat.triangularView<Eigen::Upper>();

  out.q.resize(p, p);
  out.q.leftCols(p - r) = p2;
  out.q.rightCols(r) = p1 * qz;

  out.d1 = Matrix::Zero(n1, r);
  for (Index j = 0; j < std::min(n1, r); ++j) out.d1(j, j) = out.alphas(j);
  out.d2 = Matrix::Zero(n2, r);
  for (Index t2 = 0; t2 < k2; ++t2) out.d2(t2, t2 + off) = out.betas(t2 + off);
  return out;
}

}  // namespace ics_psd
