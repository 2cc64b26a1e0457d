#pragma once

// Test-only helpers: seeded instance generators built on the standard library
// RNG (independent of the library's CounterRng) and brute-force oracles.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testsupport {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double normal() { return normal_(eng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  Index integer(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(eng_); }

  Matrix gaussian(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  /// Heavy-tailed rows (Gaussian divided by a chi-like scale) so fourth-moment
  /// scatters differ clearly from cov.
  Matrix heavy(Index rows, Index cols) {
    Matrix m = gaussian(rows, cols);
    for (Index i = 0; i < rows; ++i) m.row(i) /= std::sqrt(0.2 + std::abs(normal()));
    return m;
  }

  Matrix orthogonal(Index p) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(p, p));
    return qr.householderQ();
  }

  /// Nonsingular with condition number below about 100.
  Matrix nonsingular(Index p) {
    Vector s(p);
    for (Index i = 0; i < p; ++i) s(i) = uniform(0.3, 3.0);
    return orthogonal(p) * s.asDiagonal() * orthogonal(p);
  }

  /// n x p data of exact rank r (before centering: rank r affine subspace
  /// through a random offset), built as heavy-tailed scores times an r x p map.
  Matrix rank_deficient(Index n, Index p, Index r) {
    const Matrix scores = heavy(n, r);
    const Matrix map = gaussian(r, p);
    Matrix x = scores * map;
    const Vector shift = gaussian(p, 1);
    x.rowwise() += shift.transpose();
    return x;
  }

  /// Random PSD p x p matrix of rank r.
  Matrix psd(Index p, Index r) {
    const Matrix g = gaussian(p, r);
    return g * g.transpose();
  }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Largest entry difference after flipping each column of b to best match a.
inline double diff_up_to_column_signs(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  double worst = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    const double plus = (a.col(j) - b.col(j)).cwiseAbs().maxCoeff();
    const double minus = (a.col(j) + b.col(j)).cwiseAbs().maxCoeff();
    worst = std::max(worst, std::min(plus, minus));
  }
  return worst;
}

/// Sine of the largest principal angle between the column spans of a and b.
inline double subspace_gap(const Matrix& a, const Matrix& b) {
  Eigen::HouseholderQR<Matrix> qa(a);
  Eigen::HouseholderQR<Matrix> qb(b);
  const Matrix ua = qa.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix ub = qb.householderQ() * Matrix::Identity(b.rows(), b.cols());
  const Matrix resid = ub - ua * (ua.transpose() * ub);
  Eigen::JacobiSVD<Matrix> svd(resid);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

/// Covariance by explicit double loops, n - 1 divisor.
inline Matrix loop_cov(const Matrix& x) {
  const Index n = x.rows();
  const Index p = x.cols();
  Vector mean = Vector::Zero(p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) mean(j) += x(i, j) / static_cast<double>(n);
  Matrix c = Matrix::Zero(p, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j)
      for (Index k = 0; k < p; ++k) c(j, k) += (x(i, j) - mean(j)) * (x(i, k) - mean(k));
  return c / static_cast<double>(n - 1);
}

/// Pseudo-inverse through Eigen's complete orthogonal decomposition.
inline Matrix cod_pinv(const Matrix& s, double threshold) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(s);
  cod.setThreshold(threshold);
  return cod.pseudoInverse();
}

/// Generalized eigenvalues of b x = rho a x for PD a, non-increasing.
inline Vector pencil_eigenvalues(const Matrix& b, const Matrix& a) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(b, a);
  return ges.eigenvalues().reverse();
}

inline std::vector<Index> top_indices(const Vector& v, Index k) {
  std::vector<Index> idx(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return v(a) > v(b); });
  idx.resize(static_cast<std::size_t>(std::min<Index>(k, v.size())));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline std::vector<Index> range_indices(Index lo, Index hi) {
  std::vector<Index> out;
  for (Index i = lo; i < hi; ++i) out.push_back(i);
  return out;
}

}  // namespace testsupport
