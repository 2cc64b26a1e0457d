#pragma once

// Seeded generators for the simulated designs: the rank-deficient two-group
// model, the collinear cluster mixture, projected mean-shift outliers and the
// n < p variant. Normals come from CounterRng (splitmix64 + Box-Muller).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ics_psd/errors.hpp"
#include "ics_psd/linalg.hpp"
#include "ics_psd/random.hpp"
#include "ics_psd/scatter.hpp"

namespace ics_psd {

struct DesignRecord {
  std::string name;
  Index n = 0;
  Index p = 0;
  std::uint64_t seed = 0;
  /// Named scalar parameters (eps, delta, L, ...), in insertion order.
  std::vector<std::pair<std::string, double>> params;
  Matrix w1;
  Matrix w2;
  /// Projected mean-shift only: orthonormal basis of the bulk subspace and the
  /// unit direction along which outliers are shifted.
  Matrix basis;
  Vector complement;
};

struct LabeledSample {
  DataMatrix data;
  std::vector<int> labels;
  DesignRecord design;

  Index count(int label) const {
    return static_cast<Index>(std::count(labels.begin(), labels.end(), label));
  }
};

/// (p - |i - j|) / p.
inline Matrix toeplitz_matrix(Index p) {
  if (p < 1) throw DomainError("toeplitz_matrix: p must be >= 1");
  Matrix a(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      a(i, j) = static_cast<double>(p - std::abs(i - j)) / static_cast<double>(p);
    }
  }
  return a;
}

namespace detail {

inline void require_psd(const Matrix& m, bool definite, std::string_view what) {
  require_symmetric(m, what);
  const SymEig eig = sym_eig(m, what);
  if (eig.eigenvalues.size() == 0) return;
  const double top = std::max(eig.eigenvalues(0), 0.0);
  const double low = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (low < -sqrt_nu() * top) throw DomainError(std::string(what) + " must be PSD");
  if (definite && !(low > sqrt_nu() * top)) throw DomainError(std::string(what) + " must be PD");
}

/// Orthonormal columns from the Householder QR of a seeded Gaussian matrix.
inline Matrix random_orthonormal(Index rows, Index cols, CounterRng& rng) {
  const Matrix g = rng.normal_matrix(rows, cols);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  // Fix the QR sign freedom so the result depends on g only.
  for (Index j = 0; j < cols; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace detail

/// n - n_out rows from N(0, diag(W1, 0)); the first n_out rows (label 1) from
/// N(0, diag(W1, W2)).
inline LabeledSample gen_oc_model(Index n, Index n_out, const Matrix& w1, const Matrix& w2,
                                  std::uint64_t seed) {
  if (n < 1 || n_out < 0 || 2 * n_out >= n) {
    throw DomainError("gen_oc_model: need 0 <= n_out < n / 2");
  }
  detail::require_psd(w1, true, "gen_oc_model: W1");
  detail::require_psd(w2, false, "gen_oc_model: W2");
  const Index r1 = w1.rows();
  const Index r2 = w2.rows();
  const Index p = r1 + r2;
  const Matrix s1 = psd_sqrt(w1);
  const Matrix s2 = psd_sqrt(w2);

  CounterRng rng(seed, 0);
  const Matrix z = rng.normal_matrix(n, p);
  LabeledSample out;
  out.data = DataMatrix::Zero(n, p);
  out.labels.assign(static_cast<std::size_t>(n), 0);
  out.data.leftCols(r1) = z.leftCols(r1) * s1;
  out.data.topRightCorner(n_out, r2) = z.topRightCorner(n_out, r2) * s2;
  for (Index i = 0; i < n_out; ++i) out.labels[static_cast<std::size_t>(i)] = 1;

  out.design.name = "oc";
  out.design.n = n;
  out.design.p = p;
  out.design.seed = seed;
  out.design.params = {{"n_out", static_cast<double>(n_out)},
                       {"eps", static_cast<double>(n_out) / static_cast<double>(n)}};
  out.design.w1 = w1;
  out.design.w2 = w2;
  return out;
}

/// Default two-group model: n = 1000, 20 outliers, W1 = I2, W2 = diag(2, 0).
inline LabeledSample gen_oc_model(std::uint64_t seed) {
  Matrix w2 = Matrix::Zero(2, 2);
  w2(0, 0) = 2.0;
  return gen_oc_model(1000, 20, Matrix::Identity(2, 2), w2, seed);
}

/// Population scatter pair of the two-group model: the clean-part covariance
/// diag(W1, 0) and the mixture covariance diag(W1, eps W2).
inline std::pair<ScatterEstimate, ScatterEstimate> oc_population_scatters(const Matrix& w1,
                                                                          const Matrix& w2,
                                                                          double eps) {
  const Index r1 = w1.rows();
  const Index p = r1 + w2.rows();
  ScatterEstimate v1;
  v1.matrix = Matrix::Zero(p, p);
  v1.matrix.topLeftCorner(r1, r1) = w1;
  v1.location = Vector::Zero(p);
  v1.estimator = "population clean cov";
  v1.rank = r1;
  ScatterEstimate v2 = v1;
  v2.matrix.bottomRightCorner(w2.rows(), w2.rows()) = eps * w2;
  v2.estimator = "population cov";
  v2.rank = detail::psd_rank(v2.matrix);
  return {v1, v2};
}

/// eps1 N(0, I_d) + (1 - eps1) N(delta e1, I_d), group sizes fixed at
/// round(eps1 n) and the rest, with two appended collinear columns
/// X_{d+1} = X2 - 3 X3 and X_{d+2} = X3 + 5 X_{d+1}.
inline LabeledSample gen_mixture_collinear(Index n, Index d, double delta, double eps1,
                                           std::uint64_t seed) {
  if (d < 3) throw DomainError("gen_mixture_collinear: d must be >= 3");
  if (!(eps1 > 0.0 && eps1 < 1.0)) throw DomainError("gen_mixture_collinear: eps1 must lie in (0, 1)");
  const auto n1 = static_cast<Index>(std::llround(eps1 * static_cast<double>(n)));
  if (n1 < 1 || n1 >= n) throw DomainError("gen_mixture_collinear: both groups must be non-empty");
  CounterRng rng(seed, 0);
  const Matrix z = rng.normal_matrix(n, d);
  LabeledSample out;
  out.data = DataMatrix::Zero(n, d + 2);
  out.data.leftCols(d) = z;
  out.labels.assign(static_cast<std::size_t>(n), 0);
  for (Index i = n1; i < n; ++i) {
    out.data(i, 0) += delta;
    out.labels[static_cast<std::size_t>(i)] = 1;
  }
  out.data.col(d) = out.data.col(1) - 3.0 * out.data.col(2);
  out.data.col(d + 1) = out.data.col(2) + 5.0 * out.data.col(d);
  out.design.name = "collinear";
  out.design.n = n;
  out.design.p = d + 2;
  out.design.seed = seed;
  out.design.params = {{"d", static_cast<double>(d)},
                       {"delta", delta},
                       {"eps1", eps1},
                       {"eps2", 1.0 - eps1}};
  return out;
}

/// Defaults n = 1000, d = 3, delta = 10, eps1 = eps2 = 0.5.
inline LabeledSample gen_mixture_collinear(std::uint64_t seed) {
  return gen_mixture_collinear(1000, 3, 10.0, 0.5, seed);
}

/// Bulk X = U D V_r' with U (n x r) and V (p x p) orthonormal from seeded
/// Gaussian QR factors. The first n_out rows (label 1) are moved by
/// shift * sqrt(r) along v_{r+1}, outside the bulk subspace, so the data has
/// rank r + 1 when n_out > 0.
inline LabeledSample gen_projected_meanshift(Index n, Index p, Index r, const Vector& d_values,
                                             Index n_out, double shift, std::uint64_t seed) {
  if (r < 1 || r >= p) throw DomainError("gen_projected_meanshift: need 1 <= r < p");
  if (r > n) throw DomainError("gen_projected_meanshift: need r <= n");
  if (n_out < 0 || n_out >= n) throw DomainError("gen_projected_meanshift: need 0 <= n_out < n");
  if (d_values.size() != r) {
    throw ShapeError("gen_projected_meanshift: d_values must have r entries");
  }
  CounterRng rng_u(seed, 0);
  CounterRng rng_v(seed, 1);
  const Matrix u = detail::random_orthonormal(n, r, rng_u);
  const Matrix v = detail::random_orthonormal(p, p, rng_v);
  const Matrix vr = v.leftCols(r);
  const Vector dir = v.col(r);

  LabeledSample out;
  out.data = u * d_values.asDiagonal() * vr.transpose();
  out.labels.assign(static_cast<std::size_t>(n), 0);
  const double step = shift * std::sqrt(static_cast<double>(r));
  for (Index i = 0; i < n_out; ++i) {
    out.data.row(i) += step * dir.transpose();
    out.labels[static_cast<std::size_t>(i)] = 1;
  }
  out.design.name = "meanshift";
  out.design.n = n;
  out.design.p = p;
  out.design.seed = seed;
  out.design.params = {{"r", static_cast<double>(r)},
                       {"n_out", static_cast<double>(n_out)},
                       {"L", shift}};
  for (Index j = 0; j < r; ++j) out.design.params.emplace_back("d" + std::to_string(j + 1), d_values(j));
  out.design.basis = vr;
  out.design.complement = dir;
  return out;
}

/// Defaults n = 100, p = 5, r = 3, D = diag(1000, 400, 200), 4 outliers, L = 3.5.
inline LabeledSample gen_projected_meanshift(std::uint64_t seed) {
  Vector d(3);
  d << 1000.0, 400.0, 200.0;
  return gen_projected_meanshift(100, 5, 3, d, 4, 3.5, seed);
}

/// Projected mean-shift design with n = 50 and p = 100.
inline LabeledSample gen_hdlss(std::uint64_t seed) {
  Vector d(3);
  d << 1000.0, 400.0, 200.0;
  LabeledSample s = gen_projected_meanshift(50, 100, 3, d, 4, 3.5, seed);
  s.design.name = "hdlss";
  return s;
}

}  // namespace ics_psd
