#pragma once

// Invariant coordinate selection for positive semi-definite scatter pairs:
// the classical whitening solver plus the pseudo-inverse (GINV), dimension
// reduction (DR) and generalized SVD (GSVD) routes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ics_psd/errors.hpp"
#include "ics_psd/linalg.hpp"
#include "ics_psd/scatter.hpp"

namespace ics_psd {

enum class EigenKind { finite, infinite, trivial };

/// Zero pattern of (alpha, beta) for one direction.
enum class DirectionClass { both_ranges, null2_only, null1_only, common_null };

enum class Method { standard, ginv, dr, gsvd };

inline std::string_view to_string(EigenKind k) {
  switch (k) {
    case EigenKind::finite:
      return "finite";
    case EigenKind::infinite:
      return "infinite";
    case EigenKind::trivial:
      return "trivial";
  }
  return "unknown";
}

inline std::string_view to_string(DirectionClass c) {
  switch (c) {
    case DirectionClass::both_ranges:
      return "both-ranges";
    case DirectionClass::null2_only:
      return "null2-only";
    case DirectionClass::null1_only:
      return "null1-only";
    case DirectionClass::common_null:
      return "common-null";
  }
  return "unknown";
}

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::standard:
      return "standard";
    case Method::ginv:
      return "ginv";
    case Method::dr:
      return "dr";
    case Method::gsvd:
      return "gsvd";
  }
  return "unknown";
}

/// Generalized eigenvalue rho = alpha2 / beta2 on the extended half line.
struct ExtEigenvalue {
  EigenKind kind = EigenKind::finite;
  double alpha2 = 0.0;
  double beta2 = 1.0;
  /// Direction in null(V1) reported with value 0 by the pseudo-inverse route.
  /// Such directions are never selectable.
  bool flagged = false;

  double value() const {
    switch (kind) {
      case EigenKind::finite:
        return alpha2 / beta2;
      case EigenKind::infinite:
        return std::numeric_limits<double>::infinity();
      case EigenKind::trivial:
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  bool selectable() const { return kind != EigenKind::trivial && !flagged; }

  static ExtEigenvalue finite(double rho) {
    return {EigenKind::finite, rho / (1.0 + rho), 1.0 / (1.0 + rho), false};
  }
  static ExtEigenvalue from_pair(double alpha2, double beta2) {
    if (alpha2 == 0.0 && beta2 == 0.0) return {EigenKind::trivial, 0.0, 0.0, false};
    if (beta2 == 0.0) return {EigenKind::infinite, alpha2, 0.0, false};
    return {EigenKind::finite, alpha2, beta2, false};
  }
  static ExtEigenvalue trivial() { return {EigenKind::trivial, 0.0, 0.0, false}; }
};

struct IcsResult {
  /// Infinite first, finite non-increasing, trivial last.
  std::vector<ExtEigenvalue> eigenvalues;
  /// Row j is the eigenvector paired with eigenvalues[j].
  Matrix b;
  /// n x k scores, empty when the solver ran on scatter matrices alone.
  Matrix scores;
  /// Location subtracted before projection.
  Vector location;
  Method method = Method::standard;
  std::string scatter1;
  std::string scatter2;
  std::vector<DirectionClass> classification;
  /// Ratios before snapping, in the same order (NaN for trivial directions).
  Vector raw_values;
  /// Rank used by the reduction step (DR) or of the stacked roots (GSVD).
  Index rank = 0;
  std::vector<std::string> warnings;

  Index size() const { return static_cast<Index>(eigenvalues.size()); }
};

/// Tolerance-aware range/null-space classification. A coefficient counts as zero when
/// its square root is at most tol times the larger of the two.
inline DirectionClass classify_direction(double alpha2, double beta2, double tol = kSnapTol) {
  if (alpha2 < 0.0 || beta2 < 0.0) throw DomainError("classify_direction: negative input");
  const double a = std::sqrt(alpha2);
  const double b = std::sqrt(beta2);
  const double m = std::max(a, b);
  const bool a_zero = a <= tol * m;
  const bool b_zero = b <= tol * m;
  if (m == 0.0) return DirectionClass::common_null;
  if (a_zero) return DirectionClass::null2_only;
  if (b_zero) return DirectionClass::null1_only;
  return DirectionClass::both_ranges;
}

/// Z = (X - 1 T') B'.
inline Matrix compute_scores(const DataMatrix& x, const Vector& location, const Matrix& b) {
  if (location.size() != x.cols() || b.cols() != x.cols()) {
    throw ShapeError("compute_scores: data has " + std::to_string(x.cols()) +
                     " columns, location " + std::to_string(location.size()) + ", b " +
                     std::to_string(b.cols()));
  }
  return (x.rowwise() - location.transpose()) * b.transpose();
}

/// Generalized kurtosis b'V2b / b'V1b.
inline double kurtosis_ratio(const Vector& b, const Matrix& v1, const Matrix& v2) {
  if (b.size() != v1.rows() || v1.rows() != v2.rows()) {
    throw ShapeError("kurtosis_ratio: dimension mismatch");
  }
  const double den = b.dot(v1 * b);
  if (!(den > 0.0)) throw DomainError("kurtosis_ratio: b'V1b must be positive");
  return b.dot(v2 * b) / den;
}

inline double kurtosis_ratio(const Vector& b, const ScatterEstimate& v1, const ScatterEstimate& v2) {
  return kurtosis_ratio(b, v1.matrix, v2.matrix);
}

// ---------------------------------------------------------------------------
// Component selection and distances
// ---------------------------------------------------------------------------

struct SelectionPolicy {
  enum class Kind { first, last, first_last };
  Kind kind = Kind::first;
  Index k1 = 1;
  Index k2 = 0;

  static SelectionPolicy first(Index k) { return {Kind::first, k, 0}; }
  static SelectionPolicy last(Index k) { return {Kind::last, 0, k}; }
  static SelectionPolicy first_last(Index k1, Index k2) { return {Kind::first_last, k1, k2}; }

  std::string name() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::first:
        os << "first:" << k1;
        break;
      case Kind::last:
        os << "last:" << k2;
        break;
      case Kind::first_last:
        os << "first-last:" << k1 << "," << k2;
        break;
    }
    return os.str();
  }

  /// first:k | last:k | first-last:k1,k2
  static SelectionPolicy parse(std::string_view text) {
    auto to_index = [&](std::string_view s) {
      Index v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
        throw ConfigError("selection policy: bad count '" + std::string(s) + "'");
      }
      return v;
    };
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("selection policy: expected first:k, last:k or first-last:k1,k2");
    }
    const std::string_view head = text.substr(0, colon);
    const std::string_view tail = text.substr(colon + 1);
    if (head == "first") return first(to_index(tail));
    if (head == "last") return last(to_index(tail));
    if (head == "first-last") {
      const auto comma = tail.find(',');
      if (comma == std::string_view::npos) {
        throw ConfigError("selection policy: first-last needs k1,k2");
      }
      return first_last(to_index(tail.substr(0, comma)), to_index(tail.substr(comma + 1)));
    }
    throw ConfigError("selection policy: unknown kind '" + std::string(head) + "'");
  }
};

/// Positions (0-based, in result order) of the selected components. Trivial
/// and flagged directions are skipped.
inline std::vector<Index> select_components(const std::vector<ExtEigenvalue>& eigenvalues,
                                            const SelectionPolicy& policy) {
  std::vector<Index> usable;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i].selectable()) usable.push_back(static_cast<Index>(i));
  }
  const Index m = static_cast<Index>(usable.size());
  const Index head = policy.kind == SelectionPolicy::Kind::last ? 0 : policy.k1;
  const Index tail = policy.kind == SelectionPolicy::Kind::first ? 0 : policy.k2;
  if (head + tail == 0) throw DomainError("select_components: empty selection");
  if (head + tail > m) {
    throw DomainError("select_components: " + policy.name() + " exceeds the " +
                      std::to_string(m) + " selectable components");
  }
  std::vector<Index> out(usable.begin(), usable.begin() + head);
  out.insert(out.end(), usable.end() - tail, usable.end());
  return out;
}

/// Squared ICS distances: row sums of squared scores over the selected columns.
inline Vector ics_distances(const Matrix& scores, std::span<const Index> selected) {
  if (selected.empty()) throw DomainError("ics_distances: empty selection");
  Vector d = Vector::Zero(scores.rows());
  for (Index j : selected) {
    if (j < 0 || j >= scores.cols()) throw DomainError("ics_distances: component out of range");
    d += scores.col(j).cwiseAbs2();
  }
  return d;
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

namespace detail {

struct Direction {
  ExtEigenvalue ev;
  double raw = 0.0;
  Vector b;
};

inline int kind_rank(const ExtEigenvalue& e) {
  if (e.kind == EigenKind::infinite) return 0;
  if (e.kind == EigenKind::trivial) return 3;
  return e.flagged ? 2 : 1;
}

/// Orders directions, fixes eigenvector signs and fills the result.
inline void assemble(IcsResult& res, std::vector<Direction> dirs, double tol) {
  std::stable_sort(dirs.begin(), dirs.end(), [](const Direction& a, const Direction& b) {
    const int ka = kind_rank(a.ev);
    const int kb = kind_rank(b.ev);
    if (ka != kb) return ka < kb;
    if (ka == 1) return a.ev.value() > b.ev.value();
    return false;
  });
  const Index k = static_cast<Index>(dirs.size());
  const Index p = k > 0 ? dirs.front().b.size() : 0;
  Matrix bt(p, k);
  res.eigenvalues.clear();
  res.classification.clear();
  res.raw_values.resize(k);
  for (Index j = 0; j < k; ++j) {
    const Direction& d = dirs[static_cast<std::size_t>(j)];
    bt.col(j) = d.b;
    res.eigenvalues.push_back(d.ev);
    res.classification.push_back(d.ev.flagged ? DirectionClass::null2_only
                                              : classify_direction(d.ev.alpha2, d.ev.beta2, tol));
    res.raw_values(j) = d.raw;
  }
  normalize_signs(bt);
  res.b = bt.transpose();
}

/// Snaps ratios with |rho| <= tol * max|rho| to zero.
inline std::vector<Direction> finite_directions(const Vector& rho, const Matrix& bt, double tol) {
  const double top = rho.size() > 0 ? rho.cwiseAbs().maxCoeff() : 0.0;
  std::vector<Direction> dirs;
  for (Index j = 0; j < rho.size(); ++j) {
    double v = rho(j);
    if (std::abs(v) <= tol * top) v = 0.0;
    if (v < 0.0) {
      throw NotPsdError("ics: negative generalized eigenvalue " + std::to_string(v) +
                        "; the second scatter matrix is not PSD");
    }
    dirs.push_back({ExtEigenvalue::finite(v), rho(j), bt.col(j)});
  }
  return dirs;
}

/// Symmetric route for a PSD v1: returns directions for range(v1) plus flagged
/// zero directions for null(v1).
inline std::vector<Direction> ginv_core(const Matrix& v1, const Matrix& v2, double tol) {
  const PsdRange range = psd_range(v1, sqrt_nu(), "V1");
  const Matrix w = range.basis * range.values.cwiseSqrt().cwiseInverse().asDiagonal();
  const Matrix m = w.transpose() * v2 * w;
  const SymEig eig = sym_eig(0.5 * (m + m.transpose()), "whitened V2");
  std::vector<Direction> dirs = finite_directions(eig.eigenvalues, w * eig.eigenvectors, tol);
  for (Index j = 0; j < range.null_basis.cols(); ++j) {
    ExtEigenvalue ev{EigenKind::finite, 0.0, 1.0, true};
    dirs.push_back({ev, 0.0, range.null_basis.col(j)});
  }
  return dirs;
}

/// Diagonalizes (v1 + v2)^+ v2. Eigenvalues mu in [0, 1] map to rho = mu / (1 - mu);
/// the common null space becomes trivial directions.
inline std::vector<Direction> pencil_sum_core(const Matrix& v1, const Matrix& v2, double tol) {
  const Matrix sum = v1 + v2;
  const PsdRange range = psd_range(sum, sqrt_nu(), "V1 + V2");
  const Matrix w = range.basis * range.values.cwiseSqrt().cwiseInverse().asDiagonal();
  const Matrix m = w.transpose() * v2 * w;
  const SymEig eig = sym_eig(0.5 * (m + m.transpose()), "whitened V2");
  std::vector<Direction> dirs;
  for (Index j = 0; j < eig.eigenvalues.size(); ++j) {
    const double mu = std::clamp(eig.eigenvalues(j), 0.0, 1.0);
    double a = std::sqrt(mu);
    double b = std::sqrt(1.0 - mu);
    const double top = std::max(a, b);
    if (a <= tol * top) a = 0.0;
    if (b <= tol * top) b = 0.0;
    const ExtEigenvalue ev = ExtEigenvalue::from_pair(a * a, b * b);
    Vector vec = w * eig.eigenvectors.col(j);
    // b'(V1 + V2)b = 1, so b'V1b = 1 - mu.
    if (ev.kind == EigenKind::finite) {
      vec /= std::sqrt(1.0 - mu);
    } else {
      vec.normalize();
    }
    dirs.push_back({ev, 1.0 - mu > 0.0 ? mu / (1.0 - mu) : std::numeric_limits<double>::infinity(),
                    vec});
  }
  for (Index j = 0; j < range.null_basis.cols(); ++j) {
    dirs.push_back({ExtEigenvalue::trivial(), std::numeric_limits<double>::quiet_NaN(),
                    range.null_basis.col(j)});
  }
  return dirs;
}

inline void check_pair(const ScatterEstimate& v1, const ScatterEstimate& v2) {
  if (v1.matrix.rows() != v2.matrix.rows() || v1.matrix.rows() == 0) {
    throw ShapeError("ics: scatter matrices must be non-empty and of equal size");
  }
}

}  // namespace detail

/// Classical ICS of a positive definite V1 by whitening. B V1 B' = I and
/// B V2 B' = diag(rho). Scores are left empty.
inline IcsResult ics_standard(const ScatterEstimate& v1, const ScatterEstimate& v2,
                              double tol = kSnapTol) {
  detail::check_pair(v1, v2);
  const Index p = v1.matrix.rows();
  const PsdRange range = psd_range(v1.matrix, sqrt_nu(), "V1");
  if (range.basis.cols() < p) {
    throw SingularityError("ics_standard: V1 (" + v1.estimator + ") is singular (rank " +
                           std::to_string(range.basis.cols()) + " < p = " + std::to_string(p) +
                           "); use the ginv, dr or gsvd method");
  }
  const Matrix w = range.basis * range.values.cwiseSqrt().cwiseInverse().asDiagonal();
  const Matrix m = w.transpose() * v2.matrix * w;
  const SymEig eig = sym_eig(0.5 * (m + m.transpose()), "whitened V2");
  IcsResult res;
  res.method = Method::standard;
  res.scatter1 = v1.estimator;
  res.scatter2 = v2.estimator;
  res.location = v1.location;
  res.rank = p;
  detail::assemble(res, detail::finite_directions(eig.eigenvalues, w * eig.eigenvectors, tol), tol);
  return res;
}

inline IcsResult ics_standard(const DataMatrix& x, const ScatterSpec& spec1, const ScatterSpec& spec2,
                              double tol = kSnapTol, std::span<const int> labels = {}) {
  const ScatterEstimate v1 = estimate_scatter(spec1, x, labels);
  const ScatterEstimate v2 = estimate_scatter(spec2, x, labels);
  IcsResult res = ics_standard(v1, v2, tol);
  res.scores = compute_scores(x, res.location, res.b);
  return res;
}

struct GinvOptions {
  /// Diagonalize (V1 + V2)^+ V2 instead of V1^+ V2.
  bool pencil_sum = false;
  /// Estimate V2 on the data whitened by V1^{+1/2}.
  bool whitened_v2 = false;
  double tol = kSnapTol;
};

/// ICS of V1^+ V2 through the symmetric route. null(V1) is returned as
/// flagged zero directions.
inline IcsResult ics_ginv(const ScatterEstimate& v1, const ScatterEstimate& v2,
                          const GinvOptions& opts = {}) {
  detail::check_pair(v1, v2);
  IcsResult res;
  res.method = Method::ginv;
  res.scatter1 = v1.estimator;
  res.scatter2 = v2.estimator;
  res.location = v1.location;
  auto dirs = opts.pencil_sum ? detail::pencil_sum_core(v1.matrix, v2.matrix, opts.tol)
                              : detail::ginv_core(v1.matrix, v2.matrix, opts.tol);
  res.rank = psd_range(v1.matrix, sqrt_nu(), "V1").basis.cols();
  detail::assemble(res, std::move(dirs), opts.tol);
  return res;
}

namespace detail {

inline ScatterEstimate estimate_with_context(const ScatterSpec& spec, const DataMatrix& x,
                                             std::span<const int> labels, std::string_view role) {
  try {
    return estimate_scatter(spec, x, labels);
  } catch (const HyperplaneError& e) {
    throw HyperplaneError(std::string(role) + " (" + spec.name() + "): " + e.what());
  } catch (const SingularityError& e) {
    throw SingularityError(std::string(role) + " (" + spec.name() + "): " + e.what());
  }
}

}  // namespace detail

inline IcsResult ics_ginv(const DataMatrix& x, const ScatterSpec& spec1, const ScatterSpec& spec2,
                          const GinvOptions& opts = {}, std::span<const int> labels = {}) {
  const ScatterEstimate v1 = detail::estimate_with_context(spec1, x, labels, "V1");
  if (!opts.whitened_v2) {
    const ScatterEstimate v2 = detail::estimate_with_context(spec2, x, labels, "V2");
    IcsResult res = ics_ginv(v1, v2, opts);
    res.scores = compute_scores(x, res.location, res.b);
    return res;
  }
  // V2 on Y = (X - 1T') P1 Lambda^{-1/2}; eigenvectors of V2(Y) pulled back.
  const PsdRange range = psd_range(v1.matrix, sqrt_nu(), "V1");
  const Matrix w = range.basis * range.values.cwiseSqrt().cwiseInverse().asDiagonal();
  const DataMatrix y = (x.rowwise() - v1.location.transpose()) * w;
  const ScatterEstimate v2 = detail::estimate_with_context(spec2, y, labels, "V2 (whitened)");
  const SymEig eig = sym_eig(v2.matrix, "V2 on whitened data");
  std::vector<detail::Direction> dirs =
      detail::finite_directions(eig.eigenvalues, w * eig.eigenvectors, opts.tol);
  for (Index j = 0; j < range.null_basis.cols(); ++j) {
    dirs.push_back({{EigenKind::finite, 0.0, 1.0, true}, 0.0, range.null_basis.col(j)});
  }
  IcsResult res;
  res.method = Method::ginv;
  res.scatter1 = v1.estimator;
  res.scatter2 = v2.estimator + " (whitened)";
  res.location = v1.location;
  res.rank = range.basis.cols();
  detail::assemble(res, std::move(dirs), opts.tol);
  res.scores = compute_scores(x, res.location, res.b);
  return res;
}

/// Reduces the centered data to its leading right singular vectors, then runs
/// classical ICS on the reduced data. Falls back to the pseudo-inverse route
/// (with a warning) when V1 is still singular after the reduction.
inline IcsResult ics_dr(const DataMatrix& x, const ScatterSpec& spec1, const ScatterSpec& spec2,
                        const RankRule& rule = RankRule::sqrt_eps(), double tol = kSnapTol,
                        std::span<const int> labels = {}) {
  if (x.rows() == 0 || x.cols() == 0) throw ShapeError("ics_dr: empty data");
  const Vector mean = location_mean(x);
  const ThinSvd svd = thin_svd(x.rowwise() - mean.transpose());
  const RankEstimate rank = estimate_rank(svd.singular_values, x.rows(), x.cols(), rule);
  if (rank.rank == 0) throw SingularityError("ics_dr: data has numerical rank 0");
  const Matrix p1 = svd.right_vectors.leftCols(rank.rank);
  const DataMatrix reduced = x * p1;

  const ScatterEstimate v1 = detail::estimate_with_context(spec1, reduced, labels, "V1 (reduced)");
  const ScatterEstimate v2 = detail::estimate_with_context(spec2, reduced, labels, "V2 (reduced)");

  IcsResult inner;
  std::vector<std::string> warnings;
  const Index r1 = psd_range(v1.matrix, sqrt_nu(), "V1 (reduced)").basis.cols();
  if (r1 == rank.rank) {
    inner = ics_standard(v1, v2, tol);
  } else {
    GinvOptions opts;
    opts.tol = tol;
    inner = ics_ginv(v1, v2, opts);
    warnings.push_back("dr: V1 on the reduced data has rank " + std::to_string(r1) + " < " +
                       std::to_string(rank.rank) + "; fell back to ginv on the reduced data");
  }

  IcsResult res;
  res.method = Method::dr;
  res.scatter1 = v1.estimator;
  res.scatter2 = v2.estimator;
  res.eigenvalues = inner.eigenvalues;
  res.classification = inner.classification;
  res.raw_values = inner.raw_values;
  res.rank = rank.rank;
  res.scores = compute_scores(reduced, inner.location, inner.b);
  // Eigenvectors mapped back to the original coordinates.
  res.b = inner.b * p1.transpose();
  res.location = p1 * inner.location;
  res.warnings = std::move(warnings);
  {
    std::ostringstream os;
    os << "dr: rank " << rank.rank << " under " << rank.rule;
    res.warnings.insert(res.warnings.begin(), os.str());
  }
  return res;
}

/// ICS through the GSVD of the crossproduct roots of V2 and V1. rho = alpha^2 / beta^2
/// with alpha paired with V2. The leading p - r columns of Q give trivial
/// directions; finite directions satisfy b'V1b = 1, infinite ones b'V2b = 1. The
/// latter is the factorization's own scale (alpha = 1) and, unlike a unit
/// Euclidean norm, survives X -> XA.
inline IcsResult ics_gsvd(const CrossproductRoot& root1, const CrossproductRoot& root2,
                          double tol = kSnapTol) {
  if (root1.root.cols() != root2.root.cols() || root1.root.cols() == 0) {
    throw ShapeError("ics_gsvd: roots must have the same, nonzero number of columns");
  }
  const GsvdFactors g = gsvd_pair(root2.root, root1.root);
  const Index p = root1.root.cols();
  const Index r = g.r;
  const Matrix bt = g.eigenvector_columns();

  std::vector<detail::Direction> dirs;
  for (Index j = 0; j < p - r; ++j) {
    dirs.push_back({ExtEigenvalue::trivial(), std::numeric_limits<double>::quiet_NaN(), bt.col(j)});
  }
  for (Index j = 0; j < r; ++j) {
    double a = g.alphas(j);
    double b = g.betas(j);
    const double raw = b > 0.0 ? (a * a) / (b * b) : std::numeric_limits<double>::infinity();
    const double top = std::max(a, b);
    if (a <= tol * top) a = 0.0;
    if (b <= tol * top) b = 0.0;
    const ExtEigenvalue ev = ExtEigenvalue::from_pair(a * a, b * b);
    Vector vec = bt.col(p - r + j);
    if (ev.kind == EigenKind::finite) {
      const double n1 = (root1.root * vec).norm();
      vec /= n1;
    } else {
      vec /= (root2.root * vec).norm();
    }
    dirs.push_back({ev, raw, vec});
  }

  IcsResult res;
  res.method = Method::gsvd;
  res.scatter1 = root1.estimator;
  res.scatter2 = root2.estimator;
  res.location = root1.location;
  res.rank = r;
  detail::assemble(res, std::move(dirs), tol);
  return res;
}

inline IcsResult ics_gsvd(const DataMatrix& x, const ScatterSpec& spec1, const ScatterSpec& spec2,
                          double tol = kSnapTol, std::span<const int> labels = {}) {
  const CrossproductRoot root1 = crossproduct_root(spec1, x, labels);
  const CrossproductRoot root2 = crossproduct_root(spec2, x, labels);
  IcsResult res = ics_gsvd(root1, root2, tol);
  res.scores = compute_scores(x, res.location, res.b);
  return res;
}

}  // namespace ics_psd
