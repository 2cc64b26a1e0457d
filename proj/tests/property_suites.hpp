#pragma once

// Seeded property suites shared by the gtest property binary and the
// acceptance report. Each suite runs `instances` seeded cases and returns the
// worst observed violation next to the tolerance it must stay under.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ics_psd/ics_psd.hpp"
#include "support.hpp"

namespace props {

using namespace ics_psd;
using testsupport::Gen;
using testsupport::max_abs;

struct SuiteResult {
  std::string name;
  double worst = 0.0;
  double tol = 0.0;
  int instances = 0;
  std::string detail;

  bool ok() const { return instances > 0 && worst <= tol; }
};

inline constexpr std::uint64_t kBaseSeed = 20240601;

inline std::uint64_t seed_for(int suite, int i) {
  return kBaseSeed + 1000003ULL * static_cast<std::uint64_t>(suite) + static_cast<std::uint64_t>(i);
}

inline double rel(const Matrix& diff, const Matrix& ref) { return max_abs(diff) / std::max(1.0, max_abs(ref)); }

/// Affine equivariance of cov and cov4 under X -> XA + 1 gamma'.
inline SuiteResult affine_equivariance(int instances = 50) {
  SuiteResult r{"scatter affine equivariance (cov, cov4)", 0.0, 1e-8, instances, ""};
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(1, i));
    const Index p = g.integer(2, 5);
    const DataMatrix x = g.heavy(g.integer(3 * p + 5, 60), p);
    const Matrix a = g.nonsingular(p);
    const Vector gamma = g.gaussian(p, 1);
    const DataMatrix y = (x * a).rowwise() + gamma.transpose();
    for (auto f : {&cov, &cov4}) {
      const Matrix lhs = f(y).matrix;
      const Matrix rhs = a.transpose() * f(x).matrix * a;
      r.worst = std::max(r.worst, rel(lhs - rhs, rhs));
    }
  }
  return r;
}

/// Data on the hyperplane M'x = m, mapped by A = [L M]: the trailing rows
/// and columns of V(XA) vanish. The leading block is V(XL) up to the
/// dimension constant of the estimator ((r+2)/(p+2) for covg4, 1 for cov).
inline SuiteResult tyler_block_structure(int instances = 50) {
  SuiteResult r{"Tyler block structure (cov, covg4)", 0.0, 1e-10, instances, ""};
  double lead = 0.0;
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(2, i));
    const Index p = g.integer(3, 6);
    const Index k = g.integer(1, p - 1);
    const Index rr = p - k;
    const Matrix m_mat = g.gaussian(p, k);
    // Orthonormal basis of null(M').
    Eigen::JacobiSVD<Matrix> svd(m_mat.transpose(), Eigen::ComputeFullV);
    const Matrix basis = svd.matrixV().rightCols(rr);
    const Vector x0 = g.gaussian(p, 1);
    const DataMatrix z = g.heavy(g.integer(3 * p + 5, 50), rr);
    const DataMatrix x = (z * basis.transpose()).rowwise() + x0.transpose();
    const Matrix l = g.gaussian(p, rr);
    Matrix a(p, p);
    a << l, m_mat;
    const double dim_factor = static_cast<double>(rr + 2) / static_cast<double>(p + 2);
    for (int which = 0; which < 2; ++which) {
      const Matrix v = which == 0 ? cov(x * a).matrix : covg4(x * a).matrix;
      const Matrix vl = which == 0 ? cov(x * l).matrix : Matrix(dim_factor * covg4(x * l).matrix);
      const double scale = std::max(1.0, max_abs(v));
      r.worst = std::max(r.worst, max_abs(v.bottomRows(k)) / scale);
      r.worst = std::max(r.worst, max_abs(v.rightCols(k)) / scale);
      lead = std::max(lead, rel(v.topLeftCorner(rr, rr) - vl, vl));
    }
  }
  // The leading block is a recomputation rather than an exact zero, so it
  // carries the looser 1e-8 bound.
  if (!(lead <= 1e-8)) r.worst = std::max(r.worst, 1.0);
  char buf[96];
  std::snprintf(buf, sizeof buf, "leading block %.2e (bound 1e-8)", lead);
  r.detail = buf;
  return r;
}

/// The four Moore-Penrose conditions for pinv_psd on random PSD matrices.
inline SuiteResult moore_penrose(int instances = 50) {
  SuiteResult r{"Moore-Penrose conditions", 0.0, 1e-8, instances, ""};
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(3, i));
    const Index p = g.integer(2, 8);
    const Matrix s = g.psd(p, g.integer(1, p));
    const Matrix gi = pinv_psd(s);
    const double sc = std::max(1.0, max_abs(s));
    const double gc = std::max(1.0, max_abs(gi));
    r.worst = std::max({r.worst, max_abs(s * gi * s - s) / sc, max_abs(gi * s * gi - gi) / gc,
                        max_abs((s * gi).transpose() - s * gi), max_abs((gi * s).transpose() - gi * s)});
  }
  return r;
}

/// Reconstruction and D1'D1 + D2'D2 = I for the GSVD of random pairs, with
/// random shapes and ranks.
inline SuiteResult gsvd_identities(int instances = 50) {
  SuiteResult r{"GSVD factor identities", 0.0, 1e-10, instances, ""};
  double recon = 0.0;
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(4, i));
    const Index p = g.integer(2, 7);
    const Index ra = g.integer(1, p);
    const Index rb = g.integer(1, p);
    const Matrix a = g.gaussian(g.integer(1, 12), ra) * g.gaussian(ra, p);
    const Matrix b = g.gaussian(g.integer(1, 12), rb) * g.gaussian(rb, p);
    const GsvdFactors f = gsvd_pair(a, b);
    const Matrix zr = f.shared_right();
    const double scale = std::max(max_abs(a), max_abs(b));
    // Reconstruction carries the looser 1e-8 relative bound, gated below.
    recon = std::max({recon, max_abs(f.u * f.d1 * zr - a) / scale, max_abs(f.v * f.d2 * zr - b) / scale});
    r.worst = std::max(r.worst, max_abs(f.d1.transpose() * f.d1 + f.d2.transpose() * f.d2 - Matrix::Identity(f.r, f.r)));
    // Rank of the stacked pair.
    Matrix stacked(a.rows() + b.rows(), p);
    stacked << a, b;
    const Index expect = estimate_rank(thin_svd(stacked).singular_values, stacked.rows(), p).rank;
    if (expect != f.r) r.worst = std::max(r.worst, 1.0);
  }
  if (!(recon <= 1e-8)) r.worst = std::max(r.worst, 1.0);
  char buf[96];
  std::snprintf(buf, sizeof buf, "worst reconstruction %.2e (bound 1e-8)", recon);
  r.detail = buf;
  return r;
}

/// standard(cov, cov4), ginv(cov, cov4), dr(cov, cov4) and gsvd(cov, covg4)
/// agree on full-rank data.
inline SuiteResult full_rank_agreement(int instances = 50) {
  SuiteResult r{"full-rank four-method eigenvalue agreement", 0.0, 1e-8, instances, ""};
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(5, i));
    const Index p = g.integer(2, 5);
    const DataMatrix x = g.heavy(g.integer(5 * p + 10, 80), p);
    const IcsResult s = ics_standard(x, ScatterSpec::cov(), ScatterSpec::cov4());
    const IcsResult gi = ics_ginv(x, ScatterSpec::cov(), ScatterSpec::cov4());
    const IcsResult d = ics_dr(x, ScatterSpec::cov(), ScatterSpec::cov4());
    const IcsResult gs = ics_gsvd(x, ScatterSpec::cov(), ScatterSpec::covg4());
    for (const IcsResult* other : {&gi, &d, &gs}) {
      if (other->size() != s.size()) {
        r.worst = std::max(r.worst, 1.0);
        continue;
      }
      for (std::size_t j = 0; j < s.eigenvalues.size(); ++j) {
        const double a = s.eigenvalues[j].value();
        const double b = other->eigenvalues[j].value();
        r.worst = std::max(r.worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
      }
    }
  }
  return r;
}

/// GINV(cov, covg4) and DR(cov, cov4) give the same scores up to sign on
/// rank-deficient data.
inline SuiteResult ginv_dr_equivalence(int instances = 50) {
  SuiteResult r{"GINV = DR with V1 = cov (scores up to sign)", 0.0, 1e-7, instances, ""};
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(6, i));
    const Index p = g.integer(3, 7);
    const Index rank = g.integer(2, p - 1);
    const DataMatrix x = g.rank_deficient(g.integer(4 * p + 10, 80), p, rank);
    const IcsResult gi = ics_ginv(x, ScatterSpec::cov(), ScatterSpec::covg4());
    const IcsResult d = ics_dr(x, ScatterSpec::cov(), ScatterSpec::cov4());
    const Index k = d.size();
    if (gi.rank != k) {
      r.worst = std::max(r.worst, 1.0);
      continue;
    }
    r.worst = std::max(r.worst, testsupport::diff_up_to_column_signs(gi.scores.leftCols(k), d.scores) /
                                    std::max(1.0, max_abs(d.scores)));
  }
  return r;
}

/// Swapping the two roots maps (alpha2, beta2) to (beta2, alpha2).
inline SuiteResult gsvd_exchange(int instances = 50) {
  SuiteResult r{"GSVD exchange symmetry", 0.0, 1e-8, instances, ""};
  int infinite_seen = 0;
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(7, i));
    const Index p = g.integer(3, 6);
    // Roots with partly shared row spaces so that zero and infinite ratios occur.
    const Index shared = g.integer(1, p - 1);
    const Matrix common = g.gaussian(shared, p);
    Matrix a(shared + 1, p);
    a << common, g.gaussian(1, p);
    Matrix b(shared + 1, p);
    b << common, g.gaussian(1, p);
    CrossproductRoot ra;
    ra.root = g.gaussian(10, shared + 1) * a;
    ra.location = Vector::Zero(p);
    CrossproductRoot rb;
    rb.root = g.gaussian(12, shared + 1) * b;
    rb.location = Vector::Zero(p);
    const IcsResult f = ics_gsvd(ra, rb);
    const IcsResult s = ics_gsvd(rb, ra);
    auto pairs = [](const IcsResult& res, bool swap) {
      std::vector<std::pair<double, double>> out;
      for (const auto& e : res.eigenvalues) {
        if (e.kind == EigenKind::trivial) continue;
        out.emplace_back(swap ? e.beta2 : e.alpha2, swap ? e.alpha2 : e.beta2);
      }
      std::sort(out.begin(), out.end());
      return out;
    };
    const auto pf = pairs(f, false);
    const auto ps = pairs(s, true);
    if (pf.size() != ps.size()) {
      r.worst = std::max(r.worst, 1.0);
      continue;
    }
    for (std::size_t j = 0; j < pf.size(); ++j) {
      r.worst = std::max({r.worst, std::abs(pf[j].first - ps[j].first), std::abs(pf[j].second - ps[j].second)});
      if (pf[j].second == 0.0) ++infinite_seen;
    }
  }
  r.detail = std::to_string(infinite_seen) + " infinite/zero pairs exercised";
  return r;
}

/// Non-trivial GINV eigenvectors lie in range(V1).
inline SuiteResult ginv_range(int instances = 50) {
  SuiteResult r{"GINV range restriction", 0.0, 1e-8, instances, ""};
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(8, i));
    const Index p = g.integer(3, 7);
    const Matrix v1 = g.psd(p, g.integer(1, p - 1));
    const Matrix v2 = g.psd(p, g.integer(1, p));
    ScatterEstimate s1{v1, Vector::Zero(p), "v1", 0, {}, {}};
    ScatterEstimate s2{v2, Vector::Zero(p), "v2", 0, {}, {}};
    const IcsResult res = ics_ginv(s1, s2);
    const PsdRange range = psd_range(v1);
    const Matrix proj = Matrix::Identity(p, p) - range.basis * range.basis.transpose();
    for (Index j = 0; j < res.size(); ++j) {
      if (!res.eigenvalues[static_cast<std::size_t>(j)].selectable()) continue;
      const Vector b = res.b.row(j).transpose();
      r.worst = std::max(r.worst, (proj * b).norm() / b.norm());
    }
  }
  return r;
}

/// Monte-Carlo kurtosis ratios over 1000 random directions stay inside
/// [rho_p, rho_1].
inline SuiteResult sup_inf(int instances = 50) {
  SuiteResult r{"sup/inf characterization of rho_1 and rho_p", 0.0, 1e-8, instances, ""};
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(9, i));
    const Index p = g.integer(2, 6);
    const DataMatrix x = g.heavy(g.integer(5 * p + 10, 80), p);
    const ScatterEstimate v1 = cov(x);
    const ScatterEstimate v2 = cov4(x);
    const IcsResult res = ics_standard(v1, v2);
    const double hi = res.eigenvalues.front().value();
    const double lo = res.eigenvalues.back().value();
    for (int k = 0; k < 1000; ++k) {
      Vector b = g.gaussian(p, 1);
      b.normalize();
      const double q = kurtosis_ratio(b, v1, v2);
      r.worst = std::max({r.worst, q - hi, lo - q});
    }
  }
  return r;
}

/// b V1 b' = 1 for every finite, selectable direction of every method.
inline SuiteResult score_validity(int instances = 50) {
  SuiteResult r{"score normalization b'V1b = 1", 0.0, 1e-8, instances, ""};
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(10, i));
    const Index p = g.integer(3, 6);
    const DataMatrix x = g.rank_deficient(g.integer(4 * p + 10, 70), p, g.integer(2, p - 1));
    const Matrix v1 = cov(x).matrix;
    std::vector<IcsResult> results{ics_ginv(x, ScatterSpec::cov(), ScatterSpec::covg4()),
                                   ics_dr(x, ScatterSpec::cov(), ScatterSpec::cov4()),
                                   ics_gsvd(x, ScatterSpec::cov(), ScatterSpec::covg4())};
    for (const IcsResult& res : results) {
      for (Index j = 0; j < res.size(); ++j) {
        const ExtEigenvalue& e = res.eigenvalues[static_cast<std::size_t>(j)];
        if (!e.selectable() || e.kind != EigenKind::finite) continue;
        const Vector b = res.b.row(j).transpose();
        r.worst = std::max(r.worst, std::abs(b.dot(v1 * b) - 1.0));
      }
    }
  }
  return r;
}

/// GSVD scores and eigenvalues are unchanged (up to sign) by X -> XA + 1 gamma'.
inline SuiteResult gsvd_affine_invariance(int instances = 50) {
  SuiteResult r{"GSVD affine invariance (cov, covg4)", 0.0, 1e-6, instances, ""};
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(11, i));
    const Index p = g.integer(3, 6);
    const DataMatrix x = g.rank_deficient(g.integer(4 * p + 10, 70), p, g.integer(2, p - 1));
    const Matrix a = g.nonsingular(p);
    const Vector gamma = g.gaussian(p, 1);
    const DataMatrix y = (x * a).rowwise() + gamma.transpose();
    const IcsResult fx = ics_gsvd(x, ScatterSpec::cov(), ScatterSpec::covg4());
    const IcsResult fy = ics_gsvd(y, ScatterSpec::cov(), ScatterSpec::covg4());
    if (fx.size() != fy.size() || fx.rank != fy.rank) {
      r.worst = std::max(r.worst, 1.0);
      continue;
    }
    const Index k = fx.rank;
    for (Index j = 0; j < k; ++j) {
      const double vx = fx.eigenvalues[static_cast<std::size_t>(j)].value();
      const double vy = fy.eigenvalues[static_cast<std::size_t>(j)].value();
      r.worst = std::max(r.worst, std::abs(vx - vy) / std::max(1.0, vx));
    }
    r.worst = std::max(r.worst, testsupport::diff_up_to_column_signs(fx.scores.leftCols(k), fy.scores.leftCols(k)) /
                                    std::max(1.0, max_abs(fx.scores.leftCols(k))));
  }
  return r;
}

/// GINV scores are invariant up to sign under orthogonal maps. When range(V1)
/// is not the data span a generic non-orthogonal map changes the eigenvalues;
/// with V1 = cov it does not, since GINV then coincides with DR.
inline SuiteResult ginv_orthogonal_invariance(int instances = 50) {
  SuiteResult r{"GINV orthogonal invariance", 0.0, 1e-6, instances, ""};
  double smallest_generic_gap = INFINITY;
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(12, i));
    const Index p = g.integer(3, 6);
    const DataMatrix x = g.rank_deficient(g.integer(4 * p + 10, 70), p, g.integer(2, p - 1));
    const Matrix q = g.orthogonal(p);
    const IcsResult fx = ics_ginv(x, ScatterSpec::cov(), ScatterSpec::covg4());
    const IcsResult fq = ics_ginv(x * q, ScatterSpec::cov(), ScatterSpec::covg4());
    const Index k = fx.rank;
    r.worst = std::max(r.worst, testsupport::diff_up_to_column_signs(fx.scores.leftCols(k), fq.scores.leftCols(k)) /
                                    std::max(1.0, max_abs(fx.scores.leftCols(k))));

    const Matrix v1 = g.psd(p, g.integer(1, p - 1));
    const Matrix v2 = g.psd(p, p);
    const Matrix a = g.nonsingular(p);
    auto values = [](const Matrix& m1, const Matrix& m2) {
      const Index n = m1.rows();
      const IcsResult res = ics_ginv(ScatterEstimate{m1, Vector::Zero(n), "", 0, {}, {}},
                                     ScatterEstimate{m2, Vector::Zero(n), "", 0, {}, {}});
      Vector out(res.rank);
      for (Index j = 0; j < res.rank; ++j) out(j) = res.eigenvalues[static_cast<std::size_t>(j)].value();
      return out;
    };
    const Vector base = values(v1, v2);
    const Vector rotated = values(q.transpose() * v1 * q, q.transpose() * v2 * q);
    const Vector moved = values(a.transpose() * v1 * a, a.transpose() * v2 * a);
    r.worst = std::max(r.worst, (base - rotated).cwiseAbs().maxCoeff() / std::max(1.0, base(0)));
    smallest_generic_gap = std::min(smallest_generic_gap, (base - moved).cwiseAbs().maxCoeff() / std::max(1.0, base(0)));
  }
  if (!(smallest_generic_gap > 1e-3)) r.worst = std::max(r.worst, 1.0);
  char buf[96];
  std::snprintf(buf, sizeof buf, "smallest non-orthogonal eigenvalue change %.2e (must exceed 1e-3)", smallest_generic_gap);
  r.detail = buf;
  return r;
}

/// covg4 = cov4 on full-rank data.
inline SuiteResult covg4_equals_cov4(int instances = 50) {
  SuiteResult r{"covg4 = cov4 on full rank", 0.0, 1e-10, instances, ""};
  for (int i = 0; i < instances; ++i) {
    Gen g(seed_for(13, i));
    const Index p = g.integer(2, 6);
    const DataMatrix x = g.heavy(g.integer(3 * p + 5, 60), p);
    r.worst = std::max(r.worst, rel(covg4(x).matrix - cov4(x).matrix, cov4(x).matrix));
  }
  return r;
}

/// The suites listed under the property-suite acceptance criterion.
inline std::vector<std::function<SuiteResult()>> criterion_suites() {
  return {[] { return affine_equivariance(); },  [] { return tyler_block_structure(); },
          [] { return moore_penrose(); },        [] { return gsvd_identities(); },
          [] { return full_rank_agreement(); },  [] { return ginv_dr_equivalence(); },
          [] { return gsvd_exchange(); },        [] { return ginv_range(); },
          [] { return sup_inf(); }};
}

}  // namespace props
