#pragma once

// Location and scatter estimators, including the pseudo-inverse fourth-moment
// scatter and crossproduct roots for the GSVD solver.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "ics_psd/errors.hpp"
#include "ics_psd/linalg.hpp"
#include "ics_psd/random.hpp"

namespace ics_psd {

enum class Estimator { cov, cov4, covg4, mcd, mrcd };

/// Estimator identifier plus its tuning parameters.
struct ScatterSpec {
  Estimator kind = Estimator::cov;
  double alpha = 0.5;
  /// mrcd shrinkage; empty selects it on the auto grid.
  std::optional<double> rho;
  /// Restricts cov to the rows carrying this label (needs labels at estimation time).
  std::optional<int> label;
  std::uint64_t seed = 0;

  static ScatterSpec cov() { return {}; }
  static ScatterSpec cov4() { return {Estimator::cov4, 0.5, std::nullopt, std::nullopt, 0}; }
  static ScatterSpec covg4() { return {Estimator::covg4, 0.5, std::nullopt, std::nullopt, 0}; }
  static ScatterSpec mcd(double alpha, std::uint64_t seed = 0) {
    return {Estimator::mcd, alpha, std::nullopt, std::nullopt, seed};
  }
  static ScatterSpec mrcd(double alpha, std::optional<double> rho = std::nullopt,
                          std::uint64_t seed = 0) {
    return {Estimator::mrcd, alpha, rho, std::nullopt, seed};
  }
  static ScatterSpec cov_on_label(int label) {
    return {Estimator::cov, 0.5, std::nullopt, label, 0};
  }

  /// Only cov and covg4 factor as X'X with a data-derived X.
  bool has_root() const { return kind == Estimator::cov || kind == Estimator::covg4; }

  std::string name() const {
    std::ostringstream os;
    switch (kind) {
      case Estimator::cov:
        os << "cov";
        if (label) os << ":label=" << *label;
        break;
      case Estimator::cov4:
        os << "cov4";
        break;
      case Estimator::covg4:
        os << "covg4";
        break;
      case Estimator::mcd:
        os << "mcd:alpha=" << alpha;
        break;
      case Estimator::mrcd:
        os << "mrcd:alpha=" << alpha << ",rho=";
        if (rho) {
          os << *rho;
        } else {
          os << "auto";
        }
        break;
    }
    return os.str();
  }

  /// Grammar: cov | cov:label=K | cov4 | covg4 | mcd:alpha=A | mrcd:alpha=A,rho=R|auto
  static ScatterSpec parse(std::string_view text);
};

struct ScatterEstimate {
  Matrix matrix;
  Vector location;
  std::string estimator;
  Index rank = 0;
  /// Original row indices of the retained subset (subset estimators only).
  std::vector<Index> support;
  std::vector<std::string> notes;
};

/// root' * root reproduces the scatter matrix of the same estimator.
struct CrossproductRoot {
  Matrix root;
  Vector location;
  std::string estimator;
  std::string scale_note;
};

namespace detail {

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("scatter spec: cannot parse " + std::string(what) + " value '" +
                      std::string(s) + "'");
  }
  return v;
}

inline Index psd_rank(const Matrix& s) {
  if (s.size() == 0) return 0;
  const SymEig eig = sym_eig(s, "scatter matrix");
  const Vector spectrum = eig.eigenvalues.cwiseMax(0.0);
  return estimate_rank(spectrum, s.rows(), s.cols()).rank;
}

inline ScatterEstimate finish(Matrix m, Vector location, std::string name) {
  ScatterEstimate est;
  est.matrix = 0.5 * (m + m.transpose());
  est.location = std::move(location);
  est.estimator = std::move(name);
  est.rank = psd_rank(est.matrix);
  return est;
}

inline void require_rows(const DataMatrix& x, Index min_rows, std::string_view who) {
  if (x.cols() == 0) throw ShapeError(std::string(who) + ": data has no columns");
  if (x.rows() == 0) throw ShapeError(std::string(who) + ": data has no rows");
  if (x.rows() < min_rows) {
    throw SampleSizeError(std::string(who) + ": needs at least " + std::to_string(min_rows) +
                          " observations, got " + std::to_string(x.rows()));
  }
}

inline Matrix centered(const DataMatrix& x, const Vector& location) {
  return x.rowwise() - location.transpose();
}

/// Squared Mahalanobis distances of centered rows under a (pseudo-)inverse.
inline Vector squared_distances(const Matrix& centered_rows, const Matrix& inverse) {
  return ((centered_rows * inverse).cwiseProduct(centered_rows)).rowwise().sum();
}

inline Vector cov_inverse_distances(const Matrix& xc, const Matrix& cov_matrix, bool pseudo) {
  if (pseudo) return squared_distances(xc, pinv_psd(cov_matrix));
  const SymEig eig = sym_eig(cov_matrix, "cov");
  const Matrix inv =
      eig.eigenvectors * eig.eigenvalues.cwiseInverse().asDiagonal() * eig.eigenvectors.transpose();
  return squared_distances(xc, inv);
}

}  // namespace detail

inline ScatterSpec ScatterSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view tail = colon == std::string_view::npos ? "" : text.substr(colon + 1);

  ScatterSpec spec;
  if (head == "cov") {
    spec.kind = Estimator::cov;
  } else if (head == "cov4") {
    spec.kind = Estimator::cov4;
  } else if (head == "covg4") {
    spec.kind = Estimator::covg4;
  } else if (head == "mcd") {
    spec.kind = Estimator::mcd;
  } else if (head == "mrcd") {
    spec.kind = Estimator::mrcd;
  } else {
    throw ConfigError("scatter spec: unknown estimator '" + std::string(head) + "'");
  }

  std::string_view rest = tail;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? "" : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("scatter spec: expected key=value, got '" + std::string(item) + "'");
    }
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    const bool subset = spec.kind == Estimator::mcd || spec.kind == Estimator::mrcd;
    if (key == "alpha" && subset) {
      spec.alpha = detail::parse_double(value, "alpha");
    } else if (key == "rho" && spec.kind == Estimator::mrcd) {
      if (value == "auto") {
        spec.rho.reset();
      } else {
        spec.rho = detail::parse_double(value, "rho");
      }
    } else if (key == "label" && spec.kind == Estimator::cov) {
      spec.label = static_cast<int>(detail::parse_double(value, "label"));
    } else {
      throw ConfigError("scatter spec: parameter '" + std::string(key) + "' not valid for " +
                        std::string(head));
    }
  }
  if ((spec.kind == Estimator::mcd || spec.kind == Estimator::mrcd) &&
      !(spec.alpha >= 0.5 && spec.alpha <= 1.0)) {
    throw ConfigError("scatter spec: alpha must lie in [0.5, 1]");
  }
  if (spec.rho && !(*spec.rho > 0.0 && *spec.rho <= 1.0)) {
    throw ConfigError("scatter spec: rho must lie in (0, 1] or be 'auto'");
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Moment-based estimators
// ---------------------------------------------------------------------------

inline Vector location_mean(const DataMatrix& x) {
  detail::require_rows(x, 1, "location_mean");
  return x.colwise().mean().transpose();
}

/// Sample covariance with the n - 1 divisor.
inline ScatterEstimate cov(const DataMatrix& x) {
  detail::require_rows(x, 2, "cov");
  Vector mean = location_mean(x);
  const Matrix xc = detail::centered(x, mean);
  Matrix m = (xc.transpose() * xc) / static_cast<double>(x.rows() - 1);
  return detail::finish(std::move(m), std::move(mean), "cov");
}

namespace detail {

inline ScatterEstimate fourth_moment(const DataMatrix& x, bool pseudo) {
  const std::string name = pseudo ? "covg4" : "cov4";
  require_rows(x, 2, name);
  const ScatterEstimate c = cov(x);
  const Index p = x.cols();
  if (!pseudo && c.rank < p) {
    throw SingularityError("cov4: cov is singular (rank " + std::to_string(c.rank) + " < p = " +
                           std::to_string(p) + "); use covg4, which relies on the pseudo-inverse");
  }
  const Matrix xc = centered(x, c.location);
  const Vector r2 = cov_inverse_distances(xc, c.matrix, pseudo);
  const double scale = 1.0 / (static_cast<double>(p + 2) * static_cast<double>(x.rows()));
  Matrix m = scale * (xc.transpose() * r2.asDiagonal() * xc);
  return finish(std::move(m), c.location, name);
}

}  // namespace detail

/// Scatter of fourth moments, (1/((p+2)n)) sum r_i^2 (x_i - m)(x_i - m)'.
inline ScatterEstimate cov4(const DataMatrix& x) { return detail::fourth_moment(x, false); }

/// cov4 with the Mahalanobis distances taken under cov^+; defined for any rank.
inline ScatterEstimate covg4(const DataMatrix& x) { return detail::fourth_moment(x, true); }

// ---------------------------------------------------------------------------
// Subset estimators (MCD, MRCD)
// ---------------------------------------------------------------------------

struct SubsetSearchOptions {
  Index n_starts = 500;
  Index initial_csteps = 2;
  Index n_refine = 10;
  Index max_csteps = 100;
};

namespace detail {

/// Row order sorted lexicographically; ties keep the original order.
inline std::vector<Index> canonical_order(const DataMatrix& x) {
  std::vector<Index> idx(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) idx[static_cast<std::size_t>(i)] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) < x(b, j)) return true;
      if (x(a, j) > x(b, j)) return false;
    }
    return false;
  });
  return idx;
}

struct SubsetFit {
  std::vector<Index> subset;  // sorted row indices into the canonical data
  Vector mean;
  Matrix scatter;  // after regularization, used for distances
  Matrix raw;      // subset covariance with the 1/h divisor
  double logdet = 0.0;
  bool singular = false;
};

/// Maps a raw subset covariance to the matrix whose determinant is minimized.
struct Regularizer {
  double rho = 0.0;       // 0 disables the blend (plain MCD)
  double target = 1.0;    // scaled-identity target
  double consistency = 1.0;

  Matrix apply(const Matrix& raw) const {
    if (rho == 0.0) return raw;
    Matrix k = (1.0 - rho) * consistency * raw;
    k.diagonal().array() += rho * target;
    return k;
  }
};

inline SubsetFit fit_subset(const DataMatrix& xs, std::vector<Index> subset,
                            const Regularizer& reg) {
  std::sort(subset.begin(), subset.end());
  SubsetFit fit;
  const Index h = static_cast<Index>(subset.size());
  const Index p = xs.cols();
  Matrix rows(h, p);
  for (Index i = 0; i < h; ++i) rows.row(i) = xs.row(subset[static_cast<std::size_t>(i)]);
  fit.mean = rows.colwise().mean().transpose();
  const Matrix rc = rows.rowwise() - fit.mean.transpose();
  fit.raw = (rc.transpose() * rc) / static_cast<double>(h);
  fit.scatter = reg.apply(fit.raw);
  fit.subset = std::move(subset);
  const SymEig eig = sym_eig(0.5 * (fit.scatter + fit.scatter.transpose()), "subset scatter");
  const Vector spectrum = eig.eigenvalues.cwiseMax(0.0);
  if (estimate_rank(spectrum, p, p).rank < p) {
    fit.singular = true;
    fit.logdet = -std::numeric_limits<double>::infinity();
    return fit;
  }
  fit.logdet = spectrum.array().log().sum();
  return fit;
}

/// One concentration step: keep the h rows closest under the current fit.
inline SubsetFit c_step(const DataMatrix& xs, const SubsetFit& fit, Index h,
                        const Regularizer& reg) {
  const SymEig eig = sym_eig(0.5 * (fit.scatter + fit.scatter.transpose()), "subset scatter");
  const Matrix inv =
      eig.eigenvectors * eig.eigenvalues.cwiseInverse().asDiagonal() * eig.eigenvectors.transpose();
  const Vector d = squared_distances(xs.rowwise() - fit.mean.transpose(), inv);
  std::vector<Index> order(static_cast<std::size_t>(xs.rows()));
  for (Index i = 0; i < xs.rows(); ++i) order[static_cast<std::size_t>(i)] = i;
  auto closer = [&](Index a, Index b) { return d(a) < d(b) || (d(a) == d(b) && a < b); };
  std::nth_element(order.begin(), order.begin() + (h - 1), order.end(), closer);
  order.resize(static_cast<std::size_t>(h));
  return fit_subset(xs, std::move(order), reg);
}

inline SubsetFit concentrate(const DataMatrix& xs, SubsetFit fit, Index h, const Regularizer& reg,
                             Index max_steps) {
  for (Index step = 0; step < max_steps && !fit.singular; ++step) {
    SubsetFit next = c_step(xs, fit, h, reg);
    if (next.subset == fit.subset) break;
    if (next.singular) return next;
    if (next.logdet > fit.logdet) break;
    fit = std::move(next);
  }
  return fit;
}

struct Candidate {
  SubsetFit fit;
  Index start = 0;
};

inline bool better(const Candidate& a, const Candidate& b) {
  return a.fit.logdet < b.fit.logdet || (a.fit.logdet == b.fit.logdet && a.start < b.start);
}

/// Multi-start concentration search on canonically ordered data. Returns
/// nothing when every candidate collapses onto a singular subset.
inline std::optional<Candidate> subset_search(const DataMatrix& xs, Index h, std::uint64_t seed,
                                              const Regularizer& reg,
                                              const SubsetSearchOptions& opts,
                                              const std::vector<std::vector<Index>>& extra_starts) {
  const Index n = xs.rows();
  const Index p = xs.cols();
  std::vector<Candidate> pool;
  pool.reserve(static_cast<std::size_t>(opts.n_starts) + extra_starts.size());

  auto run_start = [&](std::vector<Index> initial, std::vector<Index> extended, Index start) {
    SubsetFit fit = fit_subset(xs, std::move(initial), reg);
    if (fit.singular) {
      fit = fit_subset(xs, std::move(extended), reg);
      if (fit.singular) return;
    }
    for (Index s = 0; s < opts.initial_csteps && !fit.singular; ++s) {
      fit = c_step(xs, fit, h, reg);
    }
    if (!fit.singular) pool.push_back({std::move(fit), start});
  };

  Index start = 0;
  for (const auto& subset : extra_starts) run_start(subset, subset, start++);
  if (h == n) {
    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    run_start(all, all, start++);
  } else {
    for (Index k = 0; k < opts.n_starts; ++k, ++start) {
      CounterRng rng(seed, static_cast<std::uint64_t>(k));
      std::vector<Index> perm = rng.partial_permutation(n, h);
      std::vector<Index> initial(perm.begin(), perm.begin() + std::min<Index>(p + 1, h));
      run_start(std::move(initial), std::move(perm), start);
    }
  }
  if (pool.empty()) return std::nullopt;

  std::sort(pool.begin(), pool.end(), better);
  pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(opts.n_refine)));
  std::optional<Candidate> best;
  for (auto& cand : pool) {
    Candidate refined{concentrate(xs, std::move(cand.fit), h, reg, opts.max_csteps), cand.start};
    if (refined.fit.singular) continue;
    if (!best || better(refined, *best)) best = std::move(refined);
  }
  return best;
}

inline Index subset_size(double alpha, Index n) {
  const auto h = static_cast<Index>(std::ceil(alpha * static_cast<double>(n) - 1e-9));
  return std::clamp<Index>(h, 1, n);
}

inline std::vector<Index> to_original(const std::vector<Index>& subset,
                                      const std::vector<Index>& order) {
  std::vector<Index> out;
  out.reserve(subset.size());
  for (Index i : subset) out.push_back(order[static_cast<std::size_t>(i)]);
  std::sort(out.begin(), out.end());
  return out;
}

inline DataMatrix reorder_rows(const DataMatrix& x, const std::vector<Index>& order) {
  const auto m = static_cast<Index>(order.size());
  DataMatrix xs(m, x.cols());
  for (Index i = 0; i < m; ++i) xs.row(i) = x.row(order[static_cast<std::size_t>(i)]);
  return xs;
}

}  // namespace detail


/// c_alpha = alpha / P(chi2_{p+2} <= q_alpha), q_alpha the alpha-quantile of chi2_p.
inline double mcd_consistency_factor(double alpha, Index p) {
  if (alpha >= 1.0) return 1.0;
  const boost::math::chi_squared_distribution<double> chi_p(static_cast<double>(p));
  const boost::math::chi_squared_distribution<double> chi_p2(static_cast<double>(p + 2));
  const double q = boost::math::quantile(chi_p, alpha);
  return alpha / boost::math::cdf(chi_p2, q);
}

/// Minimum covariance determinant: c_alpha times the covariance (1/h divisor)
/// of the h = ceil(alpha n) rows with the smallest covariance determinant,
/// found by seeded multi-start concentration steps. No reweighting.
inline ScatterEstimate mcd(const DataMatrix& x, double alpha, std::uint64_t seed = 0,
                           const SubsetSearchOptions& opts = {}) {
  detail::require_rows(x, 2, "mcd");
  if (!(alpha >= 0.5 && alpha <= 1.0)) throw DomainError("mcd: alpha must lie in [0.5, 1]");
  const Index n = x.rows();
  const Index p = x.cols();
  const Index h = detail::subset_size(alpha, n);
  const std::vector<Index> order = detail::canonical_order(x);
  const DataMatrix xs = detail::reorder_rows(x, order);

  const auto best = detail::subset_search(xs, h, seed, detail::Regularizer{}, opts, {});
  if (!best) {
    std::ostringstream os;
    if (2 * h <= n + 1) {
      os << "More than half of the observations lie on a hyperplane";
    } else {
      os << "At least " << h << " of the " << n << " observations lie on a hyperplane";
    }
    os << " (mcd: every candidate " << h << "-subset covariance is singular in p = " << p << ")";
    throw HyperplaneError(os.str());
  }
  const double c = mcd_consistency_factor(alpha, p);
  std::ostringstream name;
  name << "mcd:alpha=" << alpha;
  ScatterEstimate est = detail::finish(c * best->fit.raw, best->fit.mean, name.str());
  est.support = detail::to_original(best->fit.subset, order);
  return est;
}

namespace detail {

inline constexpr double kMrcdMaxCondition = 1000.0;

inline double condition_number(const Matrix& s) {
  const SymEig eig = sym_eig(s, "mrcd scatter");
  const double lo = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return eig.eigenvalues(0) / lo;
}

/// h rows closest to the coordinatewise median after scaling each column by
/// its standard deviation (constant columns are ignored).
inline std::vector<Index> median_start(const DataMatrix& xs, Index h) {
  const Index n = xs.rows();
  const Index p = xs.cols();
  Vector med(p);
  Vector sd(p);
  for (Index j = 0; j < p; ++j) {
    std::vector<double> col(xs.col(j).data(), xs.col(j).data() + n);
    std::sort(col.begin(), col.end());
    med(j) = n % 2 == 1 ? col[static_cast<std::size_t>(n / 2)]
                        : 0.5 * (col[static_cast<std::size_t>(n / 2 - 1)] +
                                 col[static_cast<std::size_t>(n / 2)]);
    const double mean = xs.col(j).mean();
    sd(j) = std::sqrt((xs.col(j).array() - mean).square().sum() / static_cast<double>(n - 1));
  }
  Vector d = Vector::Zero(n);
  for (Index j = 0; j < p; ++j) {
    if (sd(j) > 0.0) d += ((xs.col(j).array() - med(j)) / sd(j)).square().matrix();
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d(a) < d(b); });
  order.resize(static_cast<std::size_t>(h));
  return order;
}

}  // namespace detail

/// Minimum regularized covariance determinant with a scaled-identity target
/// (median column variance). Result is rho * T + (1 - rho) c_alpha S_h.
/// Without rho, the smallest rho on the grid {k/1000} whose initial estimate
/// has condition number <= 1000 is used.
inline ScatterEstimate mrcd(const DataMatrix& x, double alpha, std::optional<double> rho = std::nullopt,
                            std::uint64_t seed = 0, const SubsetSearchOptions& opts = {}) {
  detail::require_rows(x, 2, "mrcd");
  if (!(alpha >= 0.5 && alpha <= 1.0)) throw DomainError("mrcd: alpha must lie in [0.5, 1]");
  if (rho && !(*rho > 0.0 && *rho <= 1.0)) throw DomainError("mrcd: rho must lie in (0, 1]");
  const Index n = x.rows();
  const Index p = x.cols();
  const Index h = detail::subset_size(alpha, n);
  const std::vector<Index> order = detail::canonical_order(x);
  const DataMatrix xs = detail::reorder_rows(x, order);

  // Target: median of the column variances times the identity.
  std::vector<double> variances(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    const double mean = xs.col(j).mean();
    variances[static_cast<std::size_t>(j)] =
        (xs.col(j).array() - mean).square().sum() / static_cast<double>(n - 1);
  }
  std::vector<double> sorted = variances;
  std::sort(sorted.begin(), sorted.end());
  double target = p % 2 == 1 ? sorted[static_cast<std::size_t>(p / 2)]
                             : 0.5 * (sorted[static_cast<std::size_t>(p / 2 - 1)] +
                                      sorted[static_cast<std::size_t>(p / 2)]);
  if (!(target > 0.0)) {
    double sum = 0.0;
    int count = 0;
    for (double v : variances) {
      if (v > 0.0) {
        sum += v;
        ++count;
      }
    }
    target = count > 0 ? sum / count : 1.0;
  }

  const double c = mcd_consistency_factor(alpha, p);
  const std::vector<Index> start = detail::median_start(xs, h);
  std::ostringstream name;
  name << "mrcd:alpha=" << alpha;

  std::vector<std::string> notes;
  double shrink = 0.0;
  if (rho) {
    shrink = *rho;
  } else {
    const detail::SubsetFit initial = detail::fit_subset(xs, start, detail::Regularizer{});
    shrink = 1.0;
    for (int k = 1; k <= 1000; ++k) {
      const double cand = k / 1000.0;
      const detail::Regularizer reg{cand, target, c};
      if (detail::condition_number(reg.apply(initial.raw)) <= detail::kMrcdMaxCondition) {
        shrink = cand;
        break;
      }
    }
    std::ostringstream note;
    note << "rho=" << shrink << " selected on the auto grid (condition number <= 1000)";
    notes.push_back(note.str());
  }
  name << ",rho=" << shrink;

  if (shrink == 1.0) {
    const detail::SubsetFit fit = detail::fit_subset(xs, start, detail::Regularizer{});
    ScatterEstimate est = detail::finish(target * Matrix::Identity(p, p), fit.mean, name.str());
    est.support = detail::to_original(fit.subset, order);
    est.notes = std::move(notes);
    return est;
  }

  const detail::Regularizer reg{shrink, target, c};
  const auto best = detail::subset_search(xs, h, seed, reg, opts, {start});
  if (!best) throw DecompositionError("mrcd: no regular candidate subset");
  ScatterEstimate est = detail::finish(best->fit.scatter, best->fit.mean, name.str());
  est.support = detail::to_original(best->fit.subset, order);
  est.notes = std::move(notes);
  return est;
}

// ---------------------------------------------------------------------------
// Dispatch and crossproduct roots
// ---------------------------------------------------------------------------

namespace detail {

inline DataMatrix rows_with_label(const DataMatrix& x, std::span<const int> labels, int label) {
  if (labels.size() != static_cast<std::size_t>(x.rows())) {
    throw ConfigError("cov:label=" + std::to_string(label) +
                      " needs one label per observation");
  }
  std::vector<Index> keep;
  for (Index i = 0; i < x.rows(); ++i) {
    if (labels[static_cast<std::size_t>(i)] == label) keep.push_back(i);
  }
  return reorder_rows(x, keep);
}

}  // namespace detail

/// Evaluates a spec on x. `labels` is only consulted by cov:label=K.
inline ScatterEstimate estimate_scatter(const ScatterSpec& spec, const DataMatrix& x,
                                        std::span<const int> labels = {}) {
  switch (spec.kind) {
    case Estimator::cov:
      if (spec.label) {
        ScatterEstimate est = cov(detail::rows_with_label(x, labels, *spec.label));
        est.estimator = spec.name();
        return est;
      }
      return cov(x);
    case Estimator::cov4:
      return cov4(x);
    case Estimator::covg4:
      return covg4(x);
    case Estimator::mcd:
      return mcd(x, spec.alpha, spec.seed);
    case Estimator::mrcd:
      return mrcd(x, spec.alpha, spec.rho, spec.seed);
  }
  throw ConfigError("unknown estimator");
}

/// Row-weighted centered data whose crossproduct equals the estimator.
/// cov: rows / sqrt(n - 1). covg4: row i times r_i / sqrt((p + 2) n), r_i
/// from cov^+.
inline CrossproductRoot crossproduct_root(const ScatterSpec& spec, const DataMatrix& x,
                                          std::span<const int> labels = {}) {
  if (!spec.has_root()) {
    throw CapabilityError("crossproduct_root: " + spec.name() +
                          " cannot be expressed as a crossproduct; the gsvd method only "
                          "accepts cov or covg4");
  }
  CrossproductRoot out;
  out.estimator = spec.name();
  if (spec.kind == Estimator::cov) {
    const DataMatrix rows = spec.label ? detail::rows_with_label(x, labels, *spec.label) : x;
    detail::require_rows(rows, 2, "crossproduct_root(cov)");
    out.location = location_mean(rows);
    out.root = detail::centered(rows, out.location) / std::sqrt(static_cast<double>(rows.rows() - 1));
    out.scale_note = "centered rows divided by sqrt(n - 1)";
    return out;
  }
  detail::require_rows(x, 2, "crossproduct_root(covg4)");
  const ScatterEstimate c = cov(x);
  const Matrix xc = detail::centered(x, c.location);
  const Vector r2 = detail::squared_distances(xc, pinv_psd(c.matrix));
  const double scale =
      1.0 / std::sqrt(static_cast<double>(x.cols() + 2) * static_cast<double>(x.rows()));
  out.location = c.location;
  out.root = (r2.cwiseMax(0.0).cwiseSqrt() * scale).asDiagonal() * xc;
  out.scale_note = "centered row i multiplied by r_i / sqrt((p + 2) n), r_i under cov^+";
  return out;
}

}  // namespace ics_psd
