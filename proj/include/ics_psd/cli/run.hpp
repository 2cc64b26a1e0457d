#pragma once

// Batch driver behind `ics-psd run`: load or generate data, run one ICS
// method (or the auto fallback chain), write tables, plots and a JSON report.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ics_psd/datagen.hpp"
#include "ics_psd/errors.hpp"
#include "ics_psd/ics.hpp"
#include "ics_psd/io/csv.hpp"
#include "ics_psd/plot/svg.hpp"
#include "ics_psd/scatter.hpp"

namespace ics_psd::cli {

struct RunConfig {
  /// CSV path or design:<oc|collinear|meanshift|hdlss>.
  std::string input;
  std::uint64_t seed = 0;
  std::string scatter1 = "cov";
  std::string scatter2 = "cov4";
  /// standard | ginv | dr | gsvd | auto
  std::string method = "auto";
  /// sqrt-eps | dim-eps | inertia | inertia:Q
  std::string rank_rule = "sqrt-eps";
  std::optional<std::string> select;
  bool standardize = false;
  std::string out_dir = ".";
  double tol = kSnapTol;
};

struct Attempt {
  std::string method;
  bool ok = false;
  std::string message;
};

struct RunReport {
  IcsResult result;
  std::string method_used;
  std::vector<Attempt> attempts;
  std::vector<std::string> warnings;
  std::vector<Index> selected;
  Vector distances;
  std::vector<std::string> artifacts;
  nlohmann::ordered_json json;
};

/// 2 configuration or capability, 3 numerical, 4 I/O.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return 4;
  if (dynamic_cast<const ConfigError*>(&e) != nullptr || dynamic_cast<const CapabilityError*>(&e) != nullptr ||
      dynamic_cast<const DomainError*>(&e) != nullptr) {
    return 2;
  }
  return 3;
}

/// ICS_PSD_TOL when set and valid, otherwise the default snap tolerance.
inline double tolerance_from_env() {
  const char* raw = std::getenv("ICS_PSD_TOL");
  if (raw == nullptr || *raw == '\0') return kSnapTol;
  double v = 0.0;
  const std::string_view s(raw);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !(v > 0.0 && v < 1.0)) {
    throw ConfigError("ICS_PSD_TOL must be a number in (0, 1), got '" + std::string(s) + "'");
  }
  return v;
}

inline RankRule parse_rank_rule(std::string_view text) {
  if (text == "sqrt-eps") return RankRule::sqrt_eps();
  if (text == "dim-eps") return RankRule::dim_eps();
  if (text == "inertia") return RankRule::inertia();
  if (text.substr(0, 8) == "inertia:") {
    const std::string_view q = text.substr(8);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(q.data(), q.data() + q.size(), v);
    if (ec == std::errc() && ptr == q.data() + q.size() && v > 0.0 && v <= 1.0) return RankRule::inertia(v);
  }
  throw ConfigError("rank rule must be sqrt-eps, dim-eps, inertia or inertia:Q with Q in (0, 1], got '" +
                    std::string(text) + "'");
}

inline std::optional<Method> parse_method(std::string_view text) {
  if (text == "standard") return Method::standard;
  if (text == "ginv") return Method::ginv;
  if (text == "dr") return Method::dr;
  if (text == "gsvd") return Method::gsvd;
  if (text == "auto") return std::nullopt;
  throw ConfigError("method must be standard, ginv, dr, gsvd or auto, got '" + std::string(text) + "'");
}

inline LabeledSample generate_design(std::string_view name, std::uint64_t seed) {
  if (name == "oc") return gen_oc_model(seed);
  if (name == "collinear") return gen_mixture_collinear(seed);
  if (name == "meanshift") return gen_projected_meanshift(seed);
  if (name == "hdlss") return gen_hdlss(seed);
  throw ConfigError("unknown design '" + std::string(name) + "' (oc, collinear, meanshift, hdlss)");
}

struct LoadedData {
  DataMatrix data;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> header;
};

inline LoadedData load_input(const RunConfig& cfg) {
  LoadedData out;
  constexpr std::string_view prefix = "design:";
  if (cfg.input.rfind(prefix, 0) == 0) {
    LabeledSample s = generate_design(std::string_view(cfg.input).substr(prefix.size()), cfg.seed);
    out.data = std::move(s.data);
    out.labels = std::move(s.labels);
  } else {
    if (cfg.input.empty()) throw ConfigError("no input given");
    io::CsvTable t = io::ingest_csv(cfg.input);
    out.data = std::move(t.data);
    out.labels = std::move(t.labels);
    out.header = std::move(t.header);
    if (out.labels) out.header.pop_back();
  }
  return out;
}

/// Centers every column and scales it to unit variance; constant columns are
/// only centered. Returns a warning per constant column.
inline std::vector<std::string> standardize_columns(DataMatrix& x) {
  std::vector<std::string> warnings;
  const Index n = x.rows();
  for (Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    x.col(j).array() -= mean;
    const double sd = n > 1 ? std::sqrt(x.col(j).squaredNorm() / static_cast<double>(n - 1)) : 0.0;
    if (sd > 0.0) {
      x.col(j) /= sd;
    } else {
      warnings.push_back("standardize: column " + std::to_string(j + 1) + " has zero variance; centered only");
    }
  }
  return warnings;
}

namespace detail {

inline IcsResult run_method(Method m, const DataMatrix& x, const ScatterSpec& s1, const ScatterSpec& s2,
                            const RankRule& rule, double tol, std::span<const int> labels) {
  switch (m) {
    case Method::standard:
      return ics_standard(x, s1, s2, tol, labels);
    case Method::ginv: {
      GinvOptions opts;
      opts.tol = tol;
      return ics_ginv(x, s1, s2, opts, labels);
    }
    case Method::dr:
      return ics_dr(x, s1, s2, rule, tol, labels);
    case Method::gsvd:
      return ics_gsvd(x, s1, s2, tol, labels);
  }
  throw ConfigError("unknown method");
}

inline std::string eigenvalue_table(const IcsResult& res) {
  std::string out = "index,kind,alpha2,beta2,value,class\n";
  for (std::size_t j = 0; j < res.eigenvalues.size(); ++j) {
    const ExtEigenvalue& e = res.eigenvalues[j];
    out += std::to_string(j + 1) + "," + std::string(to_string(e.kind)) + "," + io::format_double(e.alpha2) +
           "," + io::format_double(e.beta2) + "," + io::format_double(e.value()) + "," +
           std::string(to_string(res.classification[j])) + "\n";
  }
  return out;
}

inline nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return io::format_double(v);
}

}  // namespace detail

/// Runs one analysis and writes eigenvalues.csv, scores.csv, distances.csv
/// and distances.svg (both with a selection policy), report.json and scores.svg into
/// cfg.out_dir. Errors propagate; the caller maps them with exit_code_for.
inline RunReport run(const RunConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  RunReport rep;

  // Validate everything that does not need data first.
  const ScatterSpec s1 = ScatterSpec::parse(cfg.scatter1);
  const ScatterSpec s2 = ScatterSpec::parse(cfg.scatter2);
  const std::optional<Method> method = parse_method(cfg.method);
  const RankRule rule = parse_rank_rule(cfg.rank_rule);
  std::optional<SelectionPolicy> policy;
  if (cfg.select) policy = SelectionPolicy::parse(*cfg.select);
  if (method == Method::gsvd && !(s1.has_root() && s2.has_root())) {
    throw CapabilityError("gsvd needs crossproduct-capable scatters (cov or covg4), got " + s1.name() + " and " +
                          s2.name());
  }

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError(cfg.out_dir + ": cannot create output directory (" + ec.message() + ")");

  LoadedData in = load_input(cfg);
  if ((s1.label || s2.label) && !in.labels) {
    throw ConfigError("cov:label=K needs labelled input (a design or a CSV with a 'label' column)");
  }
  if (cfg.standardize) {
    for (auto& w : standardize_columns(in.data)) rep.warnings.push_back(w);
  }
  const std::span<const int> labels =
      in.labels ? std::span<const int>(*in.labels) : std::span<const int>();
  const auto t_load = Clock::now();

  std::vector<Method> chain;
  if (method) {
    chain = {*method};
  } else {
    chain = {Method::standard, Method::gsvd, Method::dr, Method::ginv};
  }
  bool done = false;
  for (std::size_t i = 0; i < chain.size() && !done; ++i) {
    const Method m = chain[i];
    const std::string name(to_string(m));
    if (m == Method::gsvd && !(s1.has_root() && s2.has_root())) {
      rep.attempts.push_back({name, false, "skipped: " + s1.name() + "/" + s2.name() + " have no crossproduct root"});
      continue;
    }
    try {
      rep.result = detail::run_method(m, in.data, s1, s2, rule, cfg.tol, labels);
      rep.attempts.push_back({name, true, ""});
      rep.method_used = name;
      done = true;
    } catch (const ConfigError&) {
      throw;
    } catch (const CapabilityError&) {
      throw;
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      if (chain.size() == 1) throw;
      rep.attempts.push_back({name, false, e.what()});
    }
  }
  if (!done) {
    std::string msg = "auto: every method failed";
    for (const auto& a : rep.attempts) msg += "; " + a.method + ": " + a.message;
    throw SingularityError(msg);
  }
  for (std::size_t i = 0; i + 1 < rep.attempts.size(); ++i) {
    rep.warnings.push_back("fallback: " + rep.attempts[i].method + " -> " + rep.attempts[i + 1].method + " (" +
                           rep.attempts[i].message + ")");
  }
  for (const auto& w : rep.result.warnings) rep.warnings.push_back(w);
  for (std::size_t j = 0; j < rep.result.eigenvalues.size(); ++j) {
    if (rep.result.eigenvalues[j].flagged) {
      rep.warnings.push_back("component " + std::to_string(j + 1) + " lies in null(V1); reported as 0 and not selectable");
    }
  }
  const auto t_fit = Clock::now();

  // Tables.
  const std::filesystem::path dir(cfg.out_dir);
  auto write = [&](const std::string& file, std::string_view text) {
    io::write_text((dir / file).string(), text);
    rep.artifacts.push_back(file);
  };
  write("eigenvalues.csv", detail::eigenvalue_table(rep.result));
  std::vector<std::string> ic_names;
  for (Index j = 0; j < rep.result.scores.cols(); ++j) ic_names.push_back("IC" + std::to_string(j + 1));
  const std::vector<int>* label_ptr = in.labels ? &*in.labels : nullptr;
  write("scores.csv", io::format_csv(rep.result.scores, label_ptr, ic_names));

  if (policy) {
    rep.selected = select_components(rep.result.eigenvalues, *policy);
    rep.distances = ics_distances(rep.result.scores, rep.selected);
    Matrix table(rep.distances.size(), 1);
    table.col(0) = rep.distances;
    write("distances.csv", io::format_csv(table, label_ptr, {"icsd2"}));
  }

  // Plots: all non-trivial components.
  std::vector<Index> shown;
  for (std::size_t j = 0; j < rep.result.eigenvalues.size(); ++j) {
    if (rep.result.eigenvalues[j].kind != EigenKind::trivial) shown.push_back(static_cast<Index>(j));
  }
  if (!shown.empty() && rep.result.scores.rows() > 0) {
    Matrix sub(rep.result.scores.rows(), static_cast<Index>(shown.size()));
    for (std::size_t j = 0; j < shown.size(); ++j) sub.col(static_cast<Index>(j)) = rep.result.scores.col(shown[j]);
    const plot::PlotOutput p = plot::scatter_matrix_svg(sub, labels);
    write("scores.svg", p.svg);
    for (const auto& w : p.warnings) rep.warnings.push_back("plot: " + w);
  }
  if (policy) {
    write("distances.svg", plot::distances_svg(rep.distances, labels, "ICSD2 (" + policy->name() + ")").svg);
  }
  const auto t_end = Clock::now();

  auto ms = [](auto a, auto b) { return std::chrono::duration<double, std::milli>(b - a).count(); };
  nlohmann::ordered_json j;
  j["config"] = {{"input", cfg.input},
                 {"seed", cfg.seed},
                 {"scatter1", s1.name()},
                 {"scatter2", s2.name()},
                 {"method", cfg.method},
                 {"rank_rule", rule.name()},
                 {"select", cfg.select ? nlohmann::ordered_json(*cfg.select) : nlohmann::ordered_json(nullptr)},
                 {"standardize", cfg.standardize},
                 {"tol", cfg.tol}};
  j["data"] = {{"n", in.data.rows()}, {"p", in.data.cols()}, {"labelled", in.labels.has_value()}};
  j["method_used"] = rep.method_used;
  j["attempts"] = nlohmann::ordered_json::array();
  for (const auto& a : rep.attempts) j["attempts"].push_back({{"method", a.method}, {"ok", a.ok}, {"message", a.message}});
  j["rank"] = rep.result.rank;
  j["eigenvalues"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < rep.result.eigenvalues.size(); ++k) {
    const ExtEigenvalue& e = rep.result.eigenvalues[k];
    j["eigenvalues"].push_back({{"index", k + 1},
                                {"kind", to_string(e.kind)},
                                {"alpha2", e.alpha2},
                                {"beta2", e.beta2},
                                {"value", detail::json_number(e.value())},
                                {"raw", detail::json_number(rep.result.raw_values(static_cast<Index>(k)))},
                                {"class", to_string(rep.result.classification[k])},
                                {"flagged", e.flagged}});
  }
  if (policy) {
    j["selected"] = nlohmann::ordered_json::array();
    for (Index s : rep.selected) j["selected"].push_back(s + 1);
  }
  j["warnings"] = rep.warnings;
  j["artifacts"] = rep.artifacts;
  j["timings_ms"] = {{"load", ms(t0, t_load)}, {"fit", ms(t_load, t_fit)}, {"write", ms(t_fit, t_end)}};
  rep.artifacts.push_back("report.json");
  j["artifacts"] = rep.artifacts;
  io::write_text((dir / "report.json").string(), j.dump(2) + "\n");
  rep.json = std::move(j);
  return rep;
}

}  // namespace ics_psd::cli
