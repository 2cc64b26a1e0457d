#pragma once

// Static SVG plots: a scatterplot matrix of scores and an index plot of
// squared ICS distances. Points are colored by label.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "ics_psd/errors.hpp"
#include "ics_psd/io/csv.hpp"
#include "ics_psd/linalg.hpp"

namespace ics_psd::plot {

namespace detail {

inline constexpr const char* kPalette[] = {"#4c72b0", "#dd3333", "#55a868", "#8172b2",
                                           "#ccb974", "#64b5cd"};

inline const char* color_for(int label) {
  const int k = static_cast<int>(std::size(kPalette));
  return kPalette[((label % k) + k) % k];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

inline Range range_of(const Vector& v) {
  Range r;
  if (v.size() == 0) return r;
  r.lo = v.minCoeff();
  r.hi = v.maxCoeff();
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) throw DomainError("plot: non-finite values");
  if (r.hi - r.lo <= 1e-12 * std::max(1.0, std::abs(r.hi))) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  return r;
}

inline double scale(double v, Range r, double a, double b) {
  return a + (v - r.lo) / (r.hi - r.lo) * (b - a);
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

inline std::string header(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
         "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline int label_at(std::span<const int> labels, Index i) {
  return labels.empty() ? 0 : labels[static_cast<std::size_t>(i)];
}

// Points with label 0 first so that other groups are drawn on top.
inline std::vector<Index> draw_order(Index n, std::span<const int> labels) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return (label_at(labels, a) != 0) < (label_at(labels, b) != 0); });
  return order;
}

}  // namespace detail

struct PlotOutput {
  std::string svg;
  std::vector<std::string> warnings;
};

/// k x k grid of pairwise score plots (component names on the diagonal).
/// With a single component a strip plot is drawn instead.
inline PlotOutput scatter_matrix_svg(const Matrix& scores, std::span<const int> labels = {},
                                     Index max_components = 6) {
  if (scores.rows() == 0 || scores.cols() == 0) throw DomainError("plot_scatter_matrix: empty scores");
  if (!labels.empty() && static_cast<Index>(labels.size()) != scores.rows()) {
    throw ShapeError("plot_scatter_matrix: label count mismatch");
  }
  PlotOutput out;
  Index k = scores.cols();
  if (k > max_components) {
    out.warnings.push_back("scatter matrix shows the first " + std::to_string(max_components) + " of " +
                           std::to_string(k) + " components");
    k = max_components;
  }
  const std::vector<Index> order = detail::draw_order(scores.rows(), labels);

  if (k < 2) {
    out.warnings.push_back("fewer than 2 components; drew a strip plot");
    const double w = 640;
    const double h = 160;
    const detail::Range r = detail::range_of(scores.col(0));
    out.svg = detail::header(w, h);
    out.svg += "<text x=\"10\" y=\"20\" font-size=\"12\">IC1</text>\n";
    for (Index i : order) {
      const double x = detail::scale(scores(i, 0), r, 20, w - 20);
      out.svg += "<circle cx=\"" + detail::num(x) + "\" cy=\"" + detail::num(h / 2) +
                 "\" r=\"2.5\" fill=\"" + detail::color_for(detail::label_at(labels, i)) +
                 "\" fill-opacity=\"0.6\"/>\n";
    }
    out.svg += "</svg>\n";
    return out;
  }

  const double cell = 160;
  const double pad = 8;
  const double size = cell * static_cast<double>(k);
  std::vector<detail::Range> ranges;
  for (Index j = 0; j < k; ++j) ranges.push_back(detail::range_of(scores.col(j)));
  out.svg = detail::header(size, size);
  for (Index row = 0; row < k; ++row) {
    for (Index col = 0; col < k; ++col) {
      const double x0 = cell * static_cast<double>(col);
      const double y0 = cell * static_cast<double>(row);
      out.svg += "<g class=\"panel\" data-row=\"" + std::to_string(row + 1) + "\" data-col=\"" +
                 std::to_string(col + 1) + "\">\n";
      out.svg += "<rect x=\"" + detail::num(x0 + 1) + "\" y=\"" + detail::num(y0 + 1) + "\" width=\"" +
                 detail::num(cell - 2) + "\" height=\"" + detail::num(cell - 2) +
                 "\" fill=\"none\" stroke=\"#999\"/>\n";
      if (row == col) {
        out.svg += "<text x=\"" + detail::num(x0 + cell / 2) + "\" y=\"" + detail::num(y0 + cell / 2) +
                   "\" font-size=\"16\" text-anchor=\"middle\">IC" + std::to_string(row + 1) + "</text>\n";
      } else {
        const detail::Range rx = ranges[static_cast<std::size_t>(col)];
        const detail::Range ry = ranges[static_cast<std::size_t>(row)];
        for (Index i : order) {
          const double x = detail::scale(scores(i, col), rx, x0 + pad, x0 + cell - pad);
          const double y = detail::scale(scores(i, row), ry, y0 + cell - pad, y0 + pad);
          out.svg += "<circle cx=\"" + detail::num(x) + "\" cy=\"" + detail::num(y) +
                     "\" r=\"1.8\" fill=\"" + detail::color_for(detail::label_at(labels, i)) +
                     "\" fill-opacity=\"0.6\"/>\n";
        }
      }
      out.svg += "</g>\n";
    }
  }
  out.svg += "</svg>\n";
  return out;
}

/// Observation index against squared ICS distance, non-zero labels highlighted.
inline PlotOutput distances_svg(const Vector& distances, std::span<const int> labels = {},
                                std::string_view title = "ICSD2") {
  if (distances.size() == 0) throw DomainError("plot_distances: empty input");
  if (!labels.empty() && static_cast<Index>(labels.size()) != distances.size()) {
    throw ShapeError("plot_distances: label count mismatch");
  }
  const double w = 720;
  const double h = 360;
  const double left = 50;
  const double right = 15;
  const double top = 30;
  const double bottom = 30;
  const Index n = distances.size();
  const detail::Range rx{0.0, std::max<double>(1.0, static_cast<double>(n - 1))};
  detail::Range ry = detail::range_of(distances);
  ry.lo = std::min(ry.lo, 0.0);

  PlotOutput out;
  out.svg = detail::header(w, h);
  out.svg += "<text x=\"" + detail::num(left) + "\" y=\"20\" font-size=\"13\">" + detail::escape(title) +
             "</text>\n";
  out.svg += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(h - bottom) + "\" x2=\"" +
             detail::num(w - right) + "\" y2=\"" + detail::num(h - bottom) + "\" stroke=\"#333\"/>\n";
  out.svg += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top) + "\" x2=\"" +
             detail::num(left) + "\" y2=\"" + detail::num(h - bottom) + "\" stroke=\"#333\"/>\n";
  out.svg += "<text x=\"5\" y=\"" + detail::num(top + 4) + "\" font-size=\"10\">" +
             detail::escape(io::format_double(ry.hi).substr(0, 10)) + "</text>\n";
  for (Index i : detail::draw_order(n, labels)) {
    const int label = detail::label_at(labels, i);
    const double x = detail::scale(static_cast<double>(i), rx, left + 5, w - right - 5);
    const double y = detail::scale(distances(i), ry, h - bottom, top);
    out.svg += "<circle cx=\"" + detail::num(x) + "\" cy=\"" + detail::num(y) + "\" r=\"" +
               (label != 0 ? "3.2" : "2.2") + "\" fill=\"" + detail::color_for(label) + "\"/>\n";
  }
  out.svg += "</svg>\n";
  return out;
}

inline std::vector<std::string> plot_scatter_matrix(const Matrix& scores, std::span<const int> labels,
                                                    const std::string& path) {
  PlotOutput p = scatter_matrix_svg(scores, labels);
  io::write_text(path, p.svg);
  return p.warnings;
}

inline std::vector<std::string> plot_distances(const Vector& distances, std::span<const int> labels,
                                               const std::string& path) {
  PlotOutput p = distances_svg(distances, labels);
  io::write_text(path, p.svg);
  return p.warnings;
}

}  // namespace ics_psd::plot
