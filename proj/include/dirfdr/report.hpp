#pragma once

// SVG panel grids from an aggregate simulation table: one panel per (w, v),
// metric against xi, one polyline per method.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dirfdr/errors.hpp"
#include "dirfdr/io.hpp"
#include "dirfdr/simulation.hpp"

namespace dirfdr::report {

enum class PlotMetric { FdrDir, Tpr };

struct AggregateRow {
  double w = 0.0, xi = 0.0, v = 0.0;
  std::string method;
  double fdr = 0.0;
  double tpr = 0.0;
};

struct Aggregate {
  std::vector<AggregateRow> rows;
  std::optional<double> q;  // from a q column, when present and constant
};

inline Aggregate parse_aggregate(const io::CsvTable& t) {
  const std::size_t cw = t.require_column("w"), cxi = t.require_column("xi"), cv = t.require_column("v");
  const std::size_t cm = t.require_column("method");
  const std::size_t cf = t.require_column("mean_fdr_dir"), ct = t.require_column("mean_tpr");
  const auto cq = t.column("q");
  Aggregate a;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto num = [&](std::size_t c) {
      auto x = io::parse_double(row[c]);
      if (!x) throw InputError("line " + std::to_string(t.line_numbers[r]) + ": invalid number in column '" +
                               t.header[c] + "'");
      return *x;
    };
    a.rows.push_back({num(cw), num(cxi), num(cv), row[cm], num(cf), num(ct)});
    if (cq) {
      const double q = num(*cq);
      if (a.q && *a.q != q) throw InputError("aggregate mixes several q levels");
      a.q = q;
    }
  }
  return a;
}

namespace detail {

inline std::string fmt(double x, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

inline std::string xml_escape(const std::string& in) {
  std::string out;
  for (char c : in) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* colour(std::size_t k) {
  static const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                  "#66a61e", "#e6ab02", "#a6761d", "#666666"};
  return palette[k % 8];
}

// Known methods first in their canonical order, then others alphabetically.
inline std::vector<std::string> method_order(const std::vector<AggregateRow>& rows) {
  std::set<std::string> present;
  for (const auto& r : rows) present.insert(r.method);
  std::vector<std::string> out;
  for (Method m : kAllMethods) {
    const std::string name(method_name(m));
    if (present.erase(name)) out.push_back(name);
  }
  out.insert(out.end(), present.begin(), present.end());
  return out;
}

}  // namespace detail

struct Layout {
  double panel_w = 220.0;
  double panel_h = 160.0;
  double gap = 50.0;
  double left = 60.0;
  double top = 70.0;
};

// Deterministic SVG for `metric`; an empty table gives one empty panel.
inline std::string render_svg(const Aggregate& agg, PlotMetric metric, double q, const Layout& lay = {}) {
  using detail::fmt;
  std::set<double, std::greater<>> w_set;
  std::set<double> v_set, xi_set;
  for (const auto& r : agg.rows) {
    w_set.insert(r.w);
    v_set.insert(r.v);
    xi_set.insert(r.xi);
  }
  const bool empty = agg.rows.empty();
  const std::vector<double> ws = empty ? std::vector<double>{} : std::vector<double>(w_set.begin(), w_set.end());
  const std::vector<double> vs = empty ? std::vector<double>{} : std::vector<double>(v_set.begin(), v_set.end());
  const std::size_t nrow = std::max<std::size_t>(ws.size(), 1), ncol = std::max<std::size_t>(vs.size(), 1);
  const auto methods = detail::method_order(agg.rows);

  double x_lo = 0.0, x_hi = 1.0;
  if (!xi_set.empty()) {
    x_lo = *xi_set.begin();
    x_hi = *xi_set.rbegin();
    if (x_hi == x_lo) {
      x_lo -= 0.5;
      x_hi += 0.5;
    }
  }
  double y_hi = 1.0;
  if (metric == PlotMetric::FdrDir) {
    y_hi = std::max(0.5, 2.0 * q);
    for (const auto& r : agg.rows) y_hi = std::max(y_hi, r.fdr);
  }
  const std::string label = metric == PlotMetric::FdrDir ? "FDR_dir" : "TPR";

  const double width = lay.left + static_cast<double>(ncol) * (lay.panel_w + lay.gap) + 120.0;
  const double height = lay.top + static_cast<double>(nrow) * (lay.panel_h + lay.gap) + 20.0;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width, 0) << "\" height=\"" << fmt(height, 0)
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << fmt(lay.left) << "\" y=\"24\" font-size=\"14\">" << label << " against xi</text>\n";

  for (std::size_t i = 0; i < nrow; ++i) {
    for (std::size_t j = 0; j < ncol; ++j) {
      const double px = lay.left + static_cast<double>(j) * (lay.panel_w + lay.gap);
      const double py = lay.top + static_cast<double>(i) * (lay.panel_h + lay.gap);
      auto sx = [&](double x) { return px + (x - x_lo) / (x_hi - x_lo) * lay.panel_w; };
      auto sy = [&](double y) { return py + lay.panel_h - y / y_hi * lay.panel_h; };

      s << "<g class=\"panel\"";
      if (!empty) s << " data-w=\"" << io::format_number(ws[i]) << "\" data-v=\"" << io::format_number(vs[j]) << "\"";
      s << ">\n";
      if (!empty)
        s << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(py - 8) << "\">w = " << io::format_number(ws[i])
          << ", v = " << io::format_number(vs[j]) << "</text>\n";
      s << "<rect class=\"axes\" x=\"" << fmt(px) << "\" y=\"" << fmt(py) << "\" width=\"" << fmt(lay.panel_w)
        << "\" height=\"" << fmt(lay.panel_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
      for (int k = 0; k <= 4; ++k) {
        const double y = y_hi * k / 4.0;
        s << "<text x=\"" << fmt(px - 4) << "\" y=\"" << fmt(sy(y) + 4) << "\" text-anchor=\"end\">" << fmt(y)
          << "</text>\n";
      }
      for (double x : xi_set)
        s << "<text x=\"" << fmt(sx(x)) << "\" y=\"" << fmt(py + lay.panel_h + 14)
          << "\" text-anchor=\"middle\">" << io::format_number(x) << "</text>\n";
      s << "<text x=\"" << fmt(px + lay.panel_w / 2) << "\" y=\"" << fmt(py + lay.panel_h + 28)
        << "\" text-anchor=\"middle\">xi</text>\n";
      if (metric == PlotMetric::FdrDir)
        s << "<line class=\"target-q\" x1=\"" << fmt(px) << "\" y1=\"" << fmt(sy(q)) << "\" x2=\""
          << fmt(px + lay.panel_w) << "\" y2=\"" << fmt(sy(q)) << "\" stroke=\"black\" stroke-dasharray=\"4 2\"/>\n";

      if (!empty) {
        for (std::size_t k = 0; k < methods.size(); ++k) {
          std::map<double, double> pts;
          for (const auto& r : agg.rows)
            if (r.w == ws[i] && r.v == vs[j] && r.method == methods[k])
              pts[r.xi] = metric == PlotMetric::FdrDir ? r.fdr : r.tpr;
          if (pts.empty()) continue;
          s << "<polyline class=\"series\" data-method=\"" << detail::xml_escape(methods[k]) << "\" fill=\"none\" stroke=\""
            << detail::colour(k) << "\" stroke-width=\"1.5\" points=\"";
          bool first = true;
          for (const auto& [x, y] : pts) {
            s << (first ? "" : " ") << fmt(sx(x)) << ',' << fmt(sy(y));
            first = false;
          }
          s << "\"/>\n";
        }
      }
      s << "</g>\n";
    }
  }

  const double lx = lay.left + static_cast<double>(ncol) * (lay.panel_w + lay.gap);
  for (std::size_t k = 0; k < methods.size(); ++k) {
    const double ly = lay.top + 14.0 * static_cast<double>(k);
    s << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 18) << "\" y2=\"" << fmt(ly)
      << "\" stroke=\"" << detail::colour(k) << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << fmt(lx + 24) << "\" y=\"" << fmt(ly + 4) << "\">" << detail::xml_escape(methods[k]) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace dirfdr::report
