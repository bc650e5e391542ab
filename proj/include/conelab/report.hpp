#pragma once

// Plain tables with a fixed number format, CSV output and small SVG plots.
// Formatting goes through snprintf so that equal doubles print identically
// on every run.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace conelab {

inline std::string fmt(double x, int digits = 10) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // folds -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

inline std::string fmt(long long x) { return std::to_string(x); }
inline std::string fmt(int x) { return std::to_string(x); }
inline std::string fmt(bool x) { return x ? "1" : "0"; }
inline std::string fmt(const std::string& s) { return s; }
inline std::string fmt(const char* s) { return s; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  template <class... Ts>
  void add(const Ts&... xs) {
    std::vector<std::string> row{fmt(xs)...};
    if (row.size() != header.size()) throw std::logic_error("table row width differs from header");
    rows.push_back(std::move(row));
  }
};

inline void write_csv(std::ostream& os, const Table& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        os << cells[i];
        continue;
      }
      os << '"';
      for (char c : cells[i]) os << (c == '"' ? "\"\"" : std::string(1, c));
      os << '"';
    }
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

inline std::string csv_string(const Table& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

inline void save_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
  std::string name;
  std::vector<double> x, y;
};

struct PlotOptions {
  std::string title;
  std::string xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<std::string> notes;  // printed under the title
  int width = 640, height = 420;
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  return colors[i % 6];
}

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace detail

/// Line plot with markers; points that are not positive on a log axis are
/// dropped.
inline std::string svg_plot(const std::vector<Series>& series, const PlotOptions& opt) {
  const double ml = 70, mr = 20, mt = 40 + 14.0 * static_cast<double>(opt.notes.size()), mb = 50;
  const double w = opt.width - ml - mr, h = opt.height - mt - mb;
  auto tx = [&](double v) { return opt.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return opt.logy ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!opt.logx || x > 0) && (!opt.logy || y > 0);
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (usable(s.x[i], s.y[i])) {
        x0 = std::min(x0, tx(s.x[i])), x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i])), y1 = std::max(y1, ty(s.y[i]));
      }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * w; };
  auto py = [&](double v) { return mt + h - (ty(v) - y0) / (y1 - y0) * h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << ml << "\" y=\"20\" font-size=\"14\">" << detail::escape_xml(opt.title) << "</text>\n";
  for (std::size_t i = 0; i < opt.notes.size(); ++i)
    os << "<text x=\"" << ml << "\" y=\"" << 36 + 14 * i << "\">" << detail::escape_xml(opt.notes[i]) << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto tick = [&](double v, bool log) { return log ? "1e" + fmt(v, 3) : fmt(v, 3); };
  for (int k = 0; k <= 4; ++k) {
    const double vx = x0 + (x1 - x0) * k / 4.0, vy = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << ml + w * k / 4.0 << "\" y=\"" << mt + h + 16 << "\" text-anchor=\"middle\">"
       << tick(vx, opt.logx) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << mt + h - h * k / 4.0 + 4 << "\" text-anchor=\"end\">"
       << tick(vy, opt.logy) << "</text>\n";
  }
  os << "<text x=\"" << ml + w / 2 << "\" y=\"" << opt.height - 10 << "\" text-anchor=\"middle\">"
     << detail::escape_xml(opt.xlabel) << "</text>\n";
  os << "<text x=\"14\" y=\"" << mt + h / 2 << "\" transform=\"rotate(-90 14 " << mt + h / 2
     << ")\" text-anchor=\"middle\">" << detail::escape_xml(opt.ylabel) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* c = detail::palette(s);
    std::string path;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!usable(series[s].x[i], series[s].y[i])) continue;
      const double a = px(series[s].x[i]), b = py(series[s].y[i]);
      path += (path.empty() ? "M" : " L") + fmt(a, 6) + " " + fmt(b, 6);
      os << "<circle cx=\"" << fmt(a, 6) << "\" cy=\"" << fmt(b, 6) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    }
    if (!path.empty()) os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << c << "\"/>\n";
    os << "<text x=\"" << ml + w - 150 << "\" y=\"" << mt + 16 + 14 * s << "\" fill=\"" << c << "\">"
       << detail::escape_xml(series[s].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string svg_histogram(const std::vector<double>& values, int bins, const PlotOptions& opt) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  Series bars{"count", {}, {}};
  if (!v.empty() && bins > 0) {
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    std::vector<int> count(bins, 0);
    for (double x : v) ++count[std::min(bins - 1, static_cast<int>((x - lo) / (hi - lo) * bins))];
    // Step outline of the histogram.
    for (int b = 0; b < bins; ++b) {
      const double a = lo + (hi - lo) * b / bins, c = lo + (hi - lo) * (b + 1) / bins;
      bars.x.insert(bars.x.end(), {a, a, c, c});
      bars.y.insert(bars.y.end(), {0.0, static_cast<double>(count[b]), static_cast<double>(count[b]), 0.0});
    }
  }
  return svg_plot({bars}, opt);
}

}  // namespace conelab
