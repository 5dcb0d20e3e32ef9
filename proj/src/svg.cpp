#include "gazekit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gazekit/common.hpp"

namespace gazekit::svg {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Axis {
  double lo = 0, hi = 1;
  double to_px(double v, double px_lo, double px_hi) const {
    if (hi == lo) return (px_lo + px_hi) / 2;
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
  }
};

Axis fit(const std::vector<double>& vals) {
  Axis a;
  if (vals.empty()) return a;
  a.lo = *std::min_element(vals.begin(), vals.end());
  a.hi = *std::max_element(vals.begin(), vals.end());
  if (a.hi == a.lo) {
    a.lo -= 0.5;
    a.hi += 0.5;
  }
  const double pad = 0.05 * (a.hi - a.lo);
  a.lo -= pad;
  a.hi += pad;
  return a;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf"};

std::string header(int w, int h, const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
                  std::to_string(w) + "\" height=\"" + std::to_string(h) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + std::to_string(w / 2) +
       "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       title + "</text>\n";
  return s;
}

std::string axes_and_ticks(const Axis& ax, const Axis& ay, int w, int h, int ml, int mr,
                           int mt, int mb, const std::string& xlabel,
                           const std::string& ylabel) {
  std::string s;
  const int x0 = ml, x1 = w - mr, y0 = h - mb, y1 = mt;
  s += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" + std::to_string(y0) +
       "\" x2=\"" + std::to_string(x1) + "\" y2=\"" + std::to_string(y0) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" + std::to_string(y0) +
       "\" x2=\"" + std::to_string(x0) + "\" y2=\"" + std::to_string(y1) +
       "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = ax.lo + (ax.hi - ax.lo) * i / 5.0;
    const double px = ax.to_px(fx, x0, x1);
    s += "<line x1=\"" + num(px) + "\" y1=\"" + std::to_string(y0) + "\" x2=\"" + num(px) +
         "\" y2=\"" + std::to_string(y0 + 4) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(px) + "\" y=\"" + std::to_string(y0 + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
         num(fx) + "</text>\n";
    const double fy = ay.lo + (ay.hi - ay.lo) * i / 5.0;
    const double py = ay.to_px(fy, y0, y1);
    s += "<line x1=\"" + std::to_string(x0 - 4) + "\" y1=\"" + num(py) + "\" x2=\"" +
         std::to_string(x0) + "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + std::to_string(x0 - 7) + "\" y=\"" + num(py + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num(fy) +
         "</text>\n";
  }
  s += "<text x=\"" + std::to_string((x0 + x1) / 2) + "\" y=\"" +
       std::to_string(h - 6) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + xlabel +
       "</text>\n";
  s += "<text x=\"14\" y=\"" + std::to_string((y0 + y1) / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 " +
       std::to_string((y0 + y1) / 2) + ")\">" + ylabel + "</text>\n";
  return s;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const std::vector<Series>& series,
                       int width, int height) {
  const int ml = 60, mr = 20, mt = 36, mb = 44;
  std::vector<double> all_x, all_y;
  for (const auto& s : series) {
    all_x.insert(all_x.end(), s.x.begin(), s.x.end());
    all_y.insert(all_y.end(), s.y.begin(), s.y.end());
  }
  const Axis ax = fit(all_x), ay = fit(all_y);
  std::string out = header(width, height, title);
  out += axes_and_ticks(ax, ay, width, height, ml, mr, mt, mb, xlabel, ylabel);
  int ci = 0;
  for (const auto& s : series) {
    const std::string color = s.color.empty() ? kPalette[ci % 7] : s.color;
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      pts += num(ax.to_px(s.x[i], ml, width - mr)) + "," +
             num(ay.to_px(s.y[i], height - mb, mt)) + " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" +
           pts + "\"/>\n";
    out += "<text x=\"" + std::to_string(width - mr - 4) + "\" y=\"" +
           std::to_string(mt + 16 * (ci + 1)) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" +
           color + "\">" + s.label + "</text>\n";
    ++ci;
  }
  return out + "</svg>\n";
}

std::string histogram(const std::string& title, const std::string& xlabel,
                      const std::vector<double>& values, int bins, int width,
                      int height) {
  if (values.empty() || bins < 1)
    throw Error(ErrorCode::InvalidInput, "histogram needs values and bins");
  const int ml = 60, mr = 20, mt = 36, mb = 44;
  Axis ax = fit(values);
  std::vector<double> counts(bins, 0.0);
  for (double v : values) {
    int b = static_cast<int>((v - ax.lo) / (ax.hi - ax.lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    counts[b] += 1;
  }
  Axis ay;
  ay.lo = 0;
  ay.hi = *std::max_element(counts.begin(), counts.end()) * 1.05;
  std::string out = header(width, height, title);
  out += axes_and_ticks(ax, ay, width, height, ml, mr, mt, mb, xlabel, "count");
  const double bw = (width - ml - mr) / static_cast<double>(bins);
  for (int b = 0; b < bins; ++b) {
    const double x = ml + b * bw;
    const double y = ay.to_px(counts[b], height - mb, mt);
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(bw * 0.92) +
           "\" height=\"" + num(height - mb - y) +
           "\" fill=\"#1f77b4\" stroke=\"none\"/>\n";
  }
  return out + "</svg>\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << content;
}

}  // namespace gazekit::svg
