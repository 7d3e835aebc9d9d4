#include "juice/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "juice/config.hpp"

namespace juice {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double parse_number(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("read_csv: bad number '" + s + "'");
  return v;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<CurvePoint>& points) {
  if (points.empty()) throw std::invalid_argument("write_csv: no points");
  os << kCsvHeader << '\n';
  for (const auto& p : points) {
    os << p.sweep_variable << ',' << num(p.sweep_value) << ',' << num(p.snr_db) << ','
       << to_string(p.algorithm) << ',' << num(p.srr) << ',' << num(p.srr_std_error) << ','
       << num(p.nase) << ',' << num(p.nase_db) << ',' << num(p.mean_iterations) << ',' << p.trials
       << ',' << num(p.wall_ms) << '\n';
  }
}

void emit_csv(const std::vector<CurvePoint>& points, const std::string& path) {
  if (points.empty()) throw std::invalid_argument("emit_csv: no points");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(os, points);
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<CurvePoint> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::runtime_error("read_csv: unexpected header");
  std::vector<CurvePoint> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 11) throw std::runtime_error("read_csv: expected 11 columns, got " + std::to_string(f.size()));
    CurvePoint p;
    p.sweep_variable = f[0];
    p.sweep_value = parse_number(f[1]);
    p.snr_db = parse_number(f[2]);
    p.algorithm = parse_algorithm(f[3]);
    p.srr = parse_number(f[4]);
    p.srr_std_error = parse_number(f[5]);
    p.nase = parse_number(f[6]);
    p.nase_db = parse_number(f[7]);
    p.mean_iterations = parse_number(f[8]);
    p.trials = std::stoi(f[9]);
    p.wall_ms = parse_number(f[10]);
    out.push_back(p);
  }
  return out;
}

std::vector<CurvePoint> load_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(is);
}

PlotMetric parse_plot_metric(const std::string& name) {
  if (name == "srr") return PlotMetric::srr;
  if (name == "nase_db") return PlotMetric::nase_db;
  throw std::invalid_argument("unknown plot metric '" + name + "' (expected srr or nase_db)");
}

void write_plot(std::ostream& os, const std::vector<CurvePoint>& points, PlotMetric metric) {
  if (points.empty()) throw std::invalid_argument("plot: no points");
  std::set<std::string> vars;
  std::set<double> snrs;
  for (const auto& p : points) {
    vars.insert(p.sweep_variable);
    snrs.insert(p.snr_db);
  }
  if (vars.size() != 1) throw std::invalid_argument("plot: points mix several sweep variables");
  const std::string sweep_var = *vars.begin();
  const bool x_is_snr = snrs.size() > 1 || sweep_var == "none";

  // Series keyed by label, preserving first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& p : points) {
    std::string label = to_string(p.algorithm);
    if (x_is_snr && sweep_var != "none") label += " (" + sweep_var + "=" + num(p.sweep_value) + ")";
    const double x = x_is_snr ? p.snr_db : p.sweep_value;
    const double y = metric == PlotMetric::srr ? p.srr : p.nase_db;
    if (!series.count(label)) order.push_back(label);
    series[label];
    if (std::isfinite(y)) series[label].emplace_back(x, y);
  }

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& [label, pts] : series) {
    for (const auto& [x, y] : pts) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (!std::isfinite(x_min)) {
    x_min = 0.0; x_max = 1.0; y_min = 0.0; y_max = 1.0;
  }
  if (metric == PlotMetric::srr) {
    y_min = std::min(0.0, y_min);
    y_max = std::max(1.0, y_max);
  }
  if (x_max == x_min) { x_min -= 1.0; x_max += 1.0; }
  if (y_max == y_min) { y_min -= 1.0; y_max += 1.0; }

  const double width = 720, height = 460;
  const double left = 70, right = 220, top = 30, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  const std::string x_label = x_is_snr ? "SNR [dB]" : sweep_var;
  const std::string y_label = metric == PlotMetric::srr ? "SRR" : "NASE [dB]";

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double xv = x_min + (x_max - x_min) * t / kTicks;
    const double yv = y_min + (y_max - y_min) * t / kTicks;
    os << "<line x1=\"" << fixed(px(xv)) << "\" y1=\"" << fixed(top + plot_h) << "\" x2=\"" << fixed(px(xv))
       << "\" y2=\"" << fixed(top + plot_h + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << fixed(top + plot_h + 18)
       << "\" text-anchor=\"middle\">" << fixed(xv) << "</text>\n";
    os << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(py(yv)) << "\" x2=\"" << fixed(left)
       << "\" y2=\"" << fixed(py(yv)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(py(yv) + 4) << "\" text-anchor=\"end\">"
       << fixed(yv) << "</text>\n";
  }
  os << "<text x=\"" << fixed(left + plot_w / 2) << "\" y=\"" << fixed(height - 15)
     << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << fixed(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << fixed(top + plot_h / 2) << ")\">" << escape_xml(y_label) << "</text>\n";

  for (std::size_t s = 0; s < order.size(); ++s) {
    auto pts = series[order[s]];
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const char* color = palette[s % std::size(palette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      os << (i ? " " : "") << fixed(px(pts[i].first)) << ',' << fixed(py(pts[i].second));
    os << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    os << "<line x1=\"" << fixed(left + plot_w + 12) << "\" y1=\"" << fixed(ly) << "\" x2=\""
       << fixed(left + plot_w + 36) << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fixed(left + plot_w + 42) << "\" y=\"" << fixed(ly + 4) << "\">"
       << escape_xml(order[s]) << "</text>\n";
  }
  os << "</svg>\n";
}

void emit_plot(const std::vector<CurvePoint>& points, PlotMetric metric, const std::string& path) {
  std::ostringstream buf;
  write_plot(buf, points, metric);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << buf.str();
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace juice
