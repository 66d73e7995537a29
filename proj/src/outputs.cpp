#include "gridflow/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace gridflow {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double parse_or_nan(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file: " + path);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream ls(line);
  std::string cell;
  while (std::getline(ls, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  auto out = open_out(path);
  out << "scenario_id,theta,lambda_mean,tau_up_s,n_car,seed,spawned,completed,"
         "tau_avg_all_s,tau_avg_informed_s,tau_avg_uninformed_s,"
         "stability_slope_s_per_min\n";
  for (const ResultRow& r : rows) {
    out << r.scenario_id << ',' << fmt(r.theta) << ',' << fmt(r.lambda_mean) << ','
        << fmt(r.tau_up_s) << ',' << r.n_car << ',' << r.seed << ',' << r.spawned << ','
        << r.completed << ',' << fmt(r.tau_avg_all_s) << ',' << fmt(r.tau_avg_informed_s)
        << ',' << fmt(r.tau_avg_uninformed_s) << ',' << fmt(r.stability_slope_s_per_min)
        << "\n";
  }
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  auto out = open_out(path);
  out << "vehicle_id,info_class,source,sink,spawned_s,entered_s,completed_s,"
         "n_segments,distance_m\n";
  for (const TraceRecord& r : trace) {
    out << r.vehicle_id << ','
        << (r.info_class == InfoClass::Informed ? "informed" : "uninformed") << ','
        << r.source << ',' << r.sink << ',' << fmt(r.spawned_s) << ','
        << (r.entered_s >= 0.0 ? fmt(r.entered_s) : "") << ','
        << (r.completed_s >= 0.0 ? fmt(r.completed_s) : "") << ',' << r.n_segments << ','
        << fmt(r.distance_m) << "\n";
  }
}

void write_series_csv(const std::string& path, const std::vector<NamedSeries>& series) {
  auto out = open_out(path);
  out << "scenario_id,t_s,moving_avg_trip_time_s\n";
  for (const NamedSeries& s : series)
    for (const SeriesPoint& p : s.points)
      out << s.scenario_id << ',' << fmt(p.t_s) << ',' << fmt(p.moving_avg_trip_time_s)
          << "\n";
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open results CSV: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto c = split_csv(line);
    if (c.size() < 12) throw ConfigError("malformed results CSV line: " + line);
    ResultRow r;
    r.scenario_id = c[0];
    r.theta = parse_or_nan(c[1]);
    r.lambda_mean = parse_or_nan(c[2]);
    r.tau_up_s = parse_or_nan(c[3]);
    r.n_car = c[4].empty() ? 0 : std::stoi(c[4]);
    r.seed = c[5].empty() ? 0 : std::stoull(c[5]);
    r.spawned = c[6].empty() ? 0 : std::stoull(c[6]);
    r.completed = c[7].empty() ? 0 : std::stoull(c[7]);
    r.tau_avg_all_s = parse_or_nan(c[8]);
    r.tau_avg_informed_s = parse_or_nan(c[9]);
    r.tau_avg_uninformed_s = parse_or_nan(c[10]);
    r.stability_slope_s_per_min = parse_or_nan(c[11]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<NamedSeries> read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open series CSV: " + path);
  std::string line;
  std::getline(in, line);
  std::vector<NamedSeries> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto c = split_csv(line);
    if (c.size() < 3) continue;
    if (out.empty() || out.back().scenario_id != c[0]) out.push_back({c[0], {}});
    out.back().points.push_back({parse_or_nan(c[1]), parse_or_nan(c[2])});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Minimal SVG line/bar charts.

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kW = 720, kH = 480, kMarginL = 70, kMarginR = 160, kMarginT = 30,
              kMarginB = 55;

struct XY {
  double x, y;
};

struct Line {
  std::string label;
  std::vector<XY> pts;
};

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void render_line_chart(const std::string& path, const std::string& title,
                       const std::string& xlabel, const std::string& ylabel,
                       std::vector<Line> lines) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Line& l : lines)
    for (const XY& p : l.pts) {
      if (std::isnan(p.x) || std::isnan(p.y)) continue;
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double pw = kW - kMarginL - kMarginR, ph = kH - kMarginT - kMarginB;
  auto sx = [&](double x) { return kMarginL + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return kMarginT + ph - (y - ymin) / (ymax - ymin) * ph; };

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
      << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";

  // axes + ticks
  out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << svg_num(pw)
      << "\" height=\"" << svg_num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    double xv = xmin + (xmax - xmin) * k / 5.0;
    double yv = ymin + (ymax - ymin) * k / 5.0;
    out << "<line x1=\"" << svg_num(sx(xv)) << "\" y1=\"" << kMarginT + ph << "\" x2=\""
        << svg_num(sx(xv)) << "\" y2=\"" << kMarginT + ph + 5
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << svg_num(sx(xv)) << "\" y=\"" << kMarginT + ph + 20
        << "\" text-anchor=\"middle\">" << svg_num(xv) << "</text>\n";
    out << "<line x1=\"" << kMarginL - 5 << "\" y1=\"" << svg_num(sy(yv)) << "\" x2=\""
        << kMarginL << "\" y2=\"" << svg_num(sy(yv)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kMarginL - 8 << "\" y=\"" << svg_num(sy(yv) + 4)
        << "\" text-anchor=\"end\">" << svg_num(yv) << "</text>\n";
  }
  out << "<text x=\"" << kMarginL + pw / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << kMarginT + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kMarginT + ph / 2
      << ")\">" << ylabel << "</text>\n";

  int ci = 0;
  for (const Line& l : lines) {
    const char* color = kPalette[ci % (sizeof kPalette / sizeof *kPalette)];
    std::string pts;
    for (const XY& p : l.pts) {
      if (std::isnan(p.x) || std::isnan(p.y)) continue;
      pts += svg_num(sx(p.x)) + "," + svg_num(sy(p.y)) + " ";
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" "
        << "points=\"" << pts << "\"/>\n";
    for (const XY& p : l.pts) {
      if (std::isnan(p.x) || std::isnan(p.y)) continue;
      out << "<circle cx=\"" << svg_num(sx(p.x)) << "\" cy=\"" << svg_num(sy(p.y))
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    double ly = kMarginT + 14 + 16 * ci;
    out << "<line x1=\"" << kMarginL + pw + 10 << "\" y1=\"" << svg_num(ly - 4)
        << "\" x2=\"" << kMarginL + pw + 30 << "\" y2=\"" << svg_num(ly - 4)
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << kMarginL + pw + 35 << "\" y=\"" << svg_num(ly) << "\">"
        << l.label << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
}

// seed-mean of a field over rows grouped by key extractor
template <typename Key, typename KeyFn, typename ValFn>
std::map<Key, std::pair<double, int>> group_mean(const std::vector<ResultRow>& rows,
                                                 KeyFn key, ValFn val) {
  std::map<Key, std::pair<double, int>> acc;
  for (const ResultRow& r : rows) {
    double v = val(r);
    if (std::isnan(v)) continue;
    auto& slot = acc[key(r)];
    slot.first += v;
    slot.second += 1;
  }
  return acc;
}

}  // namespace

void chart_tau_vs_theta(const std::string& path, const std::vector<ResultRow>& rows) {
  using Key = std::tuple<double, double, double>;  // lambda, tau_up, theta
  auto acc = group_mean<Key>(
      rows,
      [](const ResultRow& r) {
        return Key{r.lambda_mean, r.tau_up_s, r.theta};
      },
      [](const ResultRow& r) { return r.tau_avg_all_s; });
  std::map<std::pair<double, double>, Line> lines;
  for (const auto& [key, v] : acc) {
    auto [lambda, tau_up, theta] = key;
    Line& l = lines[{lambda, tau_up}];
    char label[64];
    std::snprintf(label, sizeof label, "lambda=%g, tau_up=%gs", lambda, tau_up);
    l.label = label;
    l.pts.push_back({theta, v.first / v.second});
  }
  std::vector<Line> ls;
  for (auto& [k, l] : lines) ls.push_back(std::move(l));
  render_line_chart(path, "Average trip time vs informed fraction", "informed fraction",
                    "tau_avg [s]", std::move(ls));
}

void chart_series(const std::string& path, const std::vector<NamedSeries>& series) {
  std::vector<Line> ls;
  for (const NamedSeries& s : series) {
    Line l;
    l.label = s.scenario_id;
    for (const SeriesPoint& p : s.points)
      l.pts.push_back({p.t_s / 60.0, p.moving_avg_trip_time_s});
    ls.push_back(std::move(l));
  }
  render_line_chart(path, "Moving-average trip time", "simulation time [min]",
                    "trip time [s]", std::move(ls));
}

void chart_tau_vs_tau_up(const std::string& path, const std::vector<ResultRow>& rows) {
  using Key = std::pair<double, double>;  // theta, tau_up
  auto acc = group_mean<Key>(
      rows, [](const ResultRow& r) { return Key{r.theta, r.tau_up_s}; },
      [](const ResultRow& r) { return r.tau_avg_all_s; });
  std::map<double, Line> lines;
  for (const auto& [key, v] : acc) {
    Line& l = lines[key.first];
    char label[48];
    std::snprintf(label, sizeof label, "theta=%g", key.first);
    l.label = label;
    l.pts.push_back({key.second / 60.0, v.first / v.second});
  }
  std::vector<Line> ls;
  for (auto& [k, l] : lines) ls.push_back(std::move(l));
  render_line_chart(path, "Average trip time vs update period", "tau_up [min]",
                    "tau_avg [s]", std::move(ls));
}

void chart_class_bars(const std::string& path, const std::vector<ResultRow>& rows) {
  auto all = group_mean<double>(
      rows, [](const ResultRow& r) { return r.theta; },
      [](const ResultRow& r) { return r.tau_avg_all_s; });
  auto inf = group_mean<double>(
      rows, [](const ResultRow& r) { return r.theta; },
      [](const ResultRow& r) { return r.tau_avg_informed_s; });
  auto uni = group_mean<double>(
      rows, [](const ResultRow& r) { return r.theta; },
      [](const ResultRow& r) { return r.tau_avg_uninformed_s; });

  std::vector<double> thetas;
  for (const auto& [t, v] : all) thetas.push_back(t);
  double ymax = 1.0;
  auto value = [](const std::map<double, std::pair<double, int>>& m, double t) {
    auto it = m.find(t);
    if (it == m.end() || it->second.second == 0)
      return std::numeric_limits<double>::quiet_NaN();
    return it->second.first / it->second.second;
  };
  for (double t : thetas)
    for (const auto* m : {&all, &inf, &uni}) {
      double v = value(*m, t);
      if (!std::isnan(v)) ymax = std::max(ymax, v);
    }
  ymax *= 1.1;

  const double pw = kW - kMarginL - kMarginR, ph = kH - kMarginT - kMarginB;
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
      << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
      << "Per-class average trip time by informed fraction</text>\n";
  out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << svg_num(pw)
      << "\" height=\"" << svg_num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  const char* colors[3] = {"#7f7f7f", "#1f77b4", "#d62728"};
  const char* names[3] = {"all", "informed", "uninformed"};
  const std::map<double, std::pair<double, int>>* groups[3] = {&all, &inf, &uni};

  double slot = pw / std::max<std::size_t>(1, thetas.size());
  double bar = slot / 4.5;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    double x0 = kMarginL + slot * i + slot / 2.0;
    for (int c = 0; c < 3; ++c) {
      double v = value(*groups[c], thetas[i]);
      if (std::isnan(v)) continue;
      double hgt = v / ymax * ph;
      double x = x0 + (c - 1) * bar - bar / 2.0;
      out << "<rect x=\"" << svg_num(x) << "\" y=\"" << svg_num(kMarginT + ph - hgt)
          << "\" width=\"" << svg_num(bar) << "\" height=\"" << svg_num(hgt)
          << "\" fill=\"" << colors[c] << "\"/>\n";
    }
    out << "<text x=\"" << svg_num(x0) << "\" y=\"" << kMarginT + ph + 20
        << "\" text-anchor=\"middle\">theta=" << svg_num(thetas[i]) << "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    double yv = ymax * k / 5.0;
    double y = kMarginT + ph - yv / ymax * ph;
    out << "<text x=\"" << kMarginL - 8 << "\" y=\"" << svg_num(y + 4)
        << "\" text-anchor=\"end\">" << svg_num(yv) << "</text>\n";
  }
  for (int c = 0; c < 3; ++c) {
    double ly = kMarginT + 14 + 16 * c;
    out << "<rect x=\"" << kMarginL + pw + 10 << "\" y=\"" << svg_num(ly - 10)
        << "\" width=\"12\" height=\"12\" fill=\"" << colors[c] << "\"/>\n";
    out << "<text x=\"" << kMarginL + pw + 28 << "\" y=\"" << svg_num(ly) << "\">"
        << names[c] << "</text>\n";
  }
  out << "<text x=\"16\" y=\"" << kMarginT + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kMarginT + ph / 2
      << ")\">tau_avg [s]</text>\n";
  out << "</svg>\n";
}

void emit_outputs(const std::vector<ResultRow>& rows, const std::vector<NamedSeries>& series,
                  const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec && !std::filesystem::is_directory(out_dir))
    throw ConfigError("cannot create output directory: " + out_dir);
  write_results_csv(out_dir + "/results.csv", rows);
  if (!series.empty()) write_series_csv(out_dir + "/series.csv", series);
  chart_tau_vs_theta(out_dir + "/tau_vs_theta.svg", rows);
  chart_series(out_dir + "/moving_average.svg", series);
  chart_tau_vs_tau_up(out_dir + "/tau_vs_tau_up.svg", rows);
  chart_class_bars(out_dir + "/per_class.svg", rows);
}

}  // namespace gridflow
