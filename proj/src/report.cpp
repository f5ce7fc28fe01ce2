#include "dtnlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dtnlab/config.hpp"

namespace dtnlab {

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw ContractError("CSV row does not match the schema");
  rows.push_back(std::move(row));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string render_csv(const CsvTable& t, const std::string& config_hash) {
  std::string out = "schema_version,config_hash";
  for (const auto& h : t.header) out += "," + csv_cell(h);
  out += "\n";
  const std::string prefix = std::to_string(kSchemaVersion) + "," + config_hash;
  for (const auto& row : t.rows) {
    out += prefix;
    for (const auto& c : row) out += "," + csv_cell(c);
    out += "\n";
  }
  return out;
}

CsvTable convergence_table(const ConvergenceReport& r) {
  CsvTable t{{"n_osc", "grid_n", "h", "metric", "value", "runtime_ms"}, {}};
  for (const auto& row : r.rows) {
    t.add({std::to_string(row.n_osc), std::to_string(row.grid_n), format_number(row.h), row.metric,
           format_number(row.value), format_number(row.runtime_ms)});
  }
  return t;
}

std::string render_svg(const ConvergenceReport& r, const std::string& title) {
  constexpr double W = 640, H = 400, L = 70, R = 170, T = 40, B = 50;
  std::map<std::string, std::vector<std::pair<double, double>>> lines;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& row : r.rows) {
    if (!(row.value > 0.0) || !std::isfinite(row.value)) continue;
    const double x = std::log2(static_cast<double>(row.n_osc));
    const double y = std::log10(row.value);
    lines[row.metric].emplace_back(x, y);
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (lines.empty()) {
    xmin = ymin = 0;
    xmax = ymax = 1;
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1;
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  if (ymax - ymin < 1) ymax = ymin + 1;
  const auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (double y = ymin; y <= ymax + 1e-9; y += 1) {
    s << "<text x=\"" << L - 8 << "\" y=\"" << py(y) + 4 << "\" font-family=\"sans-serif\" font-size=\"11\" "
      << "text-anchor=\"end\">1e" << static_cast<int>(y) << "</text>\n";
  }
  std::set<double> ticks;
  for (const auto& [m, pts] : lines)
    for (const auto& pt : pts) ticks.insert(pt.first);
  for (double x : ticks) {
    s << "<text x=\"" << px(x) << "\" y=\"" << H - B + 16 << "\" font-family=\"sans-serif\" font-size=\"11\" "
      << "text-anchor=\"middle\">" << std::lround(std::exp2(x)) << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
    << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">n_osc</text>\n";
  int k = 0;
  for (auto& [metric, pts] : lines) {
    std::sort(pts.begin(), pts.end());
    const char* col = colors[k % 7];
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) s << (i ? " " : "") << px(pts[i].first) << "," << py(pts[i].second);
    s << "\"/>\n";
    s << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * k + 10 << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\" fill=\"" << col << "\">" << metric << "</text>\n";
    ++k;
  }
  s << "</svg>\n";
  return s.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << content;
  if (!f) throw ConfigError("failed writing " + path);
}

}  // namespace dtnlab
