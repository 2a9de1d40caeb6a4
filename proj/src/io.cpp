#include "miskrige/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "miskrige/error.hpp"

namespace miskrige {

namespace {

std::string fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
  return buffer;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_design_csv(std::ostream& out, const DesignSet& design) {
  out << (design.dim() == 1 ? "x\n" : "x,y\n");
  for (const Point& p : design.points()) {
    out << format_double(p[0]);
    if (design.dim() == 2) out << ',' << format_double(p[1]);
    out << '\n';
  }
}

void write_rows_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
  out << "n,N,lambda,h,q,rho,l2,linf,sigma_min,nnz_fraction,bandwidth\n";
  for (const StudyRow& r : rows) {
    out << r.n << ',' << r.truncation << ',' << format_double(r.nugget) << ','
        << format_double(r.fill) << ',' << format_double(r.separation) << ','
        << format_double(r.mesh_ratio) << ',' << format_double(r.l2) << ','
        << format_double(r.linf) << ',' << format_double(r.sigma_min) << ','
        << format_double(r.nonzero_fraction) << ',' << r.bandwidth << '\n';
  }
}

void write_prediction_csv(std::ostream& out, const std::vector<Point>& points,
                          const std::vector<double>& mean, const std::vector<double>& variance) {
  if (points.size() != mean.size() || points.size() != variance.size()) {
    throw ValidationError("prediction columns have different lengths");
  }
  const bool planar = !points.empty() && points.front().dim() == 2;
  out << (planar ? "x,y,mean,variance\n" : "x,mean,variance\n");
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << format_double(points[i][0]) << ',';
    if (planar) out << format_double(points[i][1]) << ',';
    out << format_double(mean[i]) << ',' << format_double(variance[i]) << '\n';
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("CSV is missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t index = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (index >= rows[r].size()) {
      throw ValidationError("CSV row " + std::to_string(r + 1) + " is missing column '" + name + "'");
    }
    try {
      std::size_t used = 0;
      out.push_back(std::stod(rows[r][index], &used));
      if (used != rows[r][index].size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw ValidationError("CSV column '" + name + "' row " + std::to_string(r + 1) +
                            " is not a number: '" + rows[r][index] + "'");
    }
  }
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      table.header = split(line);
      first = false;
    } else {
      table.rows.push_back(split(line));
    }
  }
  if (first) throw ValidationError("CSV input is empty");
  return table;
}

std::string render_loglog_svg(const PlotSpec& spec) {
  constexpr double width = 640.0;
  constexpr double height = 440.0;
  constexpr double left = 70.0;
  constexpr double right = 170.0;
  constexpr double top = 40.0;
  constexpr double bottom = 60.0;

  double x_lo = HUGE_VAL, x_hi = -HUGE_VAL, y_lo = HUGE_VAL, y_hi = -HUGE_VAL;
  for (const auto& s : spec.series) {
    for (const auto& [n, e] : s.points) {
      if (!(n > 0.0) || !(e > 0.0)) continue;
      x_lo = std::min(x_lo, std::log10(n));
      x_hi = std::max(x_hi, std::log10(n));
      y_lo = std::min(y_lo, std::log10(e));
      y_hi = std::max(y_hi, std::log10(e));
    }
  }
  if (x_lo > x_hi) throw ValidationError("nothing to plot: no positive (n, error) pairs");
  x_lo = std::floor(x_lo * 10.0) / 10.0 - 0.05;
  x_hi = std::ceil(x_hi * 10.0) / 10.0 + 0.05;
  y_lo = std::floor(y_lo);
  y_hi = std::ceil(y_hi);
  if (y_hi - y_lo < 1.0) y_hi = y_lo + 1.0;

  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](double lx) { return left + (lx - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double ly) { return top + (y_hi - ly) / (y_hi - y_lo) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
      << escape_xml(spec.title) << "</text>\n"
      << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Decade gridlines on the error axis, one tick per n on the other.
  for (int e = static_cast<int>(y_lo); e <= static_cast<int>(y_hi); ++e) {
    const double y = py(e);
    svg << "<line x1=\"" << left << "\" y1=\"" << fixed(y, 2) << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << fixed(y, 2) << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << fixed(y + 4, 2)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e" << e
        << "</text>\n";
  }
  for (const auto& [n, e] : spec.series.front().points) {
    if (!(n > 0.0)) continue;
    const double x = px(std::log10(n));
    svg << "<text x=\"" << fixed(x, 2) << "\" y=\"" << top + plot_h + 18
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << n
        << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 16
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">n</text>\n"
      << "<text x=\"18\" y=\"" << top + plot_h / 2
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 "
      << top + plot_h / 2 << ")\">error</text>\n";

  double legend_y = top + 10.0;
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const PlotSeries& s = spec.series[i];
    const char* color = kColors[i % 4];
    std::string path;
    for (const auto& [n, e] : s.points) {
      if (!(n > 0.0) || !(e > 0.0)) continue;
      path += (path.empty() ? "M" : " L") + fixed(px(std::log10(n)), 2) + ' ' +
              fixed(py(std::log10(e)), 2);
      svg << "<circle cx=\"" << fixed(px(std::log10(n)), 2) << "\" cy=\""
          << fixed(py(std::log10(e)), 2) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    svg << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    svg << "<text x=\"" << left + plot_w + 10 << "\" y=\"" << legend_y
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">"
        << escape_xml(s.label) << "</text>\n";
    legend_y += 16.0;
    if (s.fit) {
      const double a = std::log10(s.fit->points.front().first);
      const double b = std::log10(s.fit->points.back().first);
      // The fit is in natural logs; convert the intercept to base 10.
      const double offset = s.fit->intercept / std::log(10.0);
      const double fa = offset + s.fit->slope * a;
      const double fb = offset + s.fit->slope * b;
      svg << "<line x1=\"" << fixed(px(a), 2) << "\" y1=\"" << fixed(py(fa), 2) << "\" x2=\""
          << fixed(px(b), 2) << "\" y2=\"" << fixed(py(fb), 2) << "\" stroke=\"" << color
          << "\" stroke-opacity=\"0.5\" stroke-width=\"4\"/>\n";
      svg << "<text x=\"" << left + plot_w + 10 << "\" y=\"" << legend_y
          << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">slope="
          << fixed(s.fit->slope, 2) << "</text>\n";
      legend_y += 16.0;
    }
  }
  if (spec.reference_slope && !spec.series.front().points.empty()) {
    const auto [n0, e0] = spec.series.front().points.front();
    const auto n1 = spec.series.front().points.back().first;
    if (n0 > 0.0 && e0 > 0.0 && n1 > 0.0) {
      const double a = std::log10(n0);
      const double b = std::log10(n1);
      const double fa = std::log10(e0);
      const double fb = fa + *spec.reference_slope * (b - a);
      svg << "<line x1=\"" << fixed(px(a), 2) << "\" y1=\"" << fixed(py(fa), 2) << "\" x2=\""
          << fixed(px(b), 2) << "\" y2=\"" << fixed(py(fb), 2)
          << "\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n"
          << "<text x=\"" << left + plot_w + 10 << "\" y=\"" << legend_y
          << "\" font-family=\"sans-serif\" font-size=\"12\">predicted="
          << fixed(*spec.reference_slope, 2) << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

PlotSpec study_plot(const StudyResult& result) {
  PlotSpec spec;
  spec.title = to_string(result.config.study) + " convergence";
  PlotSeries l2{"L2 error", {}, result.l2_fit};
  PlotSeries linf{"Linf error", {}, result.linf_fit};
  for (const StudyRow& row : result.rows) {
    l2.points.emplace_back(static_cast<double>(row.n), row.l2);
    linf.points.emplace_back(static_cast<double>(row.n), row.linf);
  }
  spec.series = {l2, linf};
  spec.reference_slope = result.predicted.l2;
  return spec;
}

}  // namespace miskrige
