#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "miskrige/analysis.hpp"
#include "miskrige/experiments.hpp"
#include "miskrige/geometry.hpp"

namespace miskrige {

/// Shortest round-trip text: 17 significant digits.
std::string format_double(double value);

/// Columns x (and y in d = 2).
void write_design_csv(std::ostream& out, const DesignSet& design);
/// Columns n, N, lambda, h, q, rho, l2, linf, sigma_min, nnz_fraction, bandwidth.
void write_rows_csv(std::ostream& out, const std::vector<StudyRow>& rows);
/// Columns x (, y), mean, variance.
void write_prediction_csv(std::ostream& out, const std::vector<Point>& points,
                          const std::vector<double>& mean, const std::vector<double>& variance);

/// Comma-separated table with a header line; no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column; throws ValidationError when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (n, error)
  std::optional<RateFit> fit;
};

struct PlotSpec {
  std::string title;
  std::vector<PlotSeries> series;
  /// Dashed reference line with this slope through the first point of the first series.
  std::optional<double> reference_slope;
};

/// Self-contained log-log SVG. Each fitted series is annotated "slope=<value>".
std::string render_loglog_svg(const PlotSpec& spec);

/// Plot of a study's l2 and linf errors with fitted and predicted slopes.
PlotSpec study_plot(const StudyResult& result);

}  // namespace miskrige
