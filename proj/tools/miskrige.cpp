// Command-line front end: designs, kernel evaluation, kriging, studies, rate fits, plots.
#include <algorithm>
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "miskrige/error.hpp"
#include "miskrige/experiments.hpp"
#include "miskrige/functions.hpp"
#include "miskrige/io.hpp"
#include "miskrige/kernels.hpp"
#include "miskrige/kriging.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace miskrige;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

// Inline JSON, or @path to read it from a file.
json parse_json_argument(const std::string& text, const std::string& what) {
  const std::string body = (!text.empty() && text[0] == '@') ? read_file(text.substr(1)) : text;
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON for " + what + ": " + e.what());
  }
}

Point parse_point(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string cell;
  while (std::getline(stream, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ValidationError("cannot parse coordinate '" + cell + "'");
    }
  }
  if (values.size() == 1) return Point(values[0]);
  if (values.size() == 2) return Point(values[0], values[1]);
  throw ValidationError("points have one or two comma-separated coordinates: '" + text + "'");
}

struct RegionFlags {
  double lo = 0.0;
  double hi = 1.0;
  std::optional<double> ambient_lo;
  std::optional<double> ambient_hi;
  int dim = 1;

  void attach(CLI::App* app) {
    app->add_option("--lo", lo, "Lower end of Omega on every axis");
    app->add_option("--hi", hi, "Upper end of Omega on every axis");
    app->add_option("--ambient-lo", ambient_lo, "Lower end of the ambient domain D");
    app->add_option("--ambient-hi", ambient_hi, "Upper end of the ambient domain D");
    app->add_option("--dim", dim, "Dimension (1 or 2)");
  }

  Region region() const {
    if (dim != 1 && dim != 2) throw ValidationError("--dim must be 1 or 2");
    if (!(lo < hi)) throw ValidationError("--lo must be below --hi");
    Box omega{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
    Box ambient{std::vector<double>(dim, ambient_lo.value_or(lo)),
                std::vector<double>(dim, ambient_hi.value_or(hi))};
    return Region(omega, ambient);
  }
};

std::vector<Point> read_points(const CsvTable& table) {
  const std::vector<double> xs = table.numeric_column("x");
  std::vector<Point> points;
  if (std::find(table.header.begin(), table.header.end(), "y") != table.header.end()) {
    const std::vector<double> ys = table.numeric_column("y");
    for (std::size_t i = 0; i < xs.size(); ++i) points.emplace_back(xs[i], ys[i]);
  } else {
    for (double x : xs) points.emplace_back(x);
  }
  return points;
}

json rate_pairs_json(const CsvTable& table, const std::string& column) {
  const std::vector<double> ns = table.numeric_column("n");
  const std::vector<double> errors = table.numeric_column(column);
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < ns.size(); ++i) pairs.emplace_back(ns[i], errors[i]);
  return to_json(fit_rate(pairs));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kriging under kernel misspecification: designs, kernels, fits and rate studies"};
  app.require_subcommand(1);

  // design
  auto* design_cmd = app.add_subcommand("design", "Generate a design and report h, q, rho");
  std::string design_kind = "midpoint";
  long long design_n = 0;
  std::uint64_t design_seed = 1;
  std::size_t design_resolution = 0;
  std::string design_out;
  RegionFlags design_region;
  design_cmd->add_option("--kind", design_kind, "midpoint, jittered or iid");
  design_cmd->add_option("--n", design_n, "Number of points")->required();
  design_cmd->add_option("--seed", design_seed, "Seed for random designs");
  design_cmd->add_option("--fill-resolution", design_resolution,
                         "Grid intervals per axis for the fill distance (0 = default)");
  design_cmd->add_option("--out", design_out, "Output CSV path");
  design_region.attach(design_cmd);

  // kernel-eval
  auto* eval_cmd = app.add_subcommand("kernel-eval", "Evaluate a kernel at point pairs");
  std::string eval_kernel;
  std::vector<std::string> eval_x;
  std::vector<std::string> eval_y;
  eval_cmd->add_option("--kernel", eval_kernel, "Kernel spec as JSON or @file")->required();
  eval_cmd->add_option("--x", eval_x, "First points (x or x,y)")->required();
  eval_cmd->add_option("--y", eval_y, "Second points, paired with --x")->required();

  // krige
  auto* krige_cmd = app.add_subcommand("krige", "Fit a kriging model and predict on a grid");
  std::string krige_kernel;
  std::string krige_design;
  std::string krige_target;
  double krige_nugget = 0.0;
  std::size_t krige_points = 101;
  std::string krige_out;
  RegionFlags krige_region;
  krige_cmd->add_option("--kernel", krige_kernel, "Kernel spec as JSON or @file")->required();
  krige_cmd->add_option("--design", krige_design, "Design CSV (columns x[,y][,value])")->required();
  krige_cmd->add_option("--target", krige_target,
                        "Target spec as JSON or @file; otherwise the design's value column");
  krige_cmd->add_option("--nugget", krige_nugget, "Nugget lambda >= 0");
  krige_cmd->add_option("--points", krige_points, "Prediction grid points per axis");
  krige_cmd->add_option("--out", krige_out, "Prediction CSV path (x, mean, variance)");
  krige_region.attach(krige_cmd);

  // study
  auto* study_cmd = app.add_subcommand("study", "Run a convergence study from a JSON config");
  std::string study_config;
  std::string study_out = ".";
  study_cmd->add_option("--config", study_config, "Study config JSON")->required();
  study_cmd->add_option("--out-dir", study_out, "Directory for rows.csv, summary.json, plot.svg");

  // rates
  auto* rates_cmd = app.add_subcommand("rates", "Fit log-log rates to a rows CSV");
  std::string rates_rows;
  std::vector<std::string> rates_columns = {"l2", "linf"};
  rates_cmd->add_option("--rows", rates_rows, "Rows CSV with an n column")->required();
  rates_cmd->add_option("--columns", rates_columns, "Error columns to fit");

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "Render a log-log convergence plot as SVG");
  std::string plot_rows;
  std::string plot_out;
  std::optional<double> plot_predicted;
  std::string plot_title = "convergence";
  plot_cmd->add_option("--rows", plot_rows, "Rows CSV with n, l2 and linf columns")->required();
  plot_cmd->add_option("--out", plot_out, "Output SVG path")->required();
  plot_cmd->add_option("--predicted", plot_predicted, "Predicted L2 slope reference line");
  plot_cmd->add_option("--title", plot_title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*design_cmd) {
      if (design_n < 1) throw ValidationError("--n must be >= 1 (got " + std::to_string(design_n) + ")");
      const Region region = design_region.region();
      DesignSet design = make_design(parse_design_kind(design_kind),
                                     static_cast<std::size_t>(design_n), region, design_seed);
      if (design_resolution != 0) design = DesignSet(region, design.points(), design_resolution);
      if (!design_out.empty()) {
        std::ostringstream csv;
        write_design_csv(csv, design);
        write_file(design_out, csv.str());
      }
      std::cout << json{{"n", design.size()},
                        {"h", design.fill_distance()},
                        {"q", design.separation_radius()},
                        {"rho", design.mesh_ratio()}}
                       .dump()
                << '\n';
    } else if (*eval_cmd) {
      if (eval_x.size() != eval_y.size()) {
        throw ValidationError("--x and --y need the same number of points");
      }
      const KernelPtr kernel = make_kernel(kernel_spec_from_json(parse_json_argument(eval_kernel, "--kernel")));
      json values = json::array();
      for (std::size_t i = 0; i < eval_x.size(); ++i) {
        values.push_back(kernel->eval(parse_point(eval_x[i]), parse_point(eval_y[i])));
      }
      std::cout << json{{"kernel", to_json(kernel->spec())},
                        {"nominal_smoothness", kernel->nominal_smoothness()},
                        {"values", values}}
                       .dump()
                << '\n';
    } else if (*krige_cmd) {
      const KernelPtr kernel =
          make_kernel(kernel_spec_from_json(parse_json_argument(krige_kernel, "--kernel")));
      const Region region = krige_region.region();
      std::ifstream in(krige_design);
      if (!in) throw ValidationError("cannot open '" + krige_design + "'");
      const CsvTable table = read_csv(in);
      const DesignSet design(region, read_points(table));
      Eigen::VectorXd y(static_cast<Eigen::Index>(design.size()));
      if (!krige_target.empty()) {
        const TargetFunction f = target_from_json(parse_json_argument(krige_target, "--target"), region);
        for (std::size_t i = 0; i < design.size(); ++i) y(static_cast<Eigen::Index>(i)) = f(design.points()[i]);
      } else {
        const std::vector<double> values = table.numeric_column("value");
        for (std::size_t i = 0; i < values.size(); ++i) y(static_cast<Eigen::Index>(i)) = values[i];
      }
      const KrigingModel model = fit(kernel, design, y, krige_nugget);
      if (krige_points < 2) throw ValidationError("--points must be >= 2");
      std::vector<Point> grid;
      const Box& box = region.omega();
      auto axis = [&](std::size_t a, std::size_t i) {
        return box.lower[a] + (box.upper[a] - box.lower[a]) * static_cast<double>(i) /
                                  static_cast<double>(krige_points - 1);
      };
      for (std::size_t i = 0; i < krige_points; ++i) {
        if (region.dim() == 1) {
          grid.emplace_back(axis(0, i));
        } else {
          for (std::size_t j = 0; j < krige_points; ++j) grid.emplace_back(axis(0, i), axis(1, j));
        }
      }
      const Eigen::VectorXd mean = model.predict_mean(grid);
      const Eigen::VectorXd variance = model.predict_variance(grid);
      if (!krige_out.empty()) {
        std::ostringstream csv;
        write_prediction_csv(csv, grid, {mean.data(), mean.data() + mean.size()},
                             {variance.data(), variance.data() + variance.size()});
        write_file(krige_out, csv.str());
      }
      std::cout << json{{"n", design.size()},
                        {"nugget", krige_nugget},
                        {"relative_residual", model.relative_residual()},
                        {"rkhs_norm_sq", model.rkhs_norm_sq()},
                        {"design_residual_norm", model.residual_on_design().norm()},
                        {"max_variance", variance.maxCoeff()}}
                       .dump()
                << '\n';
    } else if (*study_cmd) {
      const StudyConfig config = study_config_from_json(parse_json_argument("@" + study_config, "--config"));
      const StudyResult result = run_study(config);
      std::error_code ec;
      fs::create_directories(study_out, ec);
      if (ec) throw ValidationError("cannot create '" + study_out + "': " + ec.message());
      std::ostringstream csv;
      write_rows_csv(csv, result.rows);
      write_file((fs::path(study_out) / "rows.csv").string(), csv.str());
      const json summary = summary_json(result);
      write_file((fs::path(study_out) / "summary.json").string(), summary.dump(2) + "\n");
      write_file((fs::path(study_out) / "plot.svg").string(), render_loglog_svg(study_plot(result)));
      for (const StudyRow& row : result.rows) {
        std::cerr << "n=" << row.n << " N=" << row.truncation << " l2=" << row.l2
                  << " linf=" << row.linf << " time=" << row.wall_seconds << "s\n";
      }
      std::cout << summary.dump() << '\n';
    } else if (*rates_cmd) {
      std::ifstream in(rates_rows);
      if (!in) throw ValidationError("cannot open '" + rates_rows + "'");
      const CsvTable table = read_csv(in);
      if (table.rows.empty()) throw ValidationError("rows CSV has no data rows");
      json out;
      for (const std::string& column : rates_columns) out[column] = rate_pairs_json(table, column);
      std::cout << out.dump() << '\n';
    } else if (*plot_cmd) {
      std::ifstream in(plot_rows);
      if (!in) throw ValidationError("cannot open '" + plot_rows + "'");
      const CsvTable table = read_csv(in);
      if (table.rows.empty()) throw ValidationError("rows CSV has no data rows");
      const std::vector<double> ns = table.numeric_column("n");
      PlotSpec spec;
      spec.title = plot_title;
      spec.reference_slope = plot_predicted;
      json fits;
      for (const std::string column : {"l2", "linf"}) {
        // l2 is required; linf is drawn when present.
        if (column == "linf" && std::find(table.header.begin(), table.header.end(), column) == table.header.end()) {
          continue;
        }
        const std::vector<double> errors = table.numeric_column(column);
        PlotSeries series{column == "l2" ? "L2 error" : "Linf error", {}, std::nullopt};
        for (std::size_t i = 0; i < ns.size(); ++i) series.points.emplace_back(ns[i], errors[i]);
        series.fit = fit_rate(series.points);
        fits[column] = series.fit->slope;
        spec.series.push_back(std::move(series));
      }
      write_file(plot_out, render_loglog_svg(spec));
      std::cout << json{{"out", plot_out}, {"slopes", fits}}.dump() << '\n';
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
