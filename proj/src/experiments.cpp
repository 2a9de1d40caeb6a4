#include "miskrige/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "miskrige/error.hpp"
#include "miskrige/functions.hpp"
#include "miskrige/kriging.hpp"

namespace miskrige {

namespace {

Box box_from_json(const nlohmann::json& j) {
  Box box;
  if (j.size() == 2 && j[0].is_number()) {
    box.lower = {j[0].get<double>()};
    box.upper = {j[1].get<double>()};
    return box;
  }
  for (const auto& axis : j) {
    if (axis.size() != 2) throw ValidationError("region axes must be [lower, upper] pairs");
    box.lower.push_back(axis[0].get<double>());
    box.upper.push_back(axis[1].get<double>());
  }
  return box;
}

nlohmann::json box_to_json(const Box& box) {
  if (box.dim() == 1) return {box.lower[0], box.upper[0]};
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t a = 0; a < box.dim(); ++a) out.push_back({box.lower[a], box.upper[a]});
  return out;
}

SlopeBand band_from_json(const nlohmann::json& j) {
  SlopeBand band{j.at(0).get<double>(), j.at(1).get<double>()};
  if (!(band.lower < band.upper)) throw ValidationError("slope band must be [lower, upper]");
  return band;
}

bool is_family(const KernelSpec& spec, StudyKind kind) {
  switch (kind) {
    case StudyKind::matern_epistemic: return std::holds_alternative<MaternSpec>(spec);
    case StudyKind::kl_trig: return std::holds_alternative<KLTrigSpec>(spec);
    case StudyKind::wavelet: return std::holds_alternative<WaveletSpec>(spec);
    case StudyKind::fem: return std::holds_alternative<FemSpec>(spec);
  }
  return false;
}

bool is_unit_interval(const Box& box) {
  return box.dim() == 1 && box.lower[0] == 0.0 && box.upper[0] == 1.0;
}

// Smoothness used for the wavelet level coupling: declared s0, or the kernel
// exponent for smooth targets.
double wavelet_coupling_smoothness(const StudyConfig& config) {
  const TargetFunction f = target_from_json(config.target, config.region);
  if (f.smoothness()) return *f.smoothness();
  return std::get<WaveletSpec>(config.kernel).s;
}

KernelSpec row_kernel(const StudyConfig& config, int truncation) {
  KernelSpec spec = config.kernel;
  if (auto* k = std::get_if<KLTrigSpec>(&spec)) k->terms = truncation;
  if (auto* w = std::get_if<WaveletSpec>(&spec)) w->level = truncation;
  if (auto* f = std::get_if<FemSpec>(&spec)) f->mesh = truncation;
  return spec;
}

void check_coupling(const StudyConfig& config, const DesignSet& design, int truncation) {
  const double q = design.separation_radius();
  if (const auto* w = std::get_if<WaveletSpec>(&config.kernel)) {
    const double reach = std::ldexp(static_cast<double>(2 * w->order - 1), -truncation);
    if (!(reach < q)) {
      std::ostringstream msg;
      msg << "wavelet coupling violates 2^-N (2p-1) < q: n = " << design.size() << ", N = "
          << truncation << ", 2^-N (2p-1) = " << reach << ", q = " << q;
      throw ValidationError(msg.str());
    }
  }
  if (std::holds_alternative<FemSpec>(config.kernel)) {
    if (!(q > 1.0 / truncation)) {
      std::ostringstream msg;
      msg << "fem coupling violates q > 1/N: n = " << design.size() << ", N = " << truncation
          << ", q = " << q << ", 1/N = " << 1.0 / truncation;
      throw ValidationError(msg.str());
    }
  }
}

StudyResult run_rows(const StudyConfig& config) {
  config.validate();
  const TargetFunction target = target_from_json(config.target, config.region);
  const std::size_t dim = config.region.dim();

  // The quadrature grids and target samples are shared by every row.
  const std::size_t quad = config.quadrature_points();
  const std::size_t sup = config.sup_grid_points();
  const std::vector<Point> quad_nodes = simpson_nodes(config.region, quad);
  const std::vector<double> quad_weights = simpson_weights(config.region, quad);
  const std::vector<Point> sup_nodes = inset_grid(config.region, sup);
  std::vector<double> quad_target(quad_nodes.size());
  for (std::size_t i = 0; i < quad_nodes.size(); ++i) quad_target[i] = target(quad_nodes[i]);
  std::vector<double> sup_target(sup_nodes.size());
  for (std::size_t i = 0; i < sup_nodes.size(); ++i) sup_target[i] = target(sup_nodes[i]);

  StudyResult result;
  result.config = config;
  for (std::size_t row_index = 0; row_index < config.schedule.size(); ++row_index) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = config.schedule[row_index];
    const DesignSet design = make_design(config.design, n, config.region, config.seed + n);
    const int truncation = coupled_truncation(config, n);
    check_coupling(config, design, truncation);
    const KernelPtr kernel = make_kernel(row_kernel(config, truncation));
    const double nugget = coupled_nugget(config, design.fill_distance());

    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = target(design.points()[i]);

    StudyRow row;
    row.n = n;
    row.truncation = truncation;
    row.nugget = nugget;
    row.fill = design.fill_distance();
    row.separation = design.separation_radius();
    row.mesh_ratio = design.mesh_ratio();
    try {
      const KrigingModel model = fit(kernel, design, y, nugget);
      const Eigen::MatrixXd gram = model.gram().to_dense();
      row.sigma_min = min_eigenvalue(gram);
      row.nonzero_fraction = model.gram().nonzero_fraction();
      row.bandwidth = static_cast<long>(model.gram().bandwidth());
      if (const auto* f = std::get_if<FemSpec>(&config.kernel)) {
        row.bandwidth = fem_assemble(truncation, f->degree).precision_bandwidth();
      }

      // Residual bound ||Y - K alpha|| <= lambda/(sigma_min + lambda) ||Y||, with an
      // allowance for the rounding in forming K alpha.
      const double residual = model.residual_on_design().norm();
      const double floor = std::max(row.sigma_min, 0.0) + nugget;
      const double bound = floor > 0.0 ? nugget / floor * y.norm() : 0.0;
      const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * gram.norm() *
                              model.coefficients().norm();
      if (residual > bound + 1e-8 + rounding) {
        std::ostringstream msg;
        msg << "row n = " << n << ": design residual " << residual
            << " exceeds lambda/(sigma_min + lambda) ||Y|| = " << bound;
        throw NumericalError(msg.str());
      }
      // Raises NumericalBreakdown on significantly negative variance.
      model.predict_variance(design.points());
      std::vector<Point> probes;
      for (std::size_t i = 0; i < sup_nodes.size(); i += std::max<std::size_t>(1, sup_nodes.size() / 97)) {
        probes.push_back(sup_nodes[i]);
      }
      model.predict_variance(probes);

      const Eigen::VectorXd quad_mean = model.predict_mean(quad_nodes);
      std::vector<double> diff(quad_nodes.size());
      for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] = quad_target[i] - quad_mean(static_cast<Eigen::Index>(i));
      }
      row.l2 = l2_norm_sampled(diff, quad_weights);
      const Eigen::VectorXd sup_mean = model.predict_mean(sup_nodes);
      diff.resize(sup_nodes.size());
      for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] = sup_target[i] - sup_mean(static_cast<Eigen::Index>(i));
      }
      row.linf = linf_norm_sampled(diff);
    } catch (const NumericalError& e) {
      throw NumericalError(to_string(config.study) + " study row " + std::to_string(row_index) +
                           " (n = " + std::to_string(n) + "): " + e.what());
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.rows.push_back(row);
  }

  std::vector<std::pair<double, double>> l2_pairs;
  std::vector<std::pair<double, double>> linf_pairs;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const StudyRow& row = result.rows[i];
    l2_pairs.emplace_back(static_cast<double>(row.n), row.l2);
    linf_pairs.emplace_back(static_cast<double>(row.n), row.linf);
    if (i > 0 && row.l2 > 1.2 * result.rows[i - 1].l2) result.monotone = false;
  }
  result.l2_fit = fit_rate(l2_pairs);
  result.linf_fit = fit_rate(linf_pairs);
  result.predicted =
      predicted_slopes(config.study, target.smoothness(), nominal_smoothness(config.kernel), dim);
  result.l2_band = config.l2_band.value_or(
      SlopeBand{result.predicted.l2 - 0.3,
                result.predicted.l2 + (config.study == StudyKind::kl_trig ? 0.4 : 0.3)});
  result.linf_band = config.linf_band;
  result.pass = result.l2_band.contains(result.l2_fit.slope) &&
                result.l2_fit.r_squared >= config.min_r_squared &&
                (!result.linf_band || result.linf_band->contains(result.linf_fit.slope));
  return result;
}

void require_study(const StudyConfig& config, StudyKind kind) {
  if (config.study != kind) {
    throw ValidationError("config describes a " + to_string(config.study) + " study, not " +
                          to_string(kind));
  }
}

}  // namespace

StudyKind parse_study_kind(const std::string& name) {
  if (name == "matern-epistemic" || name == "matern") return StudyKind::matern_epistemic;
  if (name == "kl-trig") return StudyKind::kl_trig;
  if (name == "wavelet") return StudyKind::wavelet;
  if (name == "fem") return StudyKind::fem;
  throw ValidationError("unknown study '" + name +
                        "' (expected matern-epistemic, kl-trig, wavelet or fem)");
}

std::string to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::matern_epistemic: return "matern-epistemic";
    case StudyKind::kl_trig: return "kl-trig";
    case StudyKind::wavelet: return "wavelet";
    case StudyKind::fem: return "fem";
  }
  return "unknown";
}

NuggetPolicy parse_nugget_policy(const std::string& name) {
  if (name == "rate-matched") return NuggetPolicy::rate_matched;
  if (name == "wavelet-linear") return NuggetPolicy::wavelet_linear;
  if (name == "none") return NuggetPolicy::none;
  throw ValidationError("unknown nugget policy '" + name +
                        "' (expected rate-matched, wavelet-linear or none)");
}

std::string to_string(NuggetPolicy policy) {
  switch (policy) {
    case NuggetPolicy::rate_matched: return "rate-matched";
    case NuggetPolicy::wavelet_linear: return "wavelet-linear";
    case NuggetPolicy::none: return "none";
  }
  return "unknown";
}

void StudyConfig::validate() const {
  if (schedule.size() < 4) throw ValidationError("study schedule needs at least 4 sizes");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1) throw ValidationError("study schedule sizes must be >= 1");
    if (i > 0 && schedule[i] <= schedule[i - 1]) {
      throw ValidationError("study schedule must be strictly increasing");
    }
  }
  if (!is_family(kernel, study)) {
    throw ValidationError(to_string(study) + " study needs a " +
                          (study == StudyKind::matern_epistemic ? std::string("matern")
                           : study == StudyKind::kl_trig        ? std::string("kl-trig")
                           : study == StudyKind::wavelet        ? std::string("wavelet")
                                                                : std::string("fem")) +
                          " kernel, got " + family_name(kernel));
  }
  miskrige::validate(row_kernel(*this, 1));
  if (kernel_dim(kernel) != region.dim()) {
    throw ValidationError("kernel dimension does not match the region dimension");
  }
  if (!(nugget_scale > 0.0) || !std::isfinite(nugget_scale)) {
    throw ValidationError("nugget scale must be positive");
  }
  if (nugget_policy == NuggetPolicy::wavelet_linear && study != StudyKind::wavelet) {
    throw ValidationError("the wavelet-linear nugget policy applies to wavelet studies only");
  }
  check_simpson_resolution(region.dim(), quadrature_points());
  check_sup_resolution(region.dim(), sup_grid_points());
  switch (study) {
    case StudyKind::matern_epistemic:
      break;
    case StudyKind::kl_trig:
      if (!is_unit_interval(region.ambient())) {
        throw ValidationError("kl-trig studies need the ambient domain D = (0,1)");
      }
      for (std::size_t n : schedule) {
        if (n % 2 == 0) {
          throw ValidationError("kl-trig schedule must contain odd n only (2N+1 = n), got n = " +
                                std::to_string(n));
        }
      }
      break;
    case StudyKind::wavelet:
      if (region.dim() != 1) throw ValidationError("wavelet studies are one-dimensional");
      if (!(wavelet_coupling_smoothness(*this) > 1.0)) {
        throw ValidationError("wavelet level coupling needs target smoothness s0 > 1");
      }
      break;
    case StudyKind::fem:
      if (!is_unit_interval(region.omega()) || !is_unit_interval(region.ambient())) {
        throw ValidationError("fem studies run on Omega = D = (0,1)");
      }
      if (fem_factor < 1) throw ValidationError("fem coupling factor must be >= 1");
      break;
  }
  target_from_json(target, region);
}

std::size_t StudyConfig::quadrature_points() const {
  if (quadrature != 0) return quadrature;
  return region.dim() == 1 ? 10001 : 201;
}

std::size_t StudyConfig::sup_grid_points() const {
  if (sup_points != 0) return sup_points;
  return region.dim() == 1 ? 10000 : 201;
}

StudyConfig study_config_from_json(const nlohmann::json& j) {
  try {
    StudyConfig c;
    c.study = parse_study_kind(j.at("study").get<std::string>());
    c.schedule = j.at("schedule").get<std::vector<std::size_t>>();
    if (j.contains("region")) {
      const auto& r = j.at("region");
      const Box omega = box_from_json(r.at("omega"));
      c.region = r.contains("ambient") ? Region(omega, box_from_json(r.at("ambient")))
                                       : Region(omega);
    }
    c.design = parse_design_kind(j.value("design", std::string("midpoint")));
    c.seed = j.value("seed", c.seed);
    if (j.contains("target")) c.target = j.at("target");
    nlohmann::json kernel = j.at("kernel");
    // The coupling chooses N per row; accept templates without it.
    if (!kernel.contains("N")) kernel["N"] = 1;
    c.kernel = kernel_spec_from_json(kernel);
    if (j.contains("nugget")) {
      const auto& nug = j.at("nugget");
      c.nugget_policy = parse_nugget_policy(nug.value("policy", std::string("rate-matched")));
      c.nugget_scale = nug.value("scale", 1.0);
    }
    if (j.contains("coupling")) c.fem_factor = j.at("coupling").value("fem_factor", c.fem_factor);
    c.quadrature = j.value("quadrature", std::size_t{0});
    c.sup_points = j.value("sup_points", std::size_t{0});
    if (j.contains("bands")) {
      const auto& bands = j.at("bands");
      if (bands.contains("l2")) c.l2_band = band_from_json(bands.at("l2"));
      if (bands.contains("linf")) c.linf_band = band_from_json(bands.at("linf"));
    }
    c.min_r_squared = j.value("min_r2", c.min_r_squared);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed study config: ") + e.what());
  }
}

nlohmann::json to_json(const StudyConfig& c) {
  nlohmann::json kernel = to_json(c.kernel);
  nlohmann::json j = {
      {"study", to_string(c.study)},
      {"schedule", c.schedule},
      {"region",
       {{"omega", box_to_json(c.region.omega())}, {"ambient", box_to_json(c.region.ambient())}}},
      {"design", to_string(c.design)},
      {"seed", c.seed},
      {"target", c.target},
      {"kernel", kernel},
      {"nugget", {{"policy", to_string(c.nugget_policy)}, {"scale", c.nugget_scale}}},
      {"coupling", {{"fem_factor", c.fem_factor}}},
      {"quadrature", c.quadrature_points()},
      {"sup_points", c.sup_grid_points()},
      {"min_r2", c.min_r_squared}};
  if (c.l2_band) j["bands"]["l2"] = {c.l2_band->lower, c.l2_band->upper};
  if (c.linf_band) j["bands"]["linf"] = {c.linf_band->lower, c.linf_band->upper};
  return j;
}

PredictedSlopes predicted_slopes(StudyKind, std::optional<double> s0, double sn,
                                 std::size_t dim) {
  if (dim != 1 && dim != 2) throw ValidationError("predicted slopes need d = 1 or 2");
  const double effective = s0 ? std::min(*s0, sn) : sn;
  const double d = static_cast<double>(dim);
  return {-effective / d, -(effective - d / 2.0) / d};
}

int coupled_truncation(const StudyConfig& config, std::size_t n) {
  switch (config.study) {
    case StudyKind::matern_epistemic:
      return 0;
    case StudyKind::kl_trig:
      if (n % 2 == 0) {
        throw ValidationError("kl-trig needs odd n so that 2N+1 = n, got n = " + std::to_string(n));
      }
      return static_cast<int>((n - 1) / 2);
    case StudyKind::wavelet: {
      const double s0 = wavelet_coupling_smoothness(config);
      const double exponent = 2.0 * s0 / (s0 - 1.0);
      const double level = std::ceil(exponent * std::log2(static_cast<double>(n)) - 1e-12);
      return static_cast<int>(std::max(level, 0.0));
    }
    case StudyKind::fem:
      return config.fem_factor * static_cast<int>(n);
  }
  return 0;
}

double coupled_nugget(const StudyConfig& config, double fill) {
  double exponent = 0.0;
  switch (config.nugget_policy) {
    case NuggetPolicy::none:
      return 0.0;
    case NuggetPolicy::wavelet_linear:
      exponent = std::get<WaveletSpec>(config.kernel).s - 0.5;
      break;
    case NuggetPolicy::rate_matched:
      switch (config.study) {
        case StudyKind::matern_epistemic:
          exponent = 2.0 * std::get<MaternSpec>(config.kernel).nu;
          break;
        case StudyKind::kl_trig:
          exponent = 2.0 * std::get<KLTrigSpec>(config.kernel).s - 1.0;
          break;
        case StudyKind::wavelet:
          exponent = 2.0 * std::get<WaveletSpec>(config.kernel).s - 1.0;
          break;
        case StudyKind::fem:
          exponent = 1.0;
          break;
      }
      break;
  }
  return config.nugget_scale * std::pow(fill, exponent);
}

StudyResult run_matern_epistemic(const StudyConfig& config) {
  require_study(config, StudyKind::matern_epistemic);
  return run_rows(config);
}

StudyResult run_kl_trig(const StudyConfig& config) {
  require_study(config, StudyKind::kl_trig);
  return run_rows(config);
}

StudyResult run_wavelet(const StudyConfig& config) {
  require_study(config, StudyKind::wavelet);
  return run_rows(config);
}

StudyResult run_fem(const StudyConfig& config) {
  require_study(config, StudyKind::fem);
  return run_rows(config);
}

StudyResult run_study(const StudyConfig& config) {
  switch (config.study) {
    case StudyKind::matern_epistemic: return run_matern_epistemic(config);
    case StudyKind::kl_trig: return run_kl_trig(config);
    case StudyKind::wavelet: return run_wavelet(config);
    case StudyKind::fem: return run_fem(config);
  }
  throw ValidationError("unknown study");
}

nlohmann::json summary_json(const StudyResult& result) {
  nlohmann::json j = {{"study", to_string(result.config.study)},
                      {"predicted_l2_slope", result.predicted.l2},
                      {"fitted_l2_slope", result.l2_fit.slope},
                      {"r2", result.l2_fit.r_squared},
                      {"pass", result.pass},
                      {"predicted_linf_slope", result.predicted.linf},
                      {"fitted_linf_slope", result.linf_fit.slope},
                      {"linf_r2", result.linf_fit.r_squared},
                      {"l2_band", {result.l2_band.lower, result.l2_band.upper}},
                      {"monotone_l2", result.monotone},
                      {"rows", result.rows.size()}};
  if (result.linf_band) j["linf_band"] = {result.linf_band->lower, result.linf_band->upper};
  std::vector<std::string> warnings = result.l2_fit.warnings;
  warnings.insert(warnings.end(), result.linf_fit.warnings.begin(), result.linf_fit.warnings.end());
  if (!warnings.empty()) j["warnings"] = warnings;
  return j;
}

}  // namespace miskrige
