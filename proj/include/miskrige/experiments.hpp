#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "miskrige/analysis.hpp"
#include "miskrige/geometry.hpp"
#include "miskrige/kernels.hpp"

namespace miskrige {

enum class StudyKind { matern_epistemic, kl_trig, wavelet, fem };

StudyKind parse_study_kind(const std::string& name);
std::string to_string(StudyKind kind);

/// How the nugget follows the fill distance h.
///  rate-matched: matern h^{2 nu}, kl-trig h^{2s-1}, wavelet h^{2s-1}, fem h
///  wavelet-linear: h^{s-1/2} (wavelet only)
///  none: lambda = 0
enum class NuggetPolicy { rate_matched, wavelet_linear, none };

NuggetPolicy parse_nugget_policy(const std::string& name);
std::string to_string(NuggetPolicy policy);

struct SlopeBand {
  double lower;
  double upper;
  bool contains(double slope) const { return slope >= lower && slope <= upper; }
};

struct StudyConfig {
  StudyKind study = StudyKind::matern_epistemic;
  std::vector<std::size_t> schedule;
  Region region = Region::unit_interval();
  DesignKind design = DesignKind::midpoint_grid;
  std::uint64_t seed = 1;
  nlohmann::json target = {{"kind", "sine"}};
  /// Kernel template; the truncation N is overwritten per row by the coupling.
  KernelSpec kernel = MaternSpec{};
  NuggetPolicy nugget_policy = NuggetPolicy::rate_matched;
  double nugget_scale = 1.0;
  int fem_factor = 4;             // N = fem_factor * n
  std::size_t quadrature = 0;     // Simpson nodes per axis; 0 = default
  std::size_t sup_points = 0;     // inset sup-norm grid per axis; 0 = default
  std::optional<SlopeBand> l2_band;
  std::optional<SlopeBand> linf_band;
  double min_r_squared = 0.9;

  /// Checks every field and the per-study couplings that do not need a design.
  void validate() const;
  std::size_t quadrature_points() const;
  std::size_t sup_grid_points() const;
};

StudyConfig study_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StudyConfig& config);

struct StudyRow {
  std::size_t n = 0;
  int truncation = 0;  // N; 0 where the kernel has none
  double nugget = 0.0;
  double fill = 0.0;
  double separation = 0.0;
  double mesh_ratio = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double sigma_min = 0.0;
  double nonzero_fraction = 1.0;
  long bandwidth = 0;  // precision band for fem, Gram band otherwise
  double wall_seconds = 0.0;  // not written to CSV
};

struct PredictedSlopes {
  double l2;
  double linf;
};

/// L2: -min(s0, sN)/d; Linf: -(min(s0, sN) - d/2)/d. A smooth target (nullopt)
/// takes min = sN.
PredictedSlopes predicted_slopes(StudyKind kind, std::optional<double> s0, double sn,
                                 std::size_t dim);

struct StudyResult {
  StudyConfig config;
  std::vector<StudyRow> rows;
  RateFit l2_fit;
  RateFit linf_fit;
  PredictedSlopes predicted{0.0, 0.0};
  SlopeBand l2_band{0.0, 0.0};
  std::optional<SlopeBand> linf_band;
  bool pass = false;
  /// L2 error never grows by more than 20% from one row to the next.
  bool monotone = true;
};

/// Per-study entry points; each checks the study tag.
StudyResult run_matern_epistemic(const StudyConfig& config);
StudyResult run_kl_trig(const StudyConfig& config);
StudyResult run_wavelet(const StudyConfig& config);
StudyResult run_fem(const StudyConfig& config);
/// Dispatches on config.study.
StudyResult run_study(const StudyConfig& config);

/// Truncation N used for a row of n points (0 for Matern).
int coupled_truncation(const StudyConfig& config, std::size_t n);
/// Nugget for a row with fill distance h.
double coupled_nugget(const StudyConfig& config, double fill);

/// {study, predicted_l2_slope, fitted_l2_slope, r2, pass, ...}
nlohmann::json summary_json(const StudyResult& result);

}  // namespace miskrige
