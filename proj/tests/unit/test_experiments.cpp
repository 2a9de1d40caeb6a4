#include <doctest.h>

#include <cmath>
#include <sstream>

#include "miskrige/error.hpp"
#include "miskrige/experiments.hpp"
#include "miskrige/io.hpp"
#include "miskrige/kriging.hpp"

using namespace miskrige;

namespace {

StudyConfig from(const char* text) { return study_config_from_json(nlohmann::json::parse(text)); }

std::string rows_csv(const StudyResult& result) {
  std::ostringstream out;
  write_rows_csv(out, result.rows);
  return out.str();
}

}  // namespace

TEST_CASE("predicted slopes") {
  const PredictedSlopes under = predicted_slopes(StudyKind::matern_epistemic, 2.0, 1.0, 1);
  CHECK(under.l2 == -1.0);
  CHECK(under.linf == -0.5);
  const PredictedSlopes fem = predicted_slopes(StudyKind::fem, 1.0, 1.0, 1);
  CHECK(fem.l2 == -1.0);
  CHECK(fem.linf == -0.5);
  const PredictedSlopes kl = predicted_slopes(StudyKind::kl_trig, 3.0, 2.0, 1);
  CHECK(kl.l2 == -2.0);
  CHECK(kl.linf == -1.5);
  // The smooth tag takes the kernel smoothness.
  const PredictedSlopes smooth = predicted_slopes(StudyKind::matern_epistemic, std::nullopt, 2.0, 1);
  CHECK(smooth.l2 == -2.0);
  CHECK(smooth.linf == -1.5);
  const PredictedSlopes planar = predicted_slopes(StudyKind::matern_epistemic, 3.0, 2.5, 2);
  CHECK(planar.l2 == -1.25);
  CHECK(planar.linf == -0.75);
  CHECK_THROWS_AS(predicted_slopes(StudyKind::fem, 1.0, 1.0, 3), ValidationError);
}

TEST_CASE("tag and policy names") {
  for (StudyKind kind : {StudyKind::matern_epistemic, StudyKind::kl_trig, StudyKind::wavelet, StudyKind::fem}) {
    CHECK(parse_study_kind(to_string(kind)) == kind);
  }
  for (NuggetPolicy p : {NuggetPolicy::rate_matched, NuggetPolicy::wavelet_linear, NuggetPolicy::none}) {
    CHECK(parse_nugget_policy(to_string(p)) == p);
  }
  CHECK_THROWS_AS(parse_study_kind("spline"), ValidationError);
  CHECK_THROWS_AS(parse_nugget_policy("huge"), ValidationError);
}

TEST_CASE("couplings") {
  const StudyConfig kl = from(R"({"study": "kl-trig", "schedule": [17, 33, 65, 129],
    "region": {"omega": [0.2, 0.8], "ambient": [0, 1]}, "kernel": {"family": "kl-trig", "s": 2}})");
  CHECK(coupled_truncation(kl, 17) == 8);
  CHECK(coupled_truncation(kl, 257) == 128);
  CHECK_THROWS_AS(coupled_truncation(kl, 16), ValidationError);
  CHECK(coupled_nugget(kl, 0.1) == doctest::Approx(1e-3).epsilon(1e-14));

  const StudyConfig wavelet = from(R"({"study": "wavelet", "schedule": [16, 32, 64, 128, 256],
    "target": {"kind": "fourier", "s0": 1.5, "K": 50, "seed": 3},
    "kernel": {"family": "wavelet", "s": 1.5, "p": 2}})");
  // ceil(6 log2 n) with s0 = 1.5.
  CHECK(coupled_truncation(wavelet, 16) == 24);
  CHECK(coupled_truncation(wavelet, 256) == 48);
  CHECK(coupled_truncation(wavelet, 20) == static_cast<int>(std::ceil(6.0 * std::log2(20.0))));
  CHECK(coupled_nugget(wavelet, 0.25) == doctest::Approx(0.0625).epsilon(1e-14));
  StudyConfig linear = wavelet;
  linear.nugget_policy = NuggetPolicy::wavelet_linear;
  CHECK(coupled_nugget(linear, 0.25) == doctest::Approx(0.25).epsilon(1e-14));

  const StudyConfig fem = from(R"({"study": "fem", "schedule": [16, 32, 64, 128],
    "target": {"kind": "truncated-power", "m": 1, "c": 0.5}, "kernel": {"family": "fem", "p": 1}})");
  CHECK(coupled_truncation(fem, 16) == 64);
  CHECK(coupled_nugget(fem, 0.03) == doctest::Approx(0.03).epsilon(1e-15));

  const StudyConfig matern = from(R"({"study": "matern-epistemic", "schedule": [16, 32, 64, 128],
    "kernel": {"family": "matern", "nu": 1.5}, "nugget": {"policy": "rate-matched", "scale": 2}})");
  CHECK(coupled_truncation(matern, 64) == 0);
  CHECK(coupled_nugget(matern, 0.1) == doctest::Approx(2e-3).epsilon(1e-14));
  StudyConfig bare = matern;
  bare.nugget_policy = NuggetPolicy::none;
  CHECK(coupled_nugget(bare, 0.1) == 0.0);
}

TEST_CASE("config validation") {
  CHECK_THROWS_WITH_AS(from(R"({"study": "kl-trig", "schedule": [17, 32, 65, 129],
    "region": {"omega": [0.2, 0.8], "ambient": [0, 1]}, "kernel": {"family": "kl-trig", "s": 2}})"),
                       doctest::Contains("odd"), ValidationError);
  CHECK_THROWS_AS(from(R"({"study": "kl-trig", "schedule": [17, 33, 65, 129],
    "region": {"omega": [0.2, 0.8], "ambient": [0, 2]}, "kernel": {"family": "kl-trig", "s": 2}})"),
                  ValidationError);
  CHECK_THROWS_AS(from(R"({"study": "fem", "schedule": [16, 32, 64, 128],
    "region": {"omega": [0.2, 0.8], "ambient": [0, 1]}, "kernel": {"family": "fem", "p": 1}})"),
                  ValidationError);
  CHECK_THROWS_AS(from(R"({"study": "matern", "schedule": [16, 32, 64],
    "kernel": {"family": "matern", "nu": 1.5}})"), ValidationError);
  CHECK_THROWS_AS(from(R"({"study": "matern", "schedule": [16, 32, 32, 64],
    "kernel": {"family": "matern", "nu": 1.5}})"), ValidationError);
  CHECK_THROWS_AS(from(R"({"study": "fem", "schedule": [16, 32, 64, 128],
    "kernel": {"family": "matern", "nu": 1.5}})"), ValidationError);
  CHECK_THROWS_AS(from(R"({"study": "wavelet", "schedule": [16, 32, 64, 128],
    "target": {"kind": "fourier", "s0": 0.9, "K": 50, "seed": 3},
    "kernel": {"family": "wavelet", "s": 1.5, "p": 2}})"), ValidationError);
  CHECK_THROWS_AS(from(R"({"study": "matern", "schedule": [16, 32, 64, 128],
    "kernel": {"family": "matern", "nu": 1.5}, "nugget": {"policy": "wavelet-linear"}})"),
                  ValidationError);
  CHECK_THROWS_AS(from(R"({"study": "matern", "schedule": [16, 32, 64, 128]})"), ValidationError);
  CHECK_THROWS_AS(from(R"({"study": "matern", "schedule": [16, 32, 64, 128],
    "kernel": {"family": "matern", "nu": 1.5}, "bands": {"l2": [-1, -2]}})"), ValidationError);
}

TEST_CASE("config json round trip") {
  const StudyConfig c = from(R"({"study": "kl-trig", "schedule": [17, 33, 65, 129],
    "region": {"omega": [0.2, 0.8], "ambient": [0, 1]}, "seed": 4,
    "target": {"kind": "fourier", "s0": 2, "K": 100, "seed": 5, "window": true},
    "kernel": {"family": "kl-trig", "s": 2}, "bands": {"l2": [-2.3, -1.6]}, "min_r2": 0.95})");
  const StudyConfig back = study_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.l2_band->lower == -2.3);
  CHECK(back.min_r_squared == 0.95);
  CHECK(back.seed == 4);
}

TEST_CASE("wavelet coupling is checked against the realized design") {
  const StudyConfig good = from(R"({"study": "wavelet", "schedule": [8, 16, 32, 64],
    "target": {"kind": "fourier", "s0": 3, "K": 50, "seed": 1},
    "kernel": {"family": "wavelet", "s": 1, "p": 1, "J": 10},
    "nugget": {"policy": "rate-matched", "scale": 0.01}})");
  CHECK_NOTHROW(run_study(good));

  // Random points crowd together; p = 4 gives reach 7 * 2^-N, and with s = 4 the
  // level only grows like (8/3) log2 n, so some realized q falls below the reach.
  StudyConfig crowded = from(R"({"study": "wavelet", "schedule": [16, 32, 64, 128],
    "design": "iid", "target": {"kind": "sine"},
    "kernel": {"family": "wavelet", "s": 4, "p": 4, "J": 10}})");
  bool rejected = false;
  for (std::uint64_t seed = 1; seed <= 20 && !rejected; ++seed) {
    crowded.seed = seed;
    const std::size_t n = crowded.schedule.front();
    const DesignSet design = make_design(DesignKind::iid_uniform, n, crowded.region, seed + n);
    const double reach = std::ldexp(7.0, -coupled_truncation(crowded, n));
    if (design.separation_radius() >= reach) continue;
    CHECK_THROWS_WITH_AS(run_study(crowded), doctest::Contains("2^-N (2p-1) < q"), ValidationError);
    rejected = true;
  }
  CHECK(rejected);
}

TEST_CASE("haar finest level is diagonal on a coarse midpoint grid") {
  // n = 8 midpoints: q = 1/16 > 2^-5 = 1/32, so each point has its own level-5 cell.
  const DesignSet design = make_design(DesignKind::midpoint_grid, 8, Region::unit_interval(), 1);
  CHECK(std::ldexp(1.0, -5) < design.separation_radius());
  const Eigen::MatrixXd fine = assemble_gram(*make_kernel(WaveletSpec{1.0, 5, 1, 12}), design).to_dense();
  const Eigen::MatrixXd coarse = assemble_gram(*make_kernel(WaveletSpec{1.0, 4, 1, 12}), design).to_dense();
  const Eigen::MatrixXd level = fine - coarse;
  for (int i = 0; i < 8; ++i) {
    CHECK(level(i, i) > 0.0);
    for (int j = 0; j < 8; ++j) {
      if (i != j) CHECK(level(i, j) == 0.0);
    }
  }
  CHECK(min_eigenvalue(fine) > 1e-10);
}

TEST_CASE("fem coupling edge") {
  const StudyConfig squeezed = from(R"({"study": "fem", "schedule": [16, 32, 64, 128],
    "target": {"kind": "truncated-power", "m": 1, "c": 0.5}, "kernel": {"family": "fem", "p": 1},
    "coupling": {"fem_factor": 1}})");
  CHECK_THROWS_WITH_AS(run_study(squeezed), doctest::Contains("q > 1/N"), ValidationError);

  // Mesh just fine enough: N = ceil(1/q) + 1 fits; N = floor(1/q) may be singular
  // but must never give a wrong answer silently.
  const DesignSet design = make_design(DesignKind::midpoint_grid, 10, Region::unit_interval(), 1);
  const double q = design.separation_radius();
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) y(i) = std::sin(3.0 * design.points()[static_cast<std::size_t>(i)][0]);
  const int safe = static_cast<int>(std::ceil(1.0 / q)) + 1;
  CHECK(q > 1.0 / safe);
  const KrigingModel model = fit(make_kernel(FemSpec{safe, 1}), design, y, 0.0);
  CHECK(model.residual_on_design().norm() <= 1e-6 * y.cwiseAbs().maxCoeff());

  const int risky = static_cast<int>(std::floor(1.0 / q));
  try {
    const KrigingModel edge = fit(make_kernel(FemSpec{risky, 1}), design, y, 0.0);
    CHECK(edge.residual_on_design().norm() <= 1e-6 * y.cwiseAbs().maxCoeff());
  } catch (const FactorizationFailed&) {
    CHECK(true);
  }
}

TEST_CASE("small studies are deterministic and consistent") {
  const StudyConfig config = from(R"({"study": "kl-trig", "schedule": [9, 17, 33, 65],
    "region": {"omega": [0.2, 0.8], "ambient": [0, 1]}, "seed": 2,
    "target": {"kind": "fourier", "s0": 2, "K": 100, "seed": 5, "window": true},
    "kernel": {"family": "kl-trig", "s": 2}, "quadrature": 1001, "sup_points": 1000})");
  const StudyResult a = run_study(config);
  const StudyResult b = run_study(config);
  CHECK(rows_csv(a) == rows_csv(b));
  REQUIRE(a.rows.size() == 4);
  for (const StudyRow& row : a.rows) {
    CHECK(row.truncation == static_cast<int>((row.n - 1) / 2));
    CHECK(row.l2 <= std::sqrt(0.6) * row.linf + 1e-8);
    CHECK(row.l2 >= 0.0);
    CHECK(row.nugget == doctest::Approx(std::pow(row.fill, 3.0)).epsilon(1e-14));
  }
  CHECK(a.predicted.l2 == -2.0);
  CHECK(a.l2_band.lower == doctest::Approx(-2.3));
  CHECK(a.l2_band.upper == doctest::Approx(-1.6));

  const nlohmann::json summary = summary_json(a);
  for (const char* key : {"study", "predicted_l2_slope", "fitted_l2_slope", "r2", "pass"}) {
    CHECK(summary.contains(key));
  }
  CHECK(summary.at("study") == "kl-trig");
  CHECK(summary.at("pass").get<bool>() == a.pass);

  StudyConfig wrong = config;
  wrong.study = StudyKind::fem;
  CHECK_THROWS_AS(run_kl_trig(wrong), ValidationError);
  CHECK_THROWS_AS(run_fem(config), ValidationError);
}

TEST_CASE("kl interpolation at exactly 2N+1 points") {
  const DesignSet design = make_design(DesignKind::midpoint_grid, 5, Region::interval(0.2, 0.8, 0.0, 1.0), 1);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) y(i) = std::exp(design.points()[static_cast<std::size_t>(i)][0]);
  const KrigingModel model = fit(make_kernel(KLTrigSpec{2, 2}), design, y, 0.0);
  CHECK(model.residual_on_design().norm() <= 1e-6);
}

TEST_CASE("rougher targets converge more slowly") {
  const char* base = R"({"study": "matern", "schedule": [16, 32, 64, 128, 256],
    "kernel": {"family": "matern", "nu": 2.5}, "quadrature": 2001, "sup_points": 2000})";
  StudyConfig smooth = from(base);
  smooth.target = {{"kind", "sine"}};
  StudyConfig rough = from(base);
  rough.target = {{"kind", "truncated-power"}, {"m", 1}, {"c", 0.5}};
  const double smooth_slope = run_study(smooth).l2_fit.slope;
  const double rough_slope = run_study(rough).l2_fit.slope;
  CHECK(rough_slope - smooth_slope > 0.5);
}
