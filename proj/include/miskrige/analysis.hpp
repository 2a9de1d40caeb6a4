#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "miskrige/geometry.hpp"

namespace miskrige {

using ScalarField = std::function<double(const Point&)>;

/// Composite Simpson nodes on Omega: `count` per axis (odd, >= 3), endpoints included.
std::vector<Point> simpson_nodes(const Region& region, std::size_t count);
/// Matching weights (tensor products in d = 2), summing to |Omega|.
std::vector<double> simpson_weights(const Region& region, std::size_t count);
/// Uniform grid of `count` points per axis inset by half a step from the boundary.
std::vector<Point> inset_grid(const Region& region, std::size_t count);

/// Validated quadrature resolution: d = 1 needs M odd and >= 1001; d = 2 needs M odd
/// and >= 201 per axis.
void check_simpson_resolution(std::size_t dim, std::size_t count);
void check_sup_resolution(std::size_t dim, std::size_t count);

/// sqrt(int_Omega (f - g)^2) by composite Simpson with M nodes per axis.
double l2_error(const ScalarField& f, const ScalarField& g, const Region& region,
                std::size_t count);
/// max |f - g| over the M-point inset grid.
double linf_error(const ScalarField& f, const ScalarField& g, const Region& region,
                  std::size_t count);

/// Same norms from differences already sampled on the matching grids.
double l2_norm_sampled(const std::vector<double>& differences, const std::vector<double>& weights);
double linf_norm_sampled(const std::vector<double>& differences);

struct ErrorPair {
  double l2 = 0.0;
  double linf = 0.0;
  std::size_t resolution = 0;
};

/// Least-squares fit of log(error) against log(n).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (n, error) pairs actually used
  std::vector<std::string> warnings;               // excluded pairs
};

/// Errors below 1e-10 are dropped with a warning. Needs n strictly increasing,
/// positive errors and at least four usable pairs.
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

nlohmann::json to_json(const RateFit& fit);

}  // namespace miskrige
