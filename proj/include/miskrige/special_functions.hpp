#pragma once

namespace miskrige {

/// Modified Bessel function of the second kind K_nu(x) for nu >= 0, x > 0.
/// Temme's series below x = 2, Steed's continued fraction above, then forward
/// recurrence in the order. Relative accuracy near machine precision.
double bessel_k(double nu, double x);

/// True when nu = p + 1/2 for an integer 0 <= p <= 50.
bool is_half_integer(double nu);

/// Normalised Matern correlation 2^{1-nu}/Gamma(nu) z^nu K_nu(z), equal to 1 at z = 0.
/// Always evaluated through bessel_k.
double matern_correlation_bessel(double nu, double z);

/// Same correlation for nu = p + 1/2 via the terminating closed form
/// exp(-z) p!/(2p)! sum_i (p+i)!/(i!(p-i)!) (2z)^{p-i}.
double matern_correlation_half_integer(int p, double z);

}  // namespace miskrige
