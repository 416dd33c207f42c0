// detail/quad: shared low-level kernels - stable log(sinh x / x) family and
// direct shifted-quadrature evaluation of the mu_p tilted integrals. All
// exponents are fused into a single exp argument and shifted by the integrand
// maximum before exponentiation, so nothing overflows or multiplies 0 * inf.
#pragma once

#include <cmath>

namespace lpldp::detail {

/// log(sinh(x) / x), even, finite everywhere; = log E exp(xU), U ~ U[-1,1].
inline double logsinhc(double x) {
  double ax = std::fabs(x);
  if (ax < 1e-3) {
    double x2 = ax * ax;
    return x2 / 6.0 - x2 * x2 / 180.0;
  }
  if (ax <= 30.0) return std::log(std::sinh(ax) / ax);
  return ax - std::log(2.0 * ax) + std::log1p(-std::exp(-2.0 * ax));
}

/// d/dx log(sinh(x)/x) = coth(x) - 1/x, odd.
inline double logsinhc_d1(double x) {
  double ax = std::fabs(x);
  if (ax < 1e-2) {
    double x2 = x * x;
    return x * (1.0 / 3.0 - x2 / 45.0 + 2.0 * x2 * x2 / 945.0);
  }
  if (ax <= 350.0) return 1.0 / std::tanh(x) - 1.0 / x;
  return (x > 0 ? 1.0 : -1.0) - 1.0 / x;
}

/// d^2/dx^2 log(sinh(x)/x) = 1/x^2 - 1/sinh(x)^2, even, in (0, 1/3].
inline double logsinhc_d2(double x) {
  double ax = std::fabs(x);
  if (ax < 1e-2) {
    double x2 = x * x;
    return 1.0 / 3.0 - x2 / 15.0 + 2.0 * x2 * x2 / 189.0;
  }
  if (ax <= 350.0) {
    double s = std::sinh(ax);
    return 1.0 / (ax * ax) - 1.0 / (s * s);
  }
  return 1.0 / (ax * ax);
}

/// log E exp(tY), Y ~ mu_p, with two t-derivatives, by mode-shifted adaptive
/// Gauss-Kronrod. Requires finite p > 1. err receives a relative error bound.
void log_mgf_mu_p_direct(double p, double t, double* f, double* d1, double* d2, double* err);

/// log E exp(cY^2), Y ~ mu_p, with two c-derivatives. Requires finite p > 2.
void log_mgf_sq_mu_p_direct(double p, double c, double* f, double* d1, double* d2, double* err);

}  // namespace lpldp::detail
