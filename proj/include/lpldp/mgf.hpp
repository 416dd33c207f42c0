// mgf: limiting log moment generating functions for scaled projections of
// l^p balls - the i.i.d. cumulant Lambda_p, its direction-averaged version
// Psi_{p,nu}, the Gaussian-mixed Phi_p / Phi_gamma, and Psi_{gamma,nu}.
#pragma once

#include <optional>
#include <vector>

#include "lpldp/functional.hpp"
#include "lpldp/measures.hpp"

namespace lpldp {

/// Argument of a two-variable cumulant (t1 couples the linear term, t2 the
/// p-th-power term).
struct MgfPoint2 {
  double t1 = 0.0;
  double t2 = 0.0;
};

/// Argument of the three-variable annealed cumulant (t0 couples the squared
/// direction coordinates).
struct MgfPoint3 {
  double t0 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
};

/// Result of a cumulant evaluation. value is +inf outside the effective
/// domain (gradient absent there). quadrature_error is an a-posteriori
/// estimate of the numerical integration error in value.
struct EvalResult {
  double value = 0.0;
  std::optional<std::vector<double>> gradient;
  double quadrature_error = 0.0;
};

/// log E exp(t1 Y + t2 |Y|^p) for Y ~ mu_p, p in (1, inf); finite iff
/// t2 < 1/p. Closed form -(1/p) log(1 - p t2) + log M_p(t1 (1 - p t2)^{-1/p}).
EvalResult lambda_p(PExponent p, MgfPoint2 t, bool want_gradient = false);

/// integral Lambda_p(t1 u, t2) nu(du): the quenched cumulant for projection
/// direction with empirical coordinate law nu. Requires p in (1, inf).
EvalResult psi_p_nu(PExponent p, const MeasureSpec& nu, MgfPoint2 t, bool want_gradient = false);

/// The annealed three-parameter cumulant for p in [2, inf):
///   -(1/p) log(1 - p t2) - (1/2) log(1 - 2 t0) + log E exp(c Y^2),
/// c = t1^2 (1 - p t2)^{-2/p} / (2 (1 - 2 t0)), finite iff t0 < 1/2,
/// t2 < 1/p and (p > 2 or c < 1/2).
EvalResult phi_p(PExponent p, MgfPoint3 t, bool want_gradient = false);

/// p = inf analogue driven by a compactly supported / sub-Gaussian coordinate
/// measure gamma: -(1/2) log(1 - 2 t0) + log E exp(kappa X^2), X ~ gamma,
/// kappa = t1^2 / (2 (1 - 2 t0)); finite iff t0 < 1/2 (point: (t0, t1)).
EvalResult phi_gamma(const MeasureSpec& gamma, double t0, double t1, bool want_gradient = false);

/// integral log E exp(t u X) nu(du), X ~ gamma: quenched cumulant at p = inf.
EvalResult psi_gamma_nu(const MeasureSpec& gamma, const MeasureSpec& nu, double t,
                        bool want_gradient = false);

/// Analytic gradient of the named cumulant (convenience wrappers).
std::vector<double> gradient_lambda_p(PExponent p, MgfPoint2 t);
std::vector<double> gradient_psi_p_nu(PExponent p, const MeasureSpec& nu, MgfPoint2 t);
std::vector<double> gradient_phi_p(PExponent p, MgfPoint3 t);

/// log M_p(t) = log E exp(tY), Y ~ mu_p, with two derivatives. Closed forms
/// for p in {1, 2, inf}; otherwise a cached piecewise-Chebyshev fit of the
/// defining quadratures (absolute accuracy ~1e-12). Requires p > 1 or |t|<1.
void log_mgf_mu_p_derivs(PExponent p, double t, double* f, double* d1, double* d2);

/// log E exp(c Y^2), Y ~ mu_p, with two derivatives in c; finite for c < 1/2
/// when p = 2 and for all c when p > 2. Used by phi_p.
void log_mgf_sq_mu_p_derivs(PExponent p, double c, double* f, double* d1, double* d2);

/// log E exp(s X) for X ~ m, with two s-derivatives, for the measure families
/// with everywhere-finite mgf (generalized normal p > 1, uniform, dirac,
/// discrete).
void measure_log_mgf_derivs(const MeasureSpec& m, double s, double* f, double* d1, double* d2);

/// Functional adapters over (t1, t2), (t0, t1, t2), (t0, t1) or (t,) used by
/// the Legendre solvers. All are convex with analytic derivatives.
FunctionalPtr make_lambda_p(PExponent p);
FunctionalPtr make_psi_p_nu(PExponent p, MeasureSpec nu);
FunctionalPtr make_phi_p(PExponent p);
FunctionalPtr make_phi_gamma(MeasureSpec gamma);
FunctionalPtr make_psi_gamma_nu(MeasureSpec gamma, MeasureSpec nu);

}  // namespace lpldp
