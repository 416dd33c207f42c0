// rates: large-deviation rate functions for the scaled projection W of a
// random point of the l^p ball (annealed / quenched / self-normalized and
// the closed forms), the entropy functional coupling them, and the
// variational solver connecting annealed to quenched.
#pragma once

#include <string>
#include <vector>

#include "lpldp/measures.hpp"
#include "lpldp/mgf.hpp"

namespace lpldp {

/// Which rate function to evaluate.
///  annealed     : direction re-drawn each n (speed n^{2p/(2+p)} for p < 2).
///  quenched     : direction frozen, coordinate law nu.
///  cramer       : self-normalized i.i.d. case (quenched with nu = delta_1).
///  j2           : closed form -(1/2) log(1 - w^2), valid at p = 2.
///  quenched_p1  : p = 1 closed form |w| / c at speed n / sqrt(log n).
///  e1_projection: axis direction closed form -(1/p) log(1 - |w|^p).
///  annealed_sub2: p < 2 closed form (1/r) |w|^r, r = 2p / (2 + p).
struct RateKind {
  enum class Tag { annealed, quenched, cramer, j2, quenched_p1, e1_projection, annealed_sub2 };
  Tag tag = Tag::annealed;
  MeasureSpec nu;     // quenched only
  double c = 1.0;     // quenched_p1 only, > 0

  static RateKind annealed() { return {Tag::annealed, {}, 1.0}; }
  static RateKind quenched(MeasureSpec nu) { return {Tag::quenched, std::move(nu), 1.0}; }
  static RateKind cramer() { return {Tag::cramer, {}, 1.0}; }
  static RateKind j2() { return {Tag::j2, {}, 1.0}; }
  static RateKind quenched_p1(double c);
  static RateKind e1_projection() { return {Tag::e1_projection, {}, 1.0}; }
  static RateKind annealed_sub2() { return {Tag::annealed_sub2, {}, 1.0}; }

  std::string label() const;
};

/// The speed s(n) the rate is measured against.
struct SpeedSpec {
  enum class Tag { linear_n, power, n_over_sqrt_log_n };
  Tag tag = Tag::linear_n;
  double r = 1.0;  // power only, in (0, 1]

  static SpeedSpec linear_n() { return {Tag::linear_n, 1.0}; }
  static SpeedSpec power(double r);
  static SpeedSpec n_over_sqrt_log_n() { return {Tag::n_over_sqrt_log_n, 1.0}; }
  /// The natural speed for a rate kind at exponent p.
  static SpeedSpec for_kind(const RateKind& kind, PExponent p);

  double at(double n) const;
  std::string label() const;
  bool operator==(const SpeedSpec& o) const { return tag == o.tag && r == o.r; }
};

/// A rate function sampled on a w-grid.
struct RateCurve {
  std::vector<double> w;
  std::vector<double> value;  // +inf allowed
  RateKind kind;
  PExponent p;
  SpeedSpec speed;
};

/// Result of the annealed <-> quenched variational problem
///   inf_nu { I_q(w; nu) + H(nu | mu_2) + (1 - m2(nu)) / 2 },  m2(nu) <= 1.
struct VariationalSolution {
  double value = 0.0;
  MeasureSpec minimizer;               // grid_discrete optimal nu
  std::vector<double> objective_trace; // objective after each accepted step
  double kkt_residual = 0.0;           // first-order stationarity, < 1e-6
};

/// Evaluate one rate function at w. p-validity is checked per kind.
double rate(PExponent p, const RateKind& kind, double w);

/// Evaluate on a grid.
RateCurve rate_curve(PExponent p, const RateKind& kind, const std::vector<double>& w,
                     const SpeedSpec& speed);

/// The entropy functional: H(nu | mu_2) + (1 - m2(nu)) / 2 for grid-discrete
/// nu on an equispaced grid (cell-mass discretization of mu_2), and +inf when
/// m2(nu) > 1 + 1e-12 or nu charges a cell of vanishing mu_2-mass.
double entropy_h(const MeasureSpec& nu);

/// Solve the variational problem at (p, w) over grid-discrete measures on the
/// given equispaced grid (default [-6, 6], 241 points) by entropic mirror
/// descent with adaptive step and simplex-plus-moment projection.
VariationalSolution variational_annealed(PExponent p, double w,
                                         const std::vector<double>& grid = {});

/// p = inf analogue, for a compactly supported coordinate law gamma.
VariationalSolution variational_annealed_gamma(const MeasureSpec& gamma, double w,
                                               const std::vector<double>& grid = {});

/// sup_nu { integral Lambda_p(t1 u, t2) nu(du) - H(nu | mu_2) - (1 - m2) / 2 }
/// over grid-discrete nu with m2 <= 1: the Varadhan-side value whose t-conjugate
/// matches the minimax route. Requires t2 < 1/p.
VariationalSolution varadhan_sup(PExponent p, MgfPoint2 t, const std::vector<double>& grid = {});

/// inf_nu { Psi*_{p,nu}(tau) + H(nu | mu_2) + (1 - m2) / 2 } at a fixed tau:
/// the inner minimization of the minimax route.
VariationalSolution minimax_conjugate(PExponent p, const std::vector<double>& tau,
                                      const std::vector<double>& grid = {});

/// (1/t^{r_p}) log P(Y Z > t) for Y ~ mu_p, Z ~ N(0,1) independent,
/// p in [1, 2), t > 0, r_p = 2p/(2+p), computed in log domain with bracketed
/// tail asymptotics. This is the heavy product factor that sets the reduced
/// speed n^{r_p}; the exponent tends to -1/r_p as t grows (-3/2 at p = 1),
/// matching the w^{r_p}/r_p rate at w = 1. Throws std::domain_error on t <= 0.
double tail_product_exponent(PExponent p, double t);

/// The open interval (-m1(nu), m1(nu)) on which the p = inf quenched rate is
/// finite, returned as {-m1, m1}.
std::vector<double> psi_inf_domain(const MeasureSpec& nu);

/// The default variational grid: 241 equispaced points on [-6, 6].
std::vector<double> default_grid();

/// Serialize a curve (CSV with a schema comment, or a JSON document).
std::string rate_curve_csv(const std::vector<RateCurve>& curves);
std::string rate_curve_json(const std::vector<RateCurve>& curves);

}  // namespace lpldp
