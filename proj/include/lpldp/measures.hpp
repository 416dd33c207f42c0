// measures: the generalized normal family mu_p, measure specifications,
// quadrature rules, and exact samplers for l^p balls and spheres.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpldp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Exponent p of an l^p norm / generalized normal density. Any finite value
/// >= 1 is allowed, and infinity() denotes p = inf (uniform on [-1,1]).
class PExponent {
 public:
  PExponent() : p_(2.0) {}
  explicit PExponent(double p) : p_(p) {
    if (std::isnan(p) || p < 1.0) throw std::invalid_argument("p must satisfy p >= 1");
  }
  static PExponent infinity() { return PExponent(kInf); }
  double value() const { return p_; }
  bool is_inf() const { return std::isinf(p_); }
  bool operator==(const PExponent& o) const { return p_ == o.p_; }

 private:
  double p_;
};

/// Tagged-union description of a one-dimensional reference measure.
/// JSON form: {"kind": "...", "params": {...}}; p = inf encodes as "inf".
struct MeasureSpec {
  enum class Kind { generalized_normal, uniform_interval, dirac, grid_discrete, empirical };

  Kind kind = Kind::generalized_normal;
  PExponent p;                    // generalized_normal
  double a = -1.0, b = 1.0;       // uniform_interval, a < b
  double point = 0.0;             // dirac
  std::vector<double> points;     // grid_discrete (strictly increasing)
  std::vector<double> weights;    // grid_discrete (nonnegative, sum 1)
  std::vector<double> samples;    // empirical (kept sorted ascending)

  static MeasureSpec generalized_normal(PExponent p);
  static MeasureSpec uniform_interval(double a, double b);
  static MeasureSpec dirac(double point);
  static MeasureSpec grid_discrete(std::vector<double> points, std::vector<double> weights);
  static MeasureSpec empirical(std::vector<double> samples);

  /// E|X|^r (r >= 0). Closed form for generalized_normal, exact for the rest.
  double abs_moment(double r) const;
  /// E X (signed).
  double mean() const;
  /// E X^2.
  double second_moment() const;
  /// sup |X| over the support; +inf when unbounded.
  double support_radius() const;
  /// Left-continuous generalized inverse CDF, u in (0,1).
  double quantile(double u) const;

  std::string to_json() const;
  static MeasureSpec from_json(const std::string& text);
};

/// Nodes/weights representing integration against a target measure:
/// integral f d(target) ~= sum_i w_i f(x_i).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  MeasureSpec target;

  double integrate(const std::vector<double>& fvals) const;

  /// Gauss-Hermite rule for the standard normal (probabilists'), exact for
  /// polynomials up to degree 2n-1. Golub-Welsch via a symmetric eigensolve.
  static QuadratureRule gauss_hermite(int n);
  /// A rule adapted to the given measure; `n` guides the node budget.
  /// Discrete measures are represented exactly by their atoms.
  static QuadratureRule for_measure(const MeasureSpec& m, int n);
};

/// A point sampled uniformly from the unit ball of l^p in R^n.
struct BallSample {
  std::vector<double> coords;
  PExponent p;
};

/// A projection direction on the unit l^2 sphere of R^n.
struct Direction {
  std::vector<double> coords;
};

/// Deterministic RNG stream: engine seeded from (seed, a, b) via seed_seq,
/// so distinct (a, b) give independent reproducible streams.
using RngEngine = std::mt19937_64;
RngEngine make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// log of the normalizing constant C_p = 2 p^{1/p} Gamma(1 + 1/p); for p = inf
/// the density is 1/2 on [-1, 1] (C = 2).
double log_norm_const_mu_p(PExponent p);

/// Density of mu_p at y: exp(-|y|^p / p) / C_p (p = inf: uniform on [-1,1]).
double density_mu_p(PExponent p, double y);

/// CDF of mu_p.
double cdf_mu_p(PExponent p, double y);

/// log E exp(tY), Y ~ mu_p. Finite everywhere for p > 1; for p = 1 it is
/// -log(1 - t^2) when |t| < 1 and +inf otherwise; p = inf gives log(sinh t/t).
double mgf_mu_p(PExponent p, double t);

/// One draw from mu_p via the Gamma transform: |Y| = (p G)^{1/p}, G ~
/// Gamma(1/p, 1), with an independent sign (p = inf: uniform on [-1,1]).
double sample_mu_p(PExponent p, RngEngine& eng);

/// Uniform draw from the unit l^2 sphere in R^n (normalized Gaussian vector).
Direction sample_sphere(int n, RngEngine& eng);

/// Uniform draw from the unit l^p ball in R^n: X = U^{1/n} Y / |Y|_p with
/// Y ~ mu_p^(x)n and U uniform, valid for every p including inf.
BallSample sample_ball(PExponent p, int n, RngEngine& eng);

/// Quantile of mu_p (left-continuous inverse CDF), u in (0, 1). The p = 2
/// branch is a rational Phi^{-1} approximation accurate to ~1e-15.
double quantile_mu_p(PExponent p, double u);

/// Standard normal CDF and quantile.
double normal_cdf(double x);
double normal_quantile(double u);

/// l^p norm of a vector (overflow-safe; p = inf is the max norm).
double lp_norm(const std::vector<double>& x, PExponent p);

/// Test hook: when enabled, gauss_hermite emits one perturbed weight so that
/// downstream consistency checks must notice. Never set outside selftest.
void corrupt_gauss_hermite_for_testing(bool enabled);

}  // namespace lpldp
