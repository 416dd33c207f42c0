#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpldp/legendre.hpp"
#include "lpldp/measures.hpp"
#include "lpldp/mgf.hpp"
#include "lpldp/rates.hpp"

using namespace lpldp;

namespace {

const MeasureSpec kMu2 = MeasureSpec::generalized_normal(PExponent(2.0));

// Smallest exponential-in-x^2 tilt putting the weights inside {m2 <= 1}
// (cell discretizations of laws with m2 = 1 land slightly outside), then
// normalize.
MeasureSpec unit_m2(const std::vector<double>& x, std::vector<double> m) {
  auto m2of = [&](double lam) {
    double s = 0.0, q = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double wj = m[j] * std::exp(-lam * x[j] * x[j]);
      s += wj;
      q += wj * x[j] * x[j];
    }
    return q / s;
  };
  double lam = 0.0;
  if (m2of(0.0) > 1.0) {
    double lo = 0.0, hi = 1e-4;
    while (m2of(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (m2of(mid) > 1.0 ? lo : hi) = mid;
    }
    lam = hi;
  }
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    m[j] *= std::exp(-lam * x[j] * x[j]);
    s += m[j];
  }
  for (double& v : m) v /= s;
  return MeasureSpec::grid_discrete(x, m);
}

// Cell-mass discretization of mu_2 on an equispaced grid.
MeasureSpec disc_mu2(const std::vector<double>& x) {
  const double dx = x[1] - x[0];
  std::vector<double> m(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    m[j] = normal_cdf(x[j] + dx / 2.0) - normal_cdf(x[j] - dx / 2.0);
  return unit_m2(x, std::move(m));
}

// Overlap discretization of U[-sqrt(3), sqrt(3)].
MeasureSpec disc_witness(const std::vector<double>& x) {
  const double dx = x[1] - x[0];
  const double s3 = std::sqrt(3.0);
  std::vector<double> m(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double lo = std::max(x[j] - dx / 2.0, -s3);
    const double hi = std::min(x[j] + dx / 2.0, s3);
    m[j] = std::max(0.0, hi - lo);
  }
  return unit_m2(x, std::move(m));
}

}  // namespace

TEST_CASE("closed-form rates") {
  const double w = 0.3;
  CHECK(rate(PExponent(2.0), RateKind::j2(), w) ==
        doctest::Approx(0.0471553397356206).epsilon(1e-13));
  CHECK(rate(PExponent(2.0), RateKind::j2(), 0.5) ==
        doctest::Approx(0.14384103622589).epsilon(1e-13));
  CHECK(rate(PExponent(2.0), RateKind::j2(), 0.0) == 0.0);
  CHECK(rate(PExponent(2.0), RateKind::j2(), 1.0) == kInf);

  CHECK(rate(PExponent(3.0), RateKind::e1_projection(), 0.5) ==
        doctest::Approx(-std::log(1.0 - 0.125) / 3.0).epsilon(1e-13));
  CHECK(rate(PExponent::infinity(), RateKind::e1_projection(), 0.8) == 0.0);
  CHECK(rate(PExponent::infinity(), RateKind::e1_projection(), 1.0) == 0.0);
  CHECK(rate(PExponent::infinity(), RateKind::e1_projection(), 1.1) == kInf);

  const double rp = 2.0 / 3.0;  // p = 1
  CHECK(rate(PExponent(1.0), RateKind::annealed_sub2(), 0.5) ==
        doctest::Approx(std::pow(0.5, rp) / rp).epsilon(1e-14));
  CHECK(rate(PExponent(1.0), RateKind::quenched_p1(2.0), 0.6) == doctest::Approx(0.3));
  CHECK(rate(PExponent(1.0), RateKind::quenched_p1(2.0), -0.6) == doctest::Approx(0.3));
}

TEST_CASE("p = 2: all routes agree with the closed form (spot check)") {
  const double w = 0.5, want = 0.14384103622589;
  CHECK(rate(PExponent(2.0), RateKind::annealed(), w) == doctest::Approx(want).epsilon(1e-5));
  CHECK(rate(PExponent(2.0), RateKind::quenched(kMu2), w) == doctest::Approx(want).epsilon(1e-5));
  CHECK(rate(PExponent(2.0), RateKind::cramer(), w) == doctest::Approx(want).epsilon(1e-5));
}

TEST_CASE("annealed sits between the self-normalized and quenched rates (p = 4)") {
  for (double w : {0.2, 0.5}) {
    const double ann = rate(PExponent(4.0), RateKind::annealed(), w);
    const double que = rate(PExponent(4.0), RateKind::quenched(kMu2), w);
    const double cra = rate(PExponent(4.0), RateKind::cramer(), w);
    CHECK(ann <= que + 1e-6);
    CHECK(ann >= cra - 1e-6);
  }
}

TEST_CASE("entropy functional") {
  const std::vector<double> x = default_grid();
  REQUIRE(x.size() == 241);
  CHECK(x.front() == doctest::Approx(-6.0));
  CHECK(x.back() == doctest::Approx(6.0));

  // At the discretized reference measure the cost vanishes.
  CHECK(entropy_h(disc_mu2(x)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-3));

  // At the spread witness it equals the closed relative entropy
  // H(U[-sqrt3, sqrt3] | mu_2) up to discretization error.
  CHECK(entropy_h(disc_witness(x)) == doctest::Approx(0.176485208310673).epsilon(3e-2));

  // Second moment above 1 is infeasible.
  CHECK(entropy_h(MeasureSpec::grid_discrete({-2.0, 0.0, 2.0}, {0.3, 0.4, 0.3})) == kInf);
  // Charging a cell carrying no mu_2 mass is infeasible.
  CHECK(entropy_h(MeasureSpec::grid_discrete({40.0, 40.05, 40.1}, {0.3, 0.4, 0.3})) == kInf);
  // Only grid measures have a well-defined discrete entropy here.
  CHECK_THROWS_AS(entropy_h(MeasureSpec::uniform_interval(-1.0, 1.0)), std::invalid_argument);
}

TEST_CASE("variational solution at p = 2 recovers the closed-form rate") {
  const VariationalSolution vs = variational_annealed(PExponent(2.0), 0.5);
  CHECK(vs.value == doctest::Approx(0.14384103622589).epsilon(5e-3));
  CHECK(vs.kkt_residual < 1e-6);
  CHECK(vs.minimizer.second_moment() <= 1.0 + 1e-9);
  CHECK(std::fabs(vs.minimizer.mean()) < 1e-6);
  REQUIRE(!vs.objective_trace.empty());
  CHECK(vs.objective_trace.back() == doctest::Approx(vs.value).epsilon(1e-10));
  for (std::size_t i = 1; i < vs.objective_trace.size(); ++i)
    CHECK(vs.objective_trace[i] <= vs.objective_trace[i - 1] + 1e-9);
}

TEST_CASE("variational solution validation") {
  CHECK_THROWS_AS(variational_annealed(PExponent(1.5), 0.3), std::invalid_argument);
  // p = inf is not an error: it forwards to the gamma form with the uniform
  // coordinate law. At w = 0 only the entropy cost remains, which nearly
  // vanishes at the discretized reference measure.
  const VariationalSolution vinf = variational_annealed(PExponent::infinity(), 0.0);
  CHECK(vinf.value >= 0.0);
  CHECK(vinf.value < 1e-3);
  // Grid must be symmetric and cover [-6, 6].
  std::vector<double> short_grid;
  for (int i = 0; i <= 200; ++i) short_grid.push_back(-5.0 + 0.05 * i);
  CHECK_THROWS_AS(variational_annealed(PExponent(4.0), 0.3, short_grid), std::invalid_argument);
}

TEST_CASE("gamma-form variational problem needs the spread start at w = 0.83") {
  const MeasureSpec gamma = MeasureSpec::uniform_interval(-1.0, 1.0);
  const VariationalSolution vs = variational_annealed_gamma(gamma, 0.83);
  CHECK(std::isfinite(vs.value));
  CHECK(vs.value > 0.5);
  CHECK(vs.kkt_residual < 1e-6);
  // The solver can only improve on the witness start.
  const std::vector<double> x = default_grid();
  const MeasureSpec wit = disc_witness(x);
  const double at_witness =
      rate(PExponent::infinity(), RateKind::quenched(wit), 0.83) + entropy_h(wit);
  CHECK(std::isfinite(at_witness));
  CHECK(vs.value <= at_witness + 1e-6);
  // ... while the discretized reference law cannot reach w = 0.83 at all.
  const MeasureSpec ref = disc_mu2(x);
  CHECK(rate(PExponent::infinity(), RateKind::quenched(ref), 0.83) == kInf);
}

TEST_CASE("varadhan form agrees with the constrained-Gibbs closed form (p = 2)") {
  const double t1 = 0.6, t2 = 0.1;
  const std::vector<double> x = default_grid();
  const double dx = x[1] - x[0];
  std::vector<double> m(x.size());
  double ms = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    m[j] = normal_cdf(x[j] + dx / 2.0) - normal_cdf(x[j] - dx / 2.0);
    ms += m[j];
  }
  for (double& v : m) v /= ms;

  // a_j = Lambda_2(t1 x_j, t2) = base + c x_j^2; the maximizing nu is the
  // tilt m e^{eta x^2} with eta fixed by the active constraint m2 = 1, and
  // the value reduces to base + c - eta + log Z(eta).
  const double s = 1.0 - 2.0 * t2;
  const double base = -0.5 * std::log(s);
  const double c = t1 * t1 / (2.0 * s);
  auto m2_of = [&](double eta) {
    double z = 0.0, q = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double wj = m[j] * std::exp(eta * x[j] * x[j]);
      z += wj;
      q += wj * x[j] * x[j];
    }
    return q / z;
  };
  double lo = 0.0, hi = 0.2;
  while (m2_of(hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (m2_of(mid) < 1.0 ? lo : hi) = mid;
  }
  const double eta = hi;
  double z = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) z += m[j] * std::exp(eta * x[j] * x[j]);
  const double oracle = base + c - eta + std::log(z);

  const VariationalSolution vs = varadhan_sup(PExponent(2.0), {t1, t2});
  CHECK(vs.value == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(vs.kkt_residual < 1e-6);
  CHECK(vs.minimizer.second_moment() == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(varadhan_sup(PExponent(2.0), {0.1, 0.5}), std::domain_error);
}

TEST_CASE("minimax inner solve is consistent with its minimizer") {
  const PExponent p4(4.0);
  InfimumDiagnostics diag;
  const FunctionalPtr psi = make_psi_p_nu(p4, kMu2);
  rate_infimum(*psi, ContractionSpec::quenched2(0.4, 4.0), &diag);
  const VariationalSolution vs = minimax_conjugate(p4, diag.tau);
  CHECK(std::isfinite(vs.value));
  CHECK(vs.kkt_residual < 1e-6);
  const FunctionalPtr psi_star = make_psi_p_nu(p4, vs.minimizer);
  const LegendreResult lr = conjugate(*psi_star, diag.tau);
  CHECK(vs.value ==
        doctest::Approx(lr.value + entropy_h(vs.minimizer)).epsilon(1e-5));
}

TEST_CASE("product-tail exponent: reference values and trend") {
  const PExponent p1(1.0);
  const double a10 = tail_product_exponent(p1, 10.0);
  const double a20 = tail_product_exponent(p1, 20.0);
  const double a40 = tail_product_exponent(p1, 40.0);
  CHECK(a10 == doctest::Approx(-1.62061100242083).epsilon(1e-6));
  CHECK(a20 == doctest::Approx(-1.57549289078051).epsilon(1e-6));
  CHECK(a40 == doctest::Approx(-1.54734960004353).epsilon(1e-6));
  CHECK(a10 < a20);
  CHECK(a20 < a40);
  CHECK(a40 < -1.5);

  const double b20 = tail_product_exponent(PExponent(1.5), 20.0);
  const double b40 = tail_product_exponent(PExponent(1.5), 40.0);
  CHECK(std::isfinite(b20));
  CHECK(b20 < b40);
  CHECK(b40 < 0.0);

  CHECK_THROWS_AS(tail_product_exponent(PExponent(2.0), 10.0), std::invalid_argument);
  CHECK_THROWS_AS(tail_product_exponent(p1, 0.0), std::domain_error);
  CHECK_THROWS_AS(tail_product_exponent(p1, -3.0), std::domain_error);
}

TEST_CASE("speeds: evaluation, labels, defaults") {
  CHECK(SpeedSpec::linear_n().at(100) == doctest::Approx(100.0));
  CHECK(SpeedSpec::power(0.8).at(100) == doctest::Approx(std::pow(100.0, 0.8)).epsilon(1e-14));
  CHECK(SpeedSpec::n_over_sqrt_log_n().at(100) ==
        doctest::Approx(100.0 / std::sqrt(std::log(100.0))).epsilon(1e-14));
  CHECK_THROWS_AS(SpeedSpec::n_over_sqrt_log_n().at(1), std::domain_error);
  CHECK(SpeedSpec::linear_n().label() == "n");
  CHECK(SpeedSpec::power(0.8).label() == "n^0.8");
  CHECK(SpeedSpec::n_over_sqrt_log_n().label() == "n/sqrt(log(n))");

  CHECK(SpeedSpec::for_kind(RateKind::annealed(), PExponent(4.0)) == SpeedSpec::linear_n());
  CHECK(SpeedSpec::for_kind(RateKind::annealed(), PExponent(1.5)) ==
        SpeedSpec::power(2.0 * 1.5 / 3.5));
  CHECK(SpeedSpec::for_kind(RateKind::annealed_sub2(), PExponent(1.0)) ==
        SpeedSpec::power(2.0 / 3.0));
  CHECK(SpeedSpec::for_kind(RateKind::quenched_p1(1.0), PExponent(1.0)) ==
        SpeedSpec::n_over_sqrt_log_n());
  CHECK(SpeedSpec::for_kind(RateKind::quenched(kMu2), PExponent(1.5)) == SpeedSpec::linear_n());
  CHECK(SpeedSpec::for_kind(RateKind::j2(), PExponent(2.0)) == SpeedSpec::linear_n());
}

TEST_CASE("csv serialization") {
  const std::vector<double> wg{0.0, 0.3, 0.5};
  const RateCurve c = rate_curve(PExponent(2.0), RateKind::j2(), wg, SpeedSpec::linear_n());
  const std::string csv = rate_curve_csv({c});
  CHECK(csv.rfind("# schema: lp-ldp.rate-curve.v1\n", 0) == 0);
  CHECK(csv.find("w,value,kind,p,speed\n") != std::string::npos);
  CHECK(csv.find("\n0,0,j2,2,n\n") != std::string::npos);

  // Full precision: the printed value parses back to the same double.
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : csv) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else
      cur += ch;
  }
  REQUIRE(lines.size() == 5);  // schema, header, three rows
  const std::string& row = lines[4];
  const std::size_t c1 = row.find(',');
  const std::size_t c2 = row.find(',', c1 + 1);
  const double parsed = std::strtod(row.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr);
  CHECK(parsed == rate(PExponent(2.0), RateKind::j2(), 0.5));
}

TEST_CASE("json serialization handles p = inf and infinite values") {
  const std::vector<double> wg{0.5, 0.9};
  const RateCurve c = rate_curve(PExponent::infinity(), RateKind::quenched(kMu2), wg,
                                 SpeedSpec::linear_n());
  const std::string text = rate_curve_json({c});
  const nlohmann::json doc = nlohmann::json::parse(text);
  CHECK(doc.at("schema") == "lp-ldp.rate-curve.v1");
  REQUIRE(doc.at("curves").size() == 1);
  const nlohmann::json& curve = doc.at("curves")[0];
  CHECK(curve.at("p") == "inf");
  CHECK(curve.at("kind") == "quenched");
  REQUIRE(curve.at("value").size() == 2);
  CHECK(curve.at("value")[0].is_number());       // 0.5 < m1(mu_2): finite
  CHECK(curve.at("value")[1] == "inf");          // 0.9 > m1(mu_2): +inf
}
