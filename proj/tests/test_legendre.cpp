#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lpldp/legendre.hpp"
#include "lpldp/measures.hpp"
#include "lpldp/mgf.hpp"
#include "lpldp/rates.hpp"

using namespace lpldp;

namespace {

const MeasureSpec kMu2 = MeasureSpec::generalized_normal(PExponent(2.0));
const MeasureSpec kBallInf = MeasureSpec::uniform_interval(-1.0, 1.0);

}  // namespace

TEST_CASE("conjugate at the mean point is zero with argmax at the origin") {
  // E Y = 0 and E |Y|^p = 1, so tau = (0, 1) is the gradient at t = 0.
  const FunctionalPtr lam = make_lambda_p(PExponent(4.0));
  const LegendreResult r = conjugate(*lam, {0.0, 1.0});
  CHECK(r.status == LegendreResult::Status::converged);
  CHECK(r.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  REQUIRE(r.argmax.size() == 2);
  CHECK(std::fabs(r.argmax[0]) < 1e-6);
  CHECK(std::fabs(r.argmax[1]) < 1e-6);
  CHECK(r.grad_norm < 1e-8);
}

TEST_CASE("conjugate domain of the two-parameter cumulant") {
  // Lambda_p* is finite exactly on {|tau1|^p <= tau2}.
  const FunctionalPtr lam = make_lambda_p(PExponent(4.0));
  const LegendreResult in = conjugate(*lam, {0.9, 1.0});  // 0.9^4 = 0.6561 < 1
  CHECK(in.status != LegendreResult::Status::infinite);
  CHECK(std::isfinite(in.value));
  CHECK(in.value >= -1e-12);
  const LegendreResult out = conjugate(*lam, {1.2, 1.0});  // 1.2^4 = 2.07 > 1
  CHECK(out.status == LegendreResult::Status::infinite);
  CHECK(out.value == kInf);
}

TEST_CASE("conjugate values are consistent with the biconjugate identity") {
  const FunctionalPtr psi = make_psi_p_nu(PExponent(4.0), kMu2);
  for (double t1 : {0.2, 0.9}) {
    for (double t2 : {-0.3, 0.1}) {
      const std::vector<double> t{t1, t2};
      CHECK(biconjugate(*psi, t) == doctest::Approx(psi->value(t.data())).epsilon(1e-8));
    }
  }
}

TEST_CASE("warm starts converge to the same maximizer") {
  const FunctionalPtr lam = make_lambda_p(PExponent(3.0));
  const std::vector<double> tau{0.4, 0.9};
  const LegendreResult cold = conjugate(*lam, tau);
  const std::vector<double> start{0.5, -0.1};
  const LegendreResult warm = conjugate(*lam, tau, &start);
  CHECK(cold.value == doctest::Approx(warm.value).epsilon(1e-10));
}

TEST_CASE("p = inf conjugate: finite inside the reach, divergent outside") {
  // sup_t {w t - Psi(t)} with Psi'(inf) = m1(nu): finite iff |w| < m1(nu).
  const FunctionalPtr f = make_psi_gamma_nu(kBallInf, kMu2);
  const LegendreResult fin = conjugate(*f, {0.5});
  CHECK(fin.status == LegendreResult::Status::converged);
  CHECK(std::isfinite(fin.value));
  CHECK(fin.value > 0.0);
  const LegendreResult esc = conjugate(*f, {0.83});  // m1(mu_2) = 0.7979 < 0.83
  CHECK(esc.status == LegendreResult::Status::infinite);
}

TEST_CASE("contraction infimum: diagnostics and envelope") {
  const FunctionalPtr psi = make_psi_p_nu(PExponent(4.0), kMu2);
  InfimumDiagnostics diag;
  const LegendreResult r = rate_infimum(*psi, ContractionSpec::quenched2(0.3, 4.0), &diag);
  CHECK(std::isfinite(r.value));
  CHECK(r.value > 0.0);
  REQUIRE(diag.tau.size() == 2);
  REQUIRE(diag.inner_t.size() == 2);
  CHECK(diag.tau[0] == doctest::Approx(0.3 * std::pow(diag.tau[1], 0.25)).epsilon(1e-9));
  CHECK(diag.envelope_grad < 1e-5);
  // The infimum value matches the public rate entry point.
  CHECK(r.value ==
        doctest::Approx(rate(PExponent(4.0), RateKind::quenched(kMu2), 0.3)).epsilon(1e-9));
}

TEST_CASE("quenched rate is increasing in w on the positive axis") {
  double prev = -1.0;
  for (double w : {0.1, 0.25, 0.4, 0.55, 0.7, 0.85}) {
    const double v = rate(PExponent(4.0), RateKind::quenched(kMu2), w);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("rate at w = 0 vanishes for every kind that admits it") {
  CHECK(rate(PExponent(4.0), RateKind::quenched(kMu2), 0.0) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(rate(PExponent(4.0), RateKind::cramer(), 0.0) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(rate(PExponent(4.0), RateKind::annealed(), 0.0) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(rate(PExponent::infinity(), RateKind::annealed(), 0.0) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("self-normalized rate at p = inf: finite strictly inside (-1, 1)") {
  const double v = rate(PExponent::infinity(), RateKind::cramer(), 0.9);
  CHECK(std::isfinite(v));
  CHECK(v > 0.0);
  CHECK(rate(PExponent::infinity(), RateKind::cramer(), 1.0) == kInf);
  CHECK(rate(PExponent::infinity(), RateKind::cramer(), 1.3) == kInf);
  // Symmetry.
  CHECK(rate(PExponent::infinity(), RateKind::cramer(), -0.9) == doctest::Approx(v).epsilon(1e-9));
}

TEST_CASE("quenched rate at p = inf: the witness law extends the reach") {
  const double s3 = std::sqrt(3.0);
  const MeasureSpec wit = MeasureSpec::uniform_interval(-s3, s3);
  const double v = rate(PExponent::infinity(), RateKind::quenched(wit), 0.83);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(2.58324074156387).epsilon(1e-6));
  CHECK(rate(PExponent::infinity(), RateKind::quenched(kMu2), 0.83) == kInf);
  // Domain endpoints reported for plotting.
  const std::vector<double> dom = psi_inf_domain(kMu2);
  REQUIRE(dom.size() == 2);
  CHECK(dom[1] == doctest::Approx(0.797884560802865).epsilon(1e-12));
  CHECK(dom[0] == doctest::Approx(-dom[1]).epsilon(1e-14));
}

TEST_CASE("annealed contraction at p = inf uses the product form") {
  const double v = rate(PExponent::infinity(), RateKind::annealed(), 0.6);
  CHECK(std::isfinite(v));
  CHECK(v > 0.0);
  CHECK(v < rate(PExponent::infinity(), RateKind::annealed(), 0.9));
}

TEST_CASE("kind/p validation") {
  CHECK_THROWS_AS(rate(PExponent(1.5), RateKind::j2(), 0.3), std::invalid_argument);
  CHECK_THROWS_AS(rate(PExponent(1.0), RateKind::quenched(kMu2), 0.3), std::invalid_argument);
  CHECK_THROWS_AS(rate(PExponent(3.0), RateKind::quenched_p1(1.0), 0.3), std::invalid_argument);
  CHECK_THROWS_AS(rate(PExponent(2.5), RateKind::annealed_sub2(), 0.3), std::invalid_argument);
  CHECK_THROWS_AS(RateKind::quenched_p1(0.0), std::invalid_argument);
  CHECK_THROWS_AS(SpeedSpec::power(0.0), std::invalid_argument);
  CHECK_THROWS_AS(SpeedSpec::power(1.5), std::invalid_argument);
}
