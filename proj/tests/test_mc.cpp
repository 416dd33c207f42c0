#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <json.hpp>

#include "lpldp/mc.hpp"
#include "lpldp/measures.hpp"
#include "lpldp/rates.hpp"

using namespace lpldp;

TEST_CASE("direction sequences produce unit directions") {
  for (auto kind : {DirectionSequence::typical(3), DirectionSequence::column_coupled(3),
                    DirectionSequence::iota(), DirectionSequence::e1()}) {
    const Direction d = kind.emit(37);
    REQUIRE(d.coords.size() == 37);
    CHECK(lp_norm(d.coords, PExponent(2.0)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(DirectionSequence::e1().emit(5).coords[0] == doctest::Approx(1.0));
  CHECK(DirectionSequence::iota().emit(4).coords[3] ==
        doctest::Approx(4.0 / std::sqrt(30.0)).epsilon(1e-13));
  CHECK_THROWS_AS(DirectionSequence::random_each_rep(1).emit(8), std::invalid_argument);
}

TEST_CASE("column-coupled directions share the underlying stream prefix") {
  const DirectionSequence dir = DirectionSequence::column_coupled(11);
  const Direction a = dir.emit(50);
  const Direction b = dir.emit(120);
  // The first 50 coordinates of the longer direction are the same raw draws,
  // rescaled by a single constant.
  const double ratio = b.coords[0] / a.coords[0];
  for (int i = 1; i < 50; ++i)
    CHECK(b.coords[i] / a.coords[i] == doctest::Approx(ratio).epsilon(1e-10));
}

TEST_CASE("simulate_W is deterministic and thread-count independent") {
  const auto one = simulate_W(PExponent(4.0), 50, DirectionSequence::typical(3), 1000, 1);
  const auto four = simulate_W(PExponent(4.0), 50, DirectionSequence::typical(3), 1000, 4);
  const auto again = simulate_W(PExponent(4.0), 50, DirectionSequence::typical(3), 1000, 4);
  REQUIRE(one.size() == 1000);
  CHECK(one == four);
  CHECK(four == again);
}

TEST_CASE("axis-direction marginal matches the exact beta law") {
  // For dir = e1 and p = 2, W is the first coordinate of a uniform ball
  // point: (W+1)/2 ~ Beta((n+1)/2, (n+1)/2).
  const int n = 100;
  const double w = 0.3;
  const auto est = estimate_tail(PExponent(2.0), w, {n}, DirectionSequence::e1(), 200000,
                                 "direct", 0);
  REQUIRE(est.size() == 1);
  const double exact = boost::math::ibetac((n + 1) / 2.0, (n + 1) / 2.0, (1.0 + w) / 2.0);
  CHECK(std::fabs(est[0].p_hat - exact) < 4.0 * est[0].std_error);
  CHECK(est[0].wilson_low <= exact);
  CHECK(exact <= est[0].wilson_high);
  CHECK(est[0].method == "direct");
  CHECK(est[0].reps == 200000);
  // slope = -log(p_hat)/n at the linear speed.
  CHECK(est[0].slope == doctest::Approx(-est[0].log_p / n).epsilon(1e-12));
}

TEST_CASE("radius factor is asymptotically negligible") {
  // Dropping the U^{1/n} radius changes the tail estimate within Monte Carlo
  // error at moderate n (the factor only contributes O(1/n) to the exponent).
  const PExponent p4(4.0);
  const int n = 100, reps = 300000;
  const double w = 0.3;
  const auto with_u = simulate_W(p4, n, DirectionSequence::typical(11), reps, 0, true);
  const auto without_u = simulate_W(p4, n, DirectionSequence::typical(11), reps, 0, false);
  auto tail = [&](const std::vector<double>& v) {
    long hits = 0;
    for (double x : v) hits += (x >= w);
    return double(hits) / double(v.size());
  };
  const double p1 = tail(with_u), p2 = tail(without_u);
  REQUIRE(p1 > 0.0);
  REQUIRE(p2 > 0.0);
  const double se = std::sqrt(p1 * (1 - p1) / reps + p2 * (1 - p2) / reps);
  CHECK(std::fabs(p1 - p2) < 5.0 * se + 0.02 * p1);
}

TEST_CASE("tilted importance sampling agrees with direct counting") {
  const PExponent p4(4.0);
  const int n = 30;
  const double w = 0.35;
  const DirectionSequence dir = DirectionSequence::typical(5);
  const auto direct = estimate_tail(p4, w, {n}, dir, 200000, "direct", 0);
  const auto tilted = estimate_tail(p4, w, {n}, dir, 20000, "tilted", 0);
  REQUIRE(direct.size() == 1);
  REQUIRE(tilted.size() == 1);
  CHECK(direct[0].p_hat > 0.0);
  CHECK(tilted[0].p_hat > 0.0);
  const double se =
      std::sqrt(direct[0].std_error * direct[0].std_error +
                tilted[0].std_error * tilted[0].std_error);
  CHECK(std::fabs(direct[0].p_hat - tilted[0].p_hat) < 4.0 * se);
  CHECK(tilted[0].acceptance_rate > 0.0);
  CHECK(tilted[0].acceptance_rate <= 1.0);
  CHECK(tilted[0].method == "tilted");
  // The IS estimator should be far more efficient per repetition.
  CHECK(tilted[0].std_error < direct[0].p_hat);
}

TEST_CASE("tilted sampling validation") {
  CHECK_THROWS_AS(estimate_tail(PExponent(1.0), 0.3, {50}, DirectionSequence::typical(1), 100,
                                "tilted", 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_tail(PExponent::infinity(), 0.3, {50}, DirectionSequence::typical(1),
                                100, "tilted", 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_tail(PExponent(2.0), 0.3, {50},
                                DirectionSequence::random_each_rep(1), 100, "tilted", 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_tail(PExponent(2.0), 0.3, {50}, DirectionSequence::typical(1), 100,
                                "bogus", 0),
                  std::invalid_argument);
}

TEST_CASE("slope sequence approaches the quenched rate from above (p = 4)") {
  const PExponent p4(4.0);
  const double w = 0.2;
  const DirectionSequence dir = DirectionSequence::typical(17);
  const auto est = estimate_tail(p4, w, {40, 80, 160}, dir, 400000, "direct", 0);
  REQUIRE(est.size() == 3);
  for (const MCEstimate& e : est) {
    REQUIRE(!e.zero_hits);
    CHECK(std::isfinite(e.slope));
  }
  const double target = rate(p4, RateKind::quenched(
                                     MeasureSpec::generalized_normal(PExponent(2.0))),
                             w);
  // Finite-n slopes carry a positive O(log(n)/n) correction: they decrease
  // toward the limiting rate from above as n doubles.
  CHECK(est[0].slope > est[1].slope);
  CHECK(est[1].slope > est[2].slope);
  CHECK(est[2].slope > target);
  CHECK(est[2].slope - target < 0.03);
  CHECK(est[0].slope - target < 0.06);
}

TEST_CASE("zero-hit estimates carry sentinels") {
  const auto est = estimate_tail(PExponent(2.0), 0.99, {100}, DirectionSequence::e1(), 1000,
                                 "direct", 0);
  REQUIRE(est.size() == 1);
  CHECK(est[0].zero_hits);
  CHECK(est[0].p_hat == 0.0);
  CHECK(est[0].log_p == -kInf);
  CHECK(!std::isfinite(est[0].slope));
  CHECK(est[0].wilson_high > 0.0);  // the interval remains informative
}

TEST_CASE("speed selection: annealed directions at p < 2 use the reduced speed") {
  // random_each_rep at p = 1.5 lives at speed n^{r_p}.
  const auto est = estimate_tail(PExponent(1.5), 0.4, {50},
                                 DirectionSequence::random_each_rep(3), 50000, "direct", 0);
  REQUIRE(est.size() == 1);
  const double rp = 2.0 * 1.5 / 3.5;
  CHECK(est[0].slope == doctest::Approx(-est[0].log_p / std::pow(50.0, rp)).epsilon(1e-12));

  // A fixed direction at p = 1 lives at speed n / sqrt(log n).
  const auto e1 = estimate_tail(PExponent(1.0), 0.4, {50}, DirectionSequence::e1(), 50000,
                                "direct", 0);
  const double sp = 50.0 / std::sqrt(std::log(50.0));
  CHECK(e1[0].slope == doctest::Approx(-e1[0].log_p / sp).epsilon(1e-12));
}

TEST_CASE("glivenko-cantelli report decreases for typical directions") {
  const GCReport rep = gc_report({100, 2000}, DirectionSequence::typical(1), 1.0);
  REQUIRE(rep.n.size() == 2);
  REQUIRE(rep.wasserstein_r.size() == 2);
  CHECK(rep.wasserstein_r[0] > rep.wasserstein_r[1]);
  CHECK(rep.wasserstein_r[1] < 0.1);
  CHECK(rep.r == 1.0);
  CHECK_THROWS_AS(gc_report({100}, DirectionSequence::typical(1), 0.0), std::invalid_argument);
}

TEST_CASE("max-coordinate scaling separates flat and spiked directions") {
  const std::vector<int> ns{100, 10000};
  const auto spiked = max_coordinate_scaling(ns, DirectionSequence::e1());
  CHECK(spiked[1] > spiked[0]);  // sqrt(n / log n) grows
  const auto flat = max_coordinate_scaling(ns, DirectionSequence::iota());
  CHECK(flat[1] < flat[0]);  // max coordinate ~ sqrt(3/n): scaled value shrinks
  const auto typical = max_coordinate_scaling(ns, DirectionSequence::typical(2));
  CHECK(typical[1] > 0.8);
  CHECK(typical[1] < 2.5);  // ~ sqrt(2) for independent normals
  CHECK_THROWS_AS(max_coordinate_scaling({1}, DirectionSequence::e1()), std::domain_error);
}

TEST_CASE("estimates serialize to schema-tagged json lines") {
  const auto est = estimate_tail(PExponent(2.0), 0.3, {50, 100}, DirectionSequence::e1(), 5000,
                                 "direct", 0);
  const std::string text = mc_estimates_jsonl(est, PExponent(2.0), "e1", 7);
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else
      cur += ch;
  }
  REQUIRE(lines.size() == 2);
  for (const std::string& ln : lines) {
    const nlohmann::json j = nlohmann::json::parse(ln);
    CHECK(j.at("schema") == "lp-ldp.mc-estimate.v1");
    CHECK(j.at("dir") == "e1");
    CHECK(j.at("seed") == 7);
    CHECK(j.at("method") == "direct");
    CHECK(j.at("p") == 2.0);
    CHECK(j.contains("p_hat"));
    CHECK(j.contains("std_error"));
    CHECK(j.contains("wilson_low"));
    CHECK(j.contains("wilson_high"));
    CHECK(j.contains("slope"));
  }

  // Infinite sentinels serialize as strings.
  const auto zero = estimate_tail(PExponent(2.0), 0.99, {100}, DirectionSequence::e1(), 500,
                                  "direct", 0);
  const std::string ztext = mc_estimates_jsonl(zero, PExponent(2.0), "e1", 7);
  const nlohmann::json zj = nlohmann::json::parse(ztext.substr(0, ztext.find('\n')));
  CHECK(zj.at("log_p") == "-inf");
  CHECK(zj.at("zero_hits") == true);

  const GCReport rep = gc_report({100, 400}, DirectionSequence::typical(1), 2.0);
  const nlohmann::json gj = nlohmann::json::parse(gc_report_json(rep));
  CHECK(gj.at("schema") == "lp-ldp.gc-report.v1");
  CHECK(gj.at("n").size() == 2);
  CHECK(gj.at("wasserstein_r").size() == 2);
}

TEST_CASE("estimate input validation") {
  CHECK_THROWS_AS(estimate_tail(PExponent(2.0), 0.3, {0}, DirectionSequence::e1(), 100,
                                "direct", 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_tail(PExponent(2.0), 0.3, {100}, DirectionSequence::e1(), 0,
                                "direct", 0),
                  std::invalid_argument);
}
