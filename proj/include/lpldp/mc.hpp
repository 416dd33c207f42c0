// mc: exact finite-n samplers for the projected coordinate W, direct and
// tilted tail estimation with deterministic chunked streams, and the
// Glivenko-Cantelli diagnostic for direction empirical measures.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpldp/measures.hpp"

namespace lpldp {

/// How projection directions are produced across n and repetitions.
///  typical        : one direction per n, fresh stream per (seed, n).
///  column_coupled : one infinite stream; direction for n = normalized prefix.
///  iota           : deterministic (1, 2, ..., n) normalized.
///  e1             : first axis vector.
///  random_each_rep: a fresh direction for every repetition (annealed).
struct DirectionSequence {
  enum class Kind { typical, column_coupled, iota, e1, random_each_rep };
  Kind kind = Kind::typical;
  std::uint64_t seed = 0;

  static DirectionSequence typical(std::uint64_t seed) { return {Kind::typical, seed}; }
  static DirectionSequence column_coupled(std::uint64_t seed) {
    return {Kind::column_coupled, seed};
  }
  static DirectionSequence iota() { return {Kind::iota, 0}; }
  static DirectionSequence e1() { return {Kind::e1, 0}; }
  static DirectionSequence random_each_rep(std::uint64_t seed) {
    return {Kind::random_each_rep, seed};
  }

  /// The direction used at dimension n (fixed kinds only).
  Direction emit(int n) const;
  std::string label() const;
};

/// A tail probability estimate at one n.
struct MCEstimate {
  int n = 0;
  double w = 0.0;
  double p_hat = 0.0;      // estimated P(W >= w)
  double std_error = 0.0;  // binomial (direct) or IS std error of p_hat
  double log_p = 0.0;      // log p_hat; -inf when no hits
  double slope = 0.0;      // -log_p / s(n); -inf sentinel when no hits
  long long reps = 0;
  std::string method;      // "direct" or "tilted"
  double wilson_low = 0.0, wilson_high = 0.0;  // 95% Wilson interval (direct)
  bool zero_hits = false;
  double acceptance_rate = 1.0;  // tilted proposal acceptance
};

/// Glivenko-Cantelli diagnostic for the direction empirical measure
/// L_n = (1/n) sum delta_{sqrt(n) theta_i} against mu_2.
struct GCReport {
  std::vector<int> n;
  std::vector<double> wasserstein_r;  // W_r^r proxy: mean |F_n^{-1} - Phi^{-1}|^r on a u-grid
  double r = 2.0;
  std::string dir;
};

/// reps draws of W = n^{1/p - 1/2} U^{1/n} <theta, Y> / |Y|_p at dimension n.
/// Deterministic in (seed, n) and independent of `threads` (fixed-size chunks
/// own seeded substreams). include_u = false drops the U^{1/n} radius factor.
std::vector<double> simulate_W(PExponent p, int n, const DirectionSequence& dir, long long reps,
                               int threads = 0, bool include_u = true);

/// Estimate P(W >= w) at each n of the grid. method = "direct" counts hits;
/// "tilted" importance-samples the per-coordinate exponential tilt fitted to
/// the quenched rate problem at (w, empirical direction law); it requires a
/// deterministic direction kind and finite p > 1.
std::vector<MCEstimate> estimate_tail(PExponent p, double w, const std::vector<int>& n_grid,
                                      const DirectionSequence& dir, long long reps,
                                      const std::string& method = "direct", int threads = 0);

/// Quantile-coupling distance of L_n from mu_2 on a 10^4-point u-grid.
GCReport gc_report(const std::vector<int>& n_grid, const DirectionSequence& dir, double r = 2.0);

/// max_i |theta_i| sqrt(n / log n) along the direction sequence: detects
/// directions violating the p = 1 coordinate-growth condition.
std::vector<double> max_coordinate_scaling(const std::vector<int>& n_grid,
                                           const DirectionSequence& dir);

std::string mc_estimates_jsonl(const std::vector<MCEstimate>& est, PExponent p,
                               const std::string& dir_label, std::uint64_t seed);
std::string gc_report_json(const GCReport& rep);

}  // namespace lpldp
