#include "lpldp/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpldp/legendre.hpp"
#include "lpldp/mgf.hpp"
#include "lpldp/parallel.hpp"
#include "lpldp/rates.hpp"

namespace lpldp {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LP_LDP_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0 && v < 1024) return static_cast<int>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

Direction DirectionSequence::emit(int n) const {
  if (n < 1) throw std::invalid_argument("direction: n must be >= 1");
  Direction d;
  switch (kind) {
    case Kind::typical: {
      RngEngine eng = make_stream(seed, 1, static_cast<std::uint64_t>(n));
      d = sample_sphere(n, eng);
      break;
    }
    case Kind::column_coupled: {
      // one infinite normal stream; the direction at n is the normalized
      // n-prefix, so directions across n are coupled coordinatewise
      RngEngine eng = make_stream(seed, 2, 0);
      std::normal_distribution<double> g(0.0, 1.0);
      d.coords.resize(static_cast<size_t>(n));
      double s = 0.0;
      for (auto& v : d.coords) {
        v = g(eng);
        s += v * v;
      }
      if (!(s > 0.0)) {
        d.coords[0] = 1.0;
        s = 1.0;
      }
      double inv = 1.0 / std::sqrt(s);
      for (auto& v : d.coords) v *= inv;
      break;
    }
    case Kind::iota: {
      d.coords.resize(static_cast<size_t>(n));
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        d.coords[static_cast<size_t>(i)] = i + 1.0;
        s += (i + 1.0) * (i + 1.0);
      }
      double inv = 1.0 / std::sqrt(s);
      for (auto& v : d.coords) v *= inv;
      break;
    }
    case Kind::e1:
      d.coords.assign(static_cast<size_t>(n), 0.0);
      d.coords[0] = 1.0;
      break;
    case Kind::random_each_rep:
      throw std::invalid_argument("direction: random_each_rep has no fixed direction");
  }
  return d;
}

std::string DirectionSequence::label() const {
  switch (kind) {
    case Kind::typical: return "typical";
    case Kind::column_coupled: return "column_coupled";
    case Kind::iota: return "iota";
    case Kind::e1: return "e1";
    case Kind::random_each_rep: return "random_each_rep";
  }
  return "?";
}

namespace {

constexpr long long kChunkSize = 8192;
constexpr double kZ95 = 1.959963984540054;

// Drives the W sampler chunk by chunk: per_value(chunk, rep_index, W). Chunk c
// owns the substream (seed, 3, c), so output is identical for any thread count.
template <class PerValue>
void scan_W(PExponent p, int n, const DirectionSequence& dir, long long reps, int threads,
            bool include_u, PerValue&& per_value) {
  if (n < 1) throw std::invalid_argument("simulate_W: n must be >= 1");
  if (reps < 0) throw std::invalid_argument("simulate_W: reps must be >= 0");
  if (reps == 0) return;
  const bool fresh_theta = dir.kind == DirectionSequence::Kind::random_each_rep;
  Direction fixed;
  if (!fresh_theta) fixed = dir.emit(n);
  const double invp = p.is_inf() ? 0.0 : 1.0 / p.value();
  const double scale = std::pow(static_cast<double>(n), invp - 0.5);
  const long long chunks = (reps + kChunkSize - 1) / kChunkSize;
  parallel_for(chunks, resolve_threads(threads), [&](std::int64_t c) {
    RngEngine eng = make_stream(dir.seed, 3, static_cast<std::uint64_t>(c));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const long long lo = c * kChunkSize;
    const long long hi = std::min(reps, lo + kChunkSize);
    std::vector<double> y(static_cast<size_t>(n));
    Direction theta = fixed;
    for (long long i = lo; i < hi; ++i) {
      if (fresh_theta) theta = sample_sphere(n, eng);
      for (auto& v : y) v = sample_mu_p(p, eng);
      double rad = 1.0;
      if (include_u) {
        double u;
        do { u = unif(eng); } while (u <= 0.0);
        rad = std::exp(std::log(u) / n);
      }
      double dot = 0.0;
      for (size_t j = 0; j < y.size(); ++j) dot += theta.coords[j] * y[j];
      double norm = lp_norm(y, p);
      per_value(c, i, scale * rad * dot / norm);
    }
  });
}

MCEstimate direct_estimate(PExponent p, double w, int n, const DirectionSequence& dir,
                           long long reps, int threads, const SpeedSpec& sp) {
  const long long chunks = (reps + kChunkSize - 1) / kChunkSize;
  std::vector<long long> hits(static_cast<size_t>(chunks), 0);
  scan_W(p, n, dir, reps, threads, true, [&](std::int64_t c, long long, double wv) {
    if (wv >= w) ++hits[static_cast<size_t>(c)];
  });
  long long total = 0;
  for (long long h : hits) total += h;

  MCEstimate e;
  e.n = n;
  e.w = w;
  e.reps = reps;
  e.method = "direct";
  double ph = static_cast<double>(total) / static_cast<double>(reps);
  double dr = static_cast<double>(reps);
  e.p_hat = ph;
  e.std_error = std::sqrt(std::max(0.0, ph * (1.0 - ph) / dr));
  e.zero_hits = total == 0;
  e.log_p = total == 0 ? -kInf : std::log(ph);
  e.slope = total == 0 ? -kInf : -e.log_p / sp.at(static_cast<double>(n));
  double denom = 1.0 + kZ95 * kZ95 / dr;
  double center = (ph + kZ95 * kZ95 / (2.0 * dr)) / denom;
  double half = kZ95 * std::sqrt(ph * (1.0 - ph) / dr + kZ95 * kZ95 / (4.0 * dr * dr)) / denom;
  e.wilson_low = std::max(0.0, center - half);
  e.wilson_high = std::min(1.0, center + half);
  e.acceptance_rate = 1.0;
  return e;
}

// Proposal for a density ~ exp(h(y)), h(y) = a y - beta |y|^p concave: a flat
// cap of width 2 delta around the mode plus two exponential tails under the
// tangent lines at the cap edges (tangents majorize a concave function).
struct TiltSampler {
  double a = 0.0, beta = 1.0, p = 2.0;
  bool normal = false;  // p == 2: exact normal, no rejection
  double mean = 0.0, sd = 1.0;
  double ystar = 0.0, delta = 1.0, hstar = 0.0;
  double yr = 0.0, hr = 0.0, sr = -1.0;
  double yl = 0.0, hl = 0.0, sl = 1.0;
  double area_c = 1.0, area_r = 0.0, area_l = 0.0;
};

TiltSampler make_tilt(double a, double beta, double pv) {
  TiltSampler ts;
  ts.a = a;
  ts.beta = beta;
  ts.p = pv;
  if (pv == 2.0) {
    ts.normal = true;
    ts.mean = a / (2.0 * beta);
    ts.sd = std::sqrt(0.5 / beta);
    return ts;
  }
  auto h = [&](double y) { return a * y - beta * std::pow(std::fabs(y), pv); };
  auto hp = [&](double y) {
    double ay = std::fabs(y);
    double d = beta * pv * (ay > 0.0 ? std::pow(ay, pv - 1.0) : 0.0);
    return a - (y >= 0.0 ? d : -d);
  };
  if (a != 0.0) {
    double m = std::pow(std::fabs(a) / (beta * pv), 1.0 / (pv - 1.0));
    ts.ystar = a > 0.0 ? m : -m;
  }
  ts.hstar = h(ts.ystar);
  double ay = std::fabs(ts.ystar);
  double d2 = ay > 0.0 ? beta * pv * (pv - 1.0) * std::pow(ay, pv - 2.0) : 0.0;
  double delta = d2 > 1e-12 ? 1.0 / std::sqrt(d2) : std::pow(beta * pv, -1.0 / pv);
  if (!(delta > 1e-8)) delta = 1e-8;
  for (int it = 0; it < 200; ++it) {
    if (hp(ts.ystar + delta) < -1e-12 && hp(ts.ystar - delta) > 1e-12) break;
    delta *= 2.0;
  }
  ts.delta = delta;
  ts.yr = ts.ystar + delta;
  ts.hr = h(ts.yr);
  ts.sr = hp(ts.yr);
  ts.yl = ts.ystar - delta;
  ts.hl = h(ts.yl);
  ts.sl = hp(ts.yl);
  ts.area_c = 2.0 * delta;
  ts.area_r = std::exp(ts.hr - ts.hstar) / (-ts.sr);
  ts.area_l = std::exp(ts.hl - ts.hstar) / ts.sl;
  return ts;
}

double sample_tilt(const TiltSampler& ts, RngEngine& eng, long long* proposals) {
  if (ts.normal) {
    std::normal_distribution<double> g(ts.mean, ts.sd);
    ++*proposals;
    return g(eng);
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto h = [&](double y) { return ts.a * y - ts.beta * std::pow(std::fabs(y), ts.p); };
  const double total = ts.area_c + ts.area_r + ts.area_l;
  for (;;) {
    ++*proposals;
    double pick = unif(eng) * total;
    double y, env;
    if (pick < ts.area_c) {
      y = ts.ystar - ts.delta + 2.0 * ts.delta * unif(eng);
      env = ts.hstar;
    } else if (pick < ts.area_c + ts.area_r) {
      double e = -std::log(std::max(unif(eng), 1e-300));
      y = ts.yr + e / (-ts.sr);
      env = ts.hr + ts.sr * (y - ts.yr);
    } else {
      double e = -std::log(std::max(unif(eng), 1e-300));
      y = ts.yl - e / ts.sl;
      env = ts.hl + ts.sl * (y - ts.yl);
    }
    if (std::log(std::max(unif(eng), 1e-300)) <= h(y) - env) return y;
  }
}

MCEstimate tilted_estimate(PExponent p, double w, int n, const DirectionSequence& dir,
                           long long reps, int threads, const SpeedSpec& sp) {
  if (p.is_inf() || p.value() <= 1.0)
    throw std::invalid_argument("estimate_tail: tilted needs finite p > 1");
  if (dir.kind == DirectionSequence::Kind::random_each_rep)
    throw std::invalid_argument("estimate_tail: tilted needs a fixed direction kind");
  const double pv = p.value();
  Direction theta = dir.emit(n);
  std::vector<double> u(static_cast<size_t>(n));
  const double rootn = std::sqrt(static_cast<double>(n));
  for (size_t i = 0; i < u.size(); ++i) u[i] = rootn * theta.coords[i];

  // fit the tilt: the inner maximizer of the quenched rate problem at
  // (w, empirical law of sqrt(n) theta_i)
  FunctionalPtr psi = make_psi_p_nu(p, MeasureSpec::empirical(u));
  InfimumDiagnostics diag;
  LegendreResult ri = rate_infimum(*psi, ContractionSpec::quenched2(w, pv), &diag);
  if (ri.status == LegendreResult::Status::infinite || diag.inner_t.size() != 2)
    throw std::domain_error("estimate_tail: tilted rate problem diverges at this w");
  const double t1s = diag.inner_t[0], t2s = diag.inner_t[1];
  const double beta = 1.0 / pv - t2s;

  const double s = 1.0 - pv * t2s;
  const double lamscale = std::pow(s, -1.0 / pv);
  const double base = -std::log(s) / pv;
  std::vector<TiltSampler> tilt(static_cast<size_t>(n));
  std::vector<double> av(static_cast<size_t>(n)), logZ(static_cast<size_t>(n));
  for (size_t i = 0; i < u.size(); ++i) {
    double ai = t1s * u[i];
    av[i] = ai;
    double f, d1, d2;
    log_mgf_mu_p_derivs(p, ai * lamscale, &f, &d1, &d2);
    logZ[i] = base + f;
    tilt[i] = make_tilt(ai, beta, pv);
  }

  const double scale = std::pow(static_cast<double>(n), 1.0 / pv - 0.5);
  const long long chunks = (reps + kChunkSize - 1) / kChunkSize;
  std::vector<double> sums(static_cast<size_t>(chunks), 0.0);
  std::vector<double> sumsqs(static_cast<size_t>(chunks), 0.0);
  std::vector<long long> proposed(static_cast<size_t>(chunks), 0);
  std::vector<long long> hitsv(static_cast<size_t>(chunks), 0);
  parallel_for(chunks, resolve_threads(threads), [&](std::int64_t c) {
    RngEngine eng = make_stream(dir.seed, 4, static_cast<std::uint64_t>(c));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const long long lo = c * kChunkSize;
    const long long hi = std::min(reps, lo + kChunkSize);
    std::vector<double> y(static_cast<size_t>(n));
    long long prop = 0, nhit = 0;
    double sum = 0.0, sumsq = 0.0;
    for (long long r = lo; r < hi; ++r) {
      double loglr = 0.0;
      for (size_t j = 0; j < y.size(); ++j) {
        double yj = sample_tilt(tilt[j], eng, &prop);
        y[j] = yj;
        loglr += logZ[j] - av[j] * yj - t2s * std::pow(std::fabs(yj), pv);
      }
      double uu;
      do { uu = unif(eng); } while (uu <= 0.0);
      double rad = std::exp(std::log(uu) / n);
      double dot = 0.0;
      for (size_t j = 0; j < y.size(); ++j) dot += theta.coords[j] * y[j];
      double wv = scale * rad * dot / lp_norm(y, p);
      if (wv >= w) {
        double lr = std::exp(loglr);
        sum += lr;
        sumsq += lr * lr;
        ++nhit;
      }
    }
    sums[static_cast<size_t>(c)] = sum;
    sumsqs[static_cast<size_t>(c)] = sumsq;
    proposed[static_cast<size_t>(c)] = prop;
    hitsv[static_cast<size_t>(c)] = nhit;
  });
  double sum = 0.0, sumsq = 0.0;
  long long prop = 0, nhit = 0;
  for (size_t c = 0; c < static_cast<size_t>(chunks); ++c) {
    sum += sums[c];
    sumsq += sumsqs[c];
    prop += proposed[c];
    nhit += hitsv[c];
  }

  MCEstimate e;
  e.n = n;
  e.w = w;
  e.reps = reps;
  e.method = "tilted";
  double dr = static_cast<double>(reps);
  double ph = sum / dr;
  e.p_hat = ph;
  e.std_error = std::sqrt(std::max(0.0, sumsq / dr - ph * ph) / dr);
  e.zero_hits = nhit == 0;
  e.log_p = ph > 0.0 ? std::log(ph) : -kInf;
  e.slope = ph > 0.0 ? -e.log_p / sp.at(static_cast<double>(n)) : -kInf;
  e.wilson_low = std::max(0.0, ph - kZ95 * e.std_error);
  e.wilson_high = ph + kZ95 * e.std_error;
  e.acceptance_rate =
      prop > 0 ? static_cast<double>(reps) * static_cast<double>(n) / static_cast<double>(prop)
               : 1.0;
  return e;
}

nlohmann::json json_num(double v) {
  if (std::isinf(v)) return v > 0 ? nlohmann::json("inf") : nlohmann::json("-inf");
  if (std::isnan(v)) return nlohmann::json("nan");
  return nlohmann::json(v);
}

}  // namespace

std::vector<double> simulate_W(PExponent p, int n, const DirectionSequence& dir, long long reps,
                               int threads, bool include_u) {
  std::vector<double> out(static_cast<size_t>(std::max<long long>(reps, 0)));
  scan_W(p, n, dir, reps, threads, include_u,
         [&](std::int64_t, long long i, double wv) { out[static_cast<size_t>(i)] = wv; });
  return out;
}

std::vector<MCEstimate> estimate_tail(PExponent p, double w, const std::vector<int>& n_grid,
                                      const DirectionSequence& dir, long long reps,
                                      const std::string& method, int threads) {
  if (!std::isfinite(w)) throw std::invalid_argument("estimate_tail: w must be finite");
  if (n_grid.empty()) throw std::invalid_argument("estimate_tail: empty n grid");
  if (reps < 1) throw std::invalid_argument("estimate_tail: reps must be >= 1");
  if (method != "direct" && method != "tilted")
    throw std::invalid_argument("estimate_tail: method must be 'direct' or 'tilted'");
  // the natural speed: annealed (fresh directions) runs at n^{2p/(2+p)} for
  // p < 2; a frozen direction at p = 1 runs at n / sqrt(log n); else n
  SpeedSpec sp = SpeedSpec::linear_n();
  if (dir.kind == DirectionSequence::Kind::random_each_rep) {
    if (!p.is_inf() && p.value() < 2.0) sp = SpeedSpec::power(2.0 * p.value() / (2.0 + p.value()));
  } else if (!p.is_inf() && p.value() == 1.0) {
    sp = SpeedSpec::n_over_sqrt_log_n();
  }
  std::vector<MCEstimate> out;
  out.reserve(n_grid.size());
  for (int n : n_grid) {
    if (n < 1) throw std::invalid_argument("estimate_tail: n must be >= 1");
    out.push_back(method == "direct" ? direct_estimate(p, w, n, dir, reps, threads, sp)
                                     : tilted_estimate(p, w, n, dir, reps, threads, sp));
  }
  return out;
}

GCReport gc_report(const std::vector<int>& n_grid, const DirectionSequence& dir, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("gc_report: r must be > 0");
  GCReport rep;
  rep.r = r;
  rep.dir = dir.label();
  const int K = 10000;
  for (int n : n_grid) {
    Direction th = dir.emit(n);
    std::vector<double> u(static_cast<size_t>(n));
    const double rootn = std::sqrt(static_cast<double>(n));
    for (size_t i = 0; i < u.size(); ++i) u[i] = rootn * th.coords[i];
    std::sort(u.begin(), u.end());
    double acc = 0.0;
    for (int k = 1; k <= K; ++k) {
      double uu = (k - 0.5) / static_cast<double>(K);
      long long idx = static_cast<long long>(std::ceil(uu * n)) - 1;
      idx = std::min<long long>(std::max<long long>(idx, 0), n - 1);
      acc += std::pow(std::fabs(u[static_cast<size_t>(idx)] - normal_quantile(uu)), r);
    }
    rep.n.push_back(n);
    rep.wasserstein_r.push_back(acc / K);
  }
  return rep;
}

std::vector<double> max_coordinate_scaling(const std::vector<int>& n_grid,
                                           const DirectionSequence& dir) {
  std::vector<double> out;
  out.reserve(n_grid.size());
  for (int n : n_grid) {
    if (n < 2) throw std::domain_error("max_coordinate_scaling: needs n >= 2");
    Direction th = dir.emit(n);
    double m = 0.0;
    for (double v : th.coords) m = std::max(m, std::fabs(v));
    out.push_back(m * std::sqrt(static_cast<double>(n) / std::log(static_cast<double>(n))));
  }
  return out;
}

std::string mc_estimates_jsonl(const std::vector<MCEstimate>& est, PExponent p,
                               const std::string& dir_label, std::uint64_t seed) {
  std::string out;
  for (const auto& e : est) {
    nlohmann::json j;
    j["schema"] = "lp-ldp.mc-estimate.v1";
    j["n"] = e.n;
    j["w"] = e.w;
    if (p.is_inf()) j["p"] = "inf";
    else j["p"] = p.value();
    j["dir"] = dir_label;
    j["seed"] = seed;
    j["method"] = e.method;
    j["reps"] = e.reps;
    j["p_hat"] = json_num(e.p_hat);
    j["std_error"] = json_num(e.std_error);
    j["log_p"] = json_num(e.log_p);
    j["slope"] = json_num(e.slope);
    j["wilson_low"] = json_num(e.wilson_low);
    j["wilson_high"] = json_num(e.wilson_high);
    j["zero_hits"] = e.zero_hits;
    j["acceptance_rate"] = json_num(e.acceptance_rate);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string gc_report_json(const GCReport& rep) {
  nlohmann::json j;
  j["schema"] = "lp-ldp.gc-report.v1";
  j["dir"] = rep.dir;
  j["r"] = rep.r;
  j["n"] = rep.n;
  nlohmann::json vals = nlohmann::json::array();
  for (double v : rep.wasserstein_r) vals.push_back(json_num(v));
  j["wasserstein_r"] = std::move(vals);
  return j.dump(2);
}

}  // namespace lpldp
