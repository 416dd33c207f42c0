#include "lpldp/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "lpldp/legendre.hpp"

namespace lpldp {

namespace {

constexpr double kKktTol = 1e-6;
constexpr double kLog2Pi = 1.8378770664093454836;

std::string fmt_g17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Equispaced grids and their standard-normal cell masses.
// ---------------------------------------------------------------------------

struct GridInfo {
  double dx = 0.0;
  std::vector<double> mass;  // cell mass of the standard normal around each node
};

GridInfo grid_cells(const std::vector<double>& x, const char* who) {
  if (x.size() < 3) throw std::invalid_argument(std::string(who) + ": grid needs at least 3 points");
  double dx = x[1] - x[0];
  if (!(dx > 0.0)) throw std::invalid_argument(std::string(who) + ": grid must be strictly increasing");
  for (size_t j = 1; j < x.size(); ++j) {
    double d = x[j] - x[j - 1];
    if (!(d > 0.0) || std::fabs(d - dx) > 1e-9 * std::max(1.0, dx))
      throw std::invalid_argument(std::string(who) + ": grid must be equispaced");
  }
  GridInfo gi;
  gi.dx = dx;
  gi.mass.resize(x.size());
  double h = 0.5 * dx;
  for (size_t j = 0; j < x.size(); ++j) gi.mass[j] = normal_cdf(x[j] + h) - normal_cdf(x[j] - h);
  return gi;
}

// ---------------------------------------------------------------------------
// Entropic mirror descent over grid-discrete measures with m2 <= 1.
// ---------------------------------------------------------------------------

// Exponentially tilt w by exp(-lam x^2), lam >= 0 chosen by bisection so the
// renormalized weights satisfy m2 <= 1 (the KL projection onto the moment
// cap). When even total collapse cannot reach m2 <= 1 (grid with min x^2 > 1)
// the weights are left at the closest tilt; callers then see +inf objectives.
void project_m2(const std::vector<double>& xsq, std::vector<double>& w) {
  double m2 = 0.0;
  for (size_t j = 0; j < w.size(); ++j) m2 += w[j] * xsq[j];
  if (m2 <= 1.0) return;
  auto m2_of = [&](double lam) {
    double sw = 0.0, sx = 0.0;
    for (size_t j = 0; j < w.size(); ++j) {
      if (w[j] <= 0.0) continue;
      double e = w[j] * std::exp(-lam * xsq[j]);
      sw += e;
      sx += e * xsq[j];
    }
    return sw > 0.0 ? sx / sw : 0.0;
  };
  double hi = 1.0;
  int guard = 0;
  while (m2_of(hi) > 1.0 && guard++ < 60) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 120; ++i) {
    double mid = 0.5 * (lo + hi);
    if (m2_of(mid) > 1.0) lo = mid;
    else hi = mid;
  }
  double lam = hi;
  double s = 0.0;
  for (size_t j = 0; j < w.size(); ++j) {
    w[j] *= std::exp(-lam * xsq[j]);
    s += w[j];
  }
  for (auto& v : w) v /= s;
}

// One multiplicative step w' ~ w exp(-eta g), renormalized and projected.
std::vector<double> eg_step(const std::vector<double>& xsq, const std::vector<double>& w,
                            const std::vector<double>& g, double eta) {
  const size_t n = w.size();
  std::vector<double> y(n, -kInf);
  double ymax = -kInf;
  for (size_t j = 0; j < n; ++j) {
    if (w[j] > 0.0) {
      y[j] = std::log(w[j]) - eta * g[j];
      ymax = std::max(ymax, y[j]);
    }
  }
  std::vector<double> wn(n, 0.0);
  double s = 0.0;
  for (size_t j = 0; j < n; ++j) {
    if (y[j] > -kInf) {
      wn[j] = std::exp(y[j] - ymax);
      s += wn[j];
    }
  }
  for (auto& v : wn) v /= s;
  project_m2(xsq, wn);
  return wn;
}

// First-order stationarity of min_w sum_j w_j g-potential subject to the
// simplex and m2 <= 1: fit the multipliers (mu for mass, lam >= 0 for the
// moment cap) by weighted least squares and report the largest violation of
//   g_j + lam x_j^2 - mu = 0  on the support (|.|),
//   g_j + lam x_j^2 - mu >= 0 off it.
// Cells with w_j == 0 exactly (unreachable under multiplicative updates) are
// excluded.
double kkt_residual(const std::vector<double>& xsq, const std::vector<double>& w,
                    const std::vector<double>& g) {
  double B = 0.0, C = 0.0, Gm = 0.0, Gx = 0.0;
  for (size_t j = 0; j < w.size(); ++j) {
    if (w[j] <= 0.0) continue;
    B += w[j] * xsq[j];
    C += w[j] * xsq[j] * xsq[j];
    Gm += w[j] * g[j];
    Gx += w[j] * g[j] * xsq[j];
  }
  double lam = 0.0;
  if (B > 1.0 - 1e-9) {
    double det = C - B * B;
    if (det > 1e-14) lam = std::max(0.0, (Gm * B - Gx) / det);
  }
  double mu = Gm + lam * B;
  double r = 0.0;
  for (size_t j = 0; j < w.size(); ++j) {
    if (w[j] <= 0.0) continue;
    double sj = g[j] + lam * xsq[j] - mu;
    if (w[j] > 1e-10) r = std::max(r, std::fabs(sj));
    else r = std::max(r, std::max(0.0, -sj));
  }
  return r;
}

using ObjFn = std::function<double(const std::vector<double>&, std::vector<double>&)>;

// The variational solvers demand grids that can represent measures close to
// mu_2: symmetric about 0 and reaching at least six standard deviations.
void check_variational_grid(const std::vector<double>& x, const char* who) {
  if (std::fabs(x.front() + x.back()) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": grid must be symmetric about 0");
  if (!(x.back() >= 6.0 - 1e-6))
    throw std::invalid_argument(std::string(who) + ": grid must cover [-6, 6]");
}

// Cell-mass discretization of the uniform law on [-sqrt(3), sqrt(3)]: the
// canonical compactly supported start with m2 = 1 and maximal spread, used
// when the mu_2 start is infeasible for the inner problem.
std::vector<double> witness_start(const std::vector<double>& x, double dx) {
  const double R = std::sqrt(3.0);
  const double h = 0.5 * dx;
  std::vector<double> w(x.size(), 0.0);
  double s = 0.0;
  for (size_t j = 0; j < x.size(); ++j) {
    double lo = std::max(x[j] - h, -R), hi = std::min(x[j] + h, R);
    w[j] = std::max(0.0, hi - lo);
    s += w[j];
  }
  for (auto& v : w) v /= s;
  return w;
}

// Minimize obj over grid-discrete probability weights with m2 <= 1 by mirror
// descent with an adaptive step, starting from the first feasible candidate
// in `starts` (each normalized and moment-projected first). obj must return
// +inf for infeasible weights and fill the gradient otherwise. Cells whose
// start weight is zero stay at zero (multiplicative updates); stationarity is
// reported for the reachable face.
VariationalSolution run_eg(const std::vector<double>& x,
                           const std::vector<std::vector<double>>& starts, const ObjFn& obj,
                           int max_iter) {
  const size_t n = x.size();
  std::vector<double> xsq(n);
  for (size_t j = 0; j < n; ++j) xsq[j] = x[j] * x[j];

  std::vector<double> w, g(n, 0.0), gc(n, 0.0);
  double O = kInf;
  for (const auto& s0 : starts) {
    std::vector<double> cand = s0;
    double cs = 0.0;
    for (double v : cand) cs += v;
    if (!(cs > 0.0)) continue;
    for (auto& v : cand) v /= cs;
    project_m2(xsq, cand);
    double Oc = obj(cand, g);
    if (std::isfinite(Oc)) {
      w.swap(cand);
      O = Oc;
      break;
    }
  }
  VariationalSolution out;
  if (!std::isfinite(O)) {
    std::vector<double> fb = starts.front();
    double cs = 0.0;
    for (double v : fb) cs += v;
    for (auto& v : fb) v /= (cs > 0.0 ? cs : 1.0);
    out.value = kInf;
    out.minimizer = MeasureSpec::grid_discrete(x, fb);
    out.kkt_residual = 0.0;
    return out;
  }
  out.objective_trace.push_back(O);
  double eta = 1.0;
  int plateau = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (kkt_residual(xsq, w, g) < kKktTol) break;
    bool accepted = false;
    for (int h = 0; h < 45 && !accepted; ++h) {
      std::vector<double> wc = eg_step(xsq, w, g, eta);
      double Oc = obj(wc, gc);
      if (std::isfinite(Oc) && Oc <= O + 1e-12 * (1.0 + std::fabs(O))) {
        plateau = (Oc > O - 1e-13 * (1.0 + std::fabs(O))) ? plateau + 1 : 0;
        w.swap(wc);
        O = Oc;
        g.swap(gc);
        accepted = true;
      } else {
        eta *= 0.5;
        if (eta < 1e-16) break;
      }
    }
    if (!accepted || eta < 1e-16) break;
    eta = std::min(eta * 1.3, 8.0);
    out.objective_trace.push_back(O);
    if (plateau >= 60) break;
  }
  // Polish: at unit step the mirror map w -> proj(w exp(-g)) is the
  // constrained-Gibbs fixed point of the stationarity conditions — exact in
  // one step when the potentials do not depend on w, contracting nearby
  // otherwise. Iterate it without the monotone-acceptance guard, keeping the
  // iterate with the smallest stationarity residual.
  double r_best = kkt_residual(xsq, w, g);
  std::vector<double> w_best = w;
  for (int it = 0; it < 400 && r_best >= kKktTol; ++it) {
    std::vector<double> wc = eg_step(xsq, w, g, 1.0);
    double Oc = obj(wc, gc);
    if (!std::isfinite(Oc)) break;
    w.swap(wc);
    O = Oc;
    g.swap(gc);
    double r = kkt_residual(xsq, w, g);
    if (r < r_best) {
      r_best = r;
      w_best = w;
    } else if (it > 40 && r > 100.0 * r_best) {
      break;  // not contracting here; keep the best iterate found
    }
  }
  if (w != w_best) {
    w = w_best;
    O = obj(w, g);
  }
  if (out.objective_trace.empty() || O != out.objective_trace.back())
    out.objective_trace.push_back(O);
  out.value = O;
  out.kkt_residual = kkt_residual(xsq, w, g);
  out.minimizer = MeasureSpec::grid_discrete(x, w);
  return out;
}

// ---------------------------------------------------------------------------
// Warm-started quenched inner solves (the I_q(w; nu) oracle inside the
// variational objective) with the Danskin potentials a_j they induce.
// ---------------------------------------------------------------------------

// Fills a_j = Lambda_p(t1 x_j, t2), the per-cell cumulant at the inner
// maximizer; -a_j is the derivative of I_q w.r.t. the weight on cell j.
void fill_lambda_potentials(double pv, double t1, double t2, const std::vector<double>& x,
                            std::vector<double>* a) {
  double s = 1.0 - pv * t2;
  double lam = std::pow(s, -1.0 / pv);
  double base = -std::log(s) / pv;
  a->resize(x.size());
  PExponent p(pv);
  for (size_t j = 0; j < x.size(); ++j) {
    double f, d1, d2;
    log_mgf_mu_p_derivs(p, t1 * x[j] * lam, &f, &d1, &d2);
    (*a)[j] = base + f;
  }
}

// inf_{tau > 0} Psi*_{p,nu}(w tau^{1/p}, tau) for nu = sum_j wts_j delta_{x_j}.
// Tries a scalar Newton iteration on the envelope from the warm pair
// (tau_warm, t_warm); falls back to the full bracketed infimum. Returns +inf
// when the infimum diverges, and refreshes the warm state on success.
double quenched_inner(double pv, double w, const std::vector<double>& x,
                      const std::vector<double>& wts, double* tau_warm,
                      std::vector<double>* t_warm, std::vector<double>* a) {
  MeasureSpec nu = MeasureSpec::grid_discrete(x, wts);
  FunctionalPtr psi = make_psi_p_nu(PExponent(pv), nu);

  double val = kInf, taustar = -1.0;
  std::vector<double> tst;
  bool have = false;

  if (*tau_warm > 0.0 && t_warm->size() == 2) {
    double tau = *tau_warm;
    std::vector<double> t = *t_warm;
    double F = kInf;
    bool ok = true;
    for (int it = 0; it < 30 && ok; ++it) {
      std::vector<double> tauv = {w * std::pow(tau, 1.0 / pv), tau};
      LegendreResult r;
      try {
        r = conjugate(*psi, tauv, &t);
      } catch (const SolverError&) {
        ok = false;
        break;
      }
      if (r.status != LegendreResult::Status::converged) {
        ok = false;
        break;
      }
      t = r.argmax;
      F = r.value;
      double dtau1 = (w / pv) * std::pow(tau, 1.0 / pv - 1.0);
      double Fp = t[0] * dtau1 + t[1];
      if (std::fabs(Fp) < 1e-9) break;
      double gbuf[2], hbuf[4];
      psi->derivatives(t.data(), gbuf, hbuf);
      double det = hbuf[0] * hbuf[3] - hbuf[1] * hbuf[2];
      if (!(det > 0.0)) {
        ok = false;
        break;
      }
      double u0 = (hbuf[3] * dtau1 - hbuf[1]) / det;
      double u1 = (hbuf[0] - hbuf[2] * dtau1) / det;
      double d2tau1 = (w / pv) * (1.0 / pv - 1.0) * std::pow(tau, 1.0 / pv - 2.0);
      double Fpp = t[0] * d2tau1 + dtau1 * u0 + u1;
      if (!(Fpp > 1e-16)) {
        ok = false;
        break;
      }
      double tnew = tau - Fp / Fpp;
      tnew = std::min(std::max(tnew, 0.2 * tau), 5.0 * tau);
      tnew = std::min(std::max(tnew, 1e-6), 1e6);
      if (tnew == tau) break;
      tau = tnew;
      if (it == 29) ok = false;
    }
    if (ok && std::isfinite(F) && t.size() == 2) {
      double dtau1 = (w / pv) * std::pow(tau, 1.0 / pv - 1.0);
      if (std::fabs(t[0] * dtau1 + t[1]) < 1e-7) {
        val = F;
        tst = t;
        taustar = tau;
        have = true;
      }
    }
  }

  if (!have) {
    InfimumDiagnostics diag;
    LegendreResult r;
    try {
      r = rate_infimum(*psi, ContractionSpec::quenched2(w, pv), &diag);
    } catch (const SolverError&) {
      return kInf;  // unevaluable candidate: treat as infeasible
    }
    if (r.status == LegendreResult::Status::infinite || !std::isfinite(r.value) ||
        diag.inner_t.size() != 2)
      return kInf;
    val = r.value;
    tst = diag.inner_t;
    taustar = diag.tau.size() == 2 ? diag.tau[1] : -1.0;
  }

  *tau_warm = taustar;
  *t_warm = tst;
  fill_lambda_potentials(pv, tst[0], tst[1], x, a);
  return val;
}

// The compact-support analogue: I_q(w; nu) = (Psi_{gamma,nu})*(w), finite for
// |w| < support_radius(gamma) * m1(nu); a_j = log-mgf of gamma at t* x_j.
double quenched_inner_gamma(const MeasureSpec& gamma, double w, const std::vector<double>& x,
                            const std::vector<double>& wts, std::vector<double>* t_warm,
                            std::vector<double>* a) {
  MeasureSpec nu = MeasureSpec::grid_discrete(x, wts);
  double reach = gamma.support_radius() * nu.abs_moment(1.0);
  if (std::fabs(w) >= reach) return (w == 0.0 && reach == 0.0) ? 0.0 : kInf;
  FunctionalPtr psi = make_psi_gamma_nu(gamma, nu);
  std::vector<double> tau = {w};
  LegendreResult r;
  try {
    const std::vector<double>* start = (t_warm->size() == 1) ? t_warm : nullptr;
    r = conjugate(*psi, tau, start);
  } catch (const SolverError&) {
    try {
      r = conjugate(*psi, tau, nullptr);
    } catch (const SolverError&) {
      return kInf;
    }
  }
  if (r.status == LegendreResult::Status::infinite || !std::isfinite(r.value)) return kInf;
  *t_warm = r.argmax;
  double ts = r.argmax[0];
  a->resize(x.size());
  for (size_t j = 0; j < x.size(); ++j) {
    double f, d1, d2;
    measure_log_mgf_derivs(gamma, ts * x[j], &f, &d1, &d2);
    (*a)[j] = f;
  }
  return r.value;
}

// Shared assembly: relative entropy + moment-gap terms plus the inner linear
// potential -sum_j w_j a_j, with gradient. Returns +inf on infeasibility.
double entropy_objective(const GridInfo& gi, const std::vector<double>& xsq,
                         const std::vector<double>& a, double inner_value,
                         const std::vector<double>& wts, std::vector<double>& gout) {
  double m2 = 0.0, ent = 0.0;
  for (size_t j = 0; j < wts.size(); ++j) {
    m2 += wts[j] * xsq[j];
    if (wts[j] > 0.0) {
      if (gi.mass[j] <= 0.0) return kInf;
      double lr = std::log(wts[j] / gi.mass[j]);
      ent += wts[j] * lr;
      gout[j] = -a[j] + lr + 1.0 - 0.5 * xsq[j];
    } else {
      gout[j] = 0.0;  // cell unreachable under multiplicative updates
    }
  }
  if (m2 > 1.0 + 1e-12) return kInf;
  return inner_value + ent + 0.5 * (1.0 - m2);
}

}  // namespace

// ---------------------------------------------------------------------------
// RateKind / SpeedSpec
// ---------------------------------------------------------------------------

RateKind RateKind::quenched_p1(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("quenched_p1: c must be > 0");
  RateKind k;
  k.tag = Tag::quenched_p1;
  k.c = c;
  return k;
}

std::string RateKind::label() const {
  switch (tag) {
    case Tag::annealed: return "annealed";
    case Tag::quenched: return "quenched";
    case Tag::cramer: return "cramer";
    case Tag::j2: return "j2";
    case Tag::quenched_p1: return "quenched_p1";
    case Tag::e1_projection: return "e1";
    case Tag::annealed_sub2: return "annealed_sub2";
  }
  return "?";
}

SpeedSpec SpeedSpec::power(double r) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("speed power: r must lie in (0, 1]");
  return {Tag::power, r};
}

SpeedSpec SpeedSpec::for_kind(const RateKind& kind, PExponent p) {
  switch (kind.tag) {
    case RateKind::Tag::quenched_p1:
      return n_over_sqrt_log_n();
    case RateKind::Tag::annealed:
    case RateKind::Tag::annealed_sub2:
      if (!p.is_inf() && p.value() < 2.0) return power(2.0 * p.value() / (2.0 + p.value()));
      return linear_n();
    default:
      return linear_n();
  }
}

double SpeedSpec::at(double n) const {
  if (!(n > 0.0)) throw std::domain_error("speed: n must be positive");
  switch (tag) {
    case Tag::linear_n: return n;
    case Tag::power: return std::pow(n, r);
    case Tag::n_over_sqrt_log_n:
      if (!(n >= 2.0)) throw std::domain_error("speed n/sqrt(log n): needs n >= 2");
      return n / std::sqrt(std::log(n));
  }
  return n;
}

std::string SpeedSpec::label() const {
  switch (tag) {
    case Tag::linear_n: return "n";
    case Tag::power: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "n^%.12g", r);
      return buf;
    }
    case Tag::n_over_sqrt_log_n: return "n/sqrt(log(n))";
  }
  return "n";
}

// ---------------------------------------------------------------------------
// Rate functions
// ---------------------------------------------------------------------------

double rate(PExponent p, const RateKind& kind, double w) {
  if (!std::isfinite(w)) throw std::invalid_argument("rate: w must be finite");
  using Tag = RateKind::Tag;
  double aw = std::fabs(w);
  switch (kind.tag) {
    case Tag::j2:
      if (!(p == PExponent(2.0))) throw std::invalid_argument("rate: j2 requires p = 2");
      return aw >= 1.0 ? kInf : -0.5 * std::log1p(-w * w);

    case Tag::e1_projection:
      if (p.is_inf()) return aw <= 1.0 ? 0.0 : kInf;
      if (aw >= 1.0) return kInf;
      return -std::log1p(-std::pow(aw, p.value())) / p.value();

    case Tag::annealed_sub2: {
      if (p.is_inf() || p.value() >= 2.0)
        throw std::invalid_argument("rate: annealed_sub2 requires finite p < 2");
      double r = 2.0 * p.value() / (2.0 + p.value());
      return std::pow(aw, r) / r;
    }

    case Tag::quenched_p1:
      if (!(p == PExponent(1.0))) throw std::invalid_argument("rate: quenched_p1 requires p = 1");
      return aw / kind.c;

    case Tag::cramer: {
      if (p.is_inf()) {
        // summands are U[-1,1]: the rate blows up at the essential sup
        if (aw >= 1.0) return kInf;
        FunctionalPtr psi = make_psi_gamma_nu(MeasureSpec::uniform_interval(-1.0, 1.0),
                                              MeasureSpec::dirac(1.0));
        return conjugate(*psi, {w}).value;
      }
      if (p.value() <= 1.0) throw std::invalid_argument("rate: cramer requires p > 1");
      FunctionalPtr f = make_lambda_p(p);
      return rate_infimum(*f, ContractionSpec::quenched2(w, p.value())).value;
    }

    case Tag::quenched: {
      if (p.is_inf()) {
        double reach = kind.nu.abs_moment(1.0);
        if (aw >= reach) return (w == 0.0 && reach == 0.0) ? 0.0 : kInf;
        FunctionalPtr psi =
            make_psi_gamma_nu(MeasureSpec::uniform_interval(-1.0, 1.0), kind.nu);
        return conjugate(*psi, {w}).value;
      }
      if (p.value() <= 1.0)
        throw std::invalid_argument("rate: quenched at p = 1 is the quenched_p1 closed form");
      FunctionalPtr f = make_psi_p_nu(p, kind.nu);
      return rate_infimum(*f, ContractionSpec::quenched2(w, p.value())).value;
    }

    case Tag::annealed: {
      if (p.is_inf()) {
        FunctionalPtr f = make_phi_gamma(MeasureSpec::uniform_interval(-1.0, 1.0));
        return rate_infimum(*f, ContractionSpec::product2(w)).value;
      }
      if (p.value() < 2.0) {
        double r = 2.0 * p.value() / (2.0 + p.value());
        return std::pow(aw, r) / r;
      }
      FunctionalPtr f = make_phi_p(p);
      return rate_infimum(*f, ContractionSpec::annealed3(w, p.value())).value;
    }
  }
  throw std::logic_error("rate: unreachable");
}

RateCurve rate_curve(PExponent p, const RateKind& kind, const std::vector<double>& w,
                     const SpeedSpec& speed) {
  RateCurve c;
  c.kind = kind;
  c.p = p;
  c.speed = speed;
  c.w = w;
  c.value.reserve(w.size());
  for (double wi : w) c.value.push_back(rate(p, kind, wi));
  return c;
}

// ---------------------------------------------------------------------------
// Entropy functional and the variational solvers
// ---------------------------------------------------------------------------

double entropy_h(const MeasureSpec& nu) {
  if (nu.kind != MeasureSpec::Kind::grid_discrete)
    throw std::invalid_argument("entropy_h: nu must be grid_discrete");
  GridInfo gi = grid_cells(nu.points, "entropy_h");
  double m2 = 0.0, H = 0.0;
  for (size_t j = 0; j < nu.points.size(); ++j) {
    double wj = nu.weights[j];
    m2 += wj * nu.points[j] * nu.points[j];
    if (wj > 0.0) {
      if (gi.mass[j] <= 0.0) return kInf;
      H += wj * std::log(wj / gi.mass[j]);
    }
  }
  if (m2 > 1.0 + 1e-12) return kInf;
  return H + 0.5 * (1.0 - m2);
}

std::vector<double> default_grid() {
  std::vector<double> x(241);
  for (int j = 0; j < 241; ++j) x[j] = (j - 120) * 0.05;
  return x;
}

VariationalSolution variational_annealed(PExponent p, double w, const std::vector<double>& grid) {
  if (p.is_inf())
    return variational_annealed_gamma(MeasureSpec::uniform_interval(-1.0, 1.0), w, grid);
  if (p.value() < 2.0)
    throw std::invalid_argument(
        "variational_annealed: requires p in [2, inf); p = inf uses the gamma form");
  if (!std::isfinite(w)) throw std::invalid_argument("variational_annealed: w must be finite");
  double pv = p.value();
  std::vector<double> x = grid.empty() ? default_grid() : grid;
  GridInfo gi = grid_cells(x, "variational_annealed");
  check_variational_grid(x, "variational_annealed");
  std::vector<double> xsq(x.size());
  for (size_t j = 0; j < x.size(); ++j) xsq[j] = x[j] * x[j];

  double tau_warm = -1.0;
  std::vector<double> t_warm;
  std::vector<double> a(x.size(), 0.0);
  auto obj = [&](const std::vector<double>& wts, std::vector<double>& gout) -> double {
    double iq = quenched_inner(pv, w, x, wts, &tau_warm, &t_warm, &a);
    if (!std::isfinite(iq)) return kInf;
    return entropy_objective(gi, xsq, a, iq, wts, gout);
  };
  std::vector<std::vector<double>> starts{gi.mass, std::vector<double>(x.size(), 1.0),
                                          witness_start(x, gi.dx)};
  return run_eg(x, starts, obj, 3000);
}

VariationalSolution variational_annealed_gamma(const MeasureSpec& gamma, double w,
                                               const std::vector<double>& grid) {
  if (!(gamma.support_radius() < kInf))
    throw std::invalid_argument("variational_annealed_gamma: gamma must be compactly supported");
  if (!std::isfinite(w)) throw std::invalid_argument("variational_annealed_gamma: w must be finite");
  std::vector<double> x = grid.empty() ? default_grid() : grid;
  GridInfo gi = grid_cells(x, "variational_annealed_gamma");
  check_variational_grid(x, "variational_annealed_gamma");
  std::vector<double> xsq(x.size());
  for (size_t j = 0; j < x.size(); ++j) xsq[j] = x[j] * x[j];

  std::vector<double> t_warm;
  std::vector<double> a(x.size(), 0.0);
  auto obj = [&](const std::vector<double>& wts, std::vector<double>& gout) -> double {
    double iq = quenched_inner_gamma(gamma, w, x, wts, &t_warm, &a);
    if (!std::isfinite(iq)) return kInf;
    return entropy_objective(gi, xsq, a, iq, wts, gout);
  };
  std::vector<std::vector<double>> starts{gi.mass, std::vector<double>(x.size(), 1.0),
                                          witness_start(x, gi.dx)};
  return run_eg(x, starts, obj, 3000);
}

VariationalSolution varadhan_sup(PExponent p, MgfPoint2 t, const std::vector<double>& grid) {
  if (p.is_inf() || p.value() <= 1.0)
    throw std::invalid_argument("varadhan_sup: requires finite p > 1");
  double pv = p.value();
  if (!(t.t2 < 1.0 / pv)) throw std::domain_error("varadhan_sup: requires t2 < 1/p");
  std::vector<double> x = grid.empty() ? default_grid() : grid;
  GridInfo gi = grid_cells(x, "varadhan_sup");
  check_variational_grid(x, "varadhan_sup");
  std::vector<double> xsq(x.size());
  for (size_t j = 0; j < x.size(); ++j) xsq[j] = x[j] * x[j];

  std::vector<double> a;
  fill_lambda_potentials(pv, t.t1, t.t2, x, &a);
  // Minimize h(nu) - sum_j w_j a_j; the linear term enters entropy_objective
  // as the inner value so that value and gradient describe the same function.
  auto obj = [&](const std::vector<double>& wts, std::vector<double>& gout) -> double {
    double dot = 0.0;
    for (size_t j = 0; j < wts.size(); ++j) dot += wts[j] * a[j];
    return entropy_objective(gi, xsq, a, -dot, wts, gout);
  };
  std::vector<std::vector<double>> starts{gi.mass, std::vector<double>(x.size(), 1.0),
                                          witness_start(x, gi.dx)};
  VariationalSolution out = run_eg(x, starts, obj, 3000);
  out.value = -out.value;
  for (auto& v : out.objective_trace) v = -v;
  return out;
}

VariationalSolution minimax_conjugate(PExponent p, const std::vector<double>& tau,
                                      const std::vector<double>& grid) {
  if (p.is_inf() || p.value() <= 1.0)
    throw std::invalid_argument("minimax_conjugate: requires finite p > 1");
  if (tau.size() != 2) throw std::invalid_argument("minimax_conjugate: tau must have size 2");
  double pv = p.value();
  std::vector<double> x = grid.empty() ? default_grid() : grid;
  GridInfo gi = grid_cells(x, "minimax_conjugate");
  check_variational_grid(x, "minimax_conjugate");
  std::vector<double> xsq(x.size());
  for (size_t j = 0; j < x.size(); ++j) xsq[j] = x[j] * x[j];

  std::vector<double> t_warm;
  std::vector<double> a(x.size(), 0.0);
  auto obj = [&](const std::vector<double>& wts, std::vector<double>& gout) -> double {
    MeasureSpec nu = MeasureSpec::grid_discrete(x, wts);
    FunctionalPtr psi = make_psi_p_nu(PExponent(pv), nu);
    LegendreResult r;
    try {
      const std::vector<double>* start = (t_warm.size() == 2) ? &t_warm : nullptr;
      r = conjugate(*psi, tau, start);
    } catch (const SolverError&) {
      try {
        r = conjugate(*psi, tau, nullptr);
      } catch (const SolverError&) {
        return kInf;
      }
    }
    if (r.status == LegendreResult::Status::infinite || !std::isfinite(r.value)) return kInf;
    t_warm = r.argmax;
    fill_lambda_potentials(pv, r.argmax[0], r.argmax[1], x, &a);
    return entropy_objective(gi, xsq, a, r.value, wts, gout);
  };
  std::vector<std::vector<double>> starts{gi.mass, std::vector<double>(x.size(), 1.0),
                                          witness_start(x, gi.dx)};
  return run_eg(x, starts, obj, 3000);
}

// ---------------------------------------------------------------------------
// Heavy-tail product exponent
// ---------------------------------------------------------------------------

double tail_product_exponent(PExponent p, double t) {
  if (p.is_inf() || p.value() >= 2.0)
    throw std::invalid_argument("tail_product_exponent: requires finite p in [1, 2)");
  if (!(t > 0.0)) throw std::domain_error("tail_product_exponent: t must be > 0");
  double pv = p.value();
  double logCp = log_norm_const_mu_p(p);

  // log P(|Y| > x) for Y ~ mu_p: the regularized upper gamma when it is
  // representable, else the log-midpoint of the standard integral bracket
  //   x/(x^p + 1) e^{-x^p/p} <= int_x^inf e^{-y^p/p} dy <= x^{1-p} e^{-x^p/p}.
  auto log_tail_abs = [&](double x) -> double {
    double z = std::pow(x, pv) / pv;
    double q = boost::math::gamma_q(1.0 / pv, z);
    if (q >= 1e-280) return std::log(q);
    double lx = std::log(x);
    double lxp = pv * lx;
    double logup = (1.0 - pv) * lx - z;
    double loglo = lx - (lxp + std::log1p(std::exp(-lxp))) - z;
    return std::log(2.0) - logCp + 0.5 * (loglo + logup);
  };
  // One-sided product tail: P(YZ > t) = int_0^inf P(|Y| > t/z) phi(z) dz
  // (conditioning on the sign of Z and using the symmetry of Y). Integrand
  // in log z.
  auto ell = [&](double lz) -> double {
    double z = std::exp(lz);
    return log_tail_abs(t / z) - 0.5 * z * z - 0.5 * kLog2Pi;
  };

  double l_lo = -8.0, l_hi = std::max(8.0, std::log(t));
  const int N = 200;
  int kbest = 0;
  double fbest = -kInf;
  for (int k = 0; k < N; ++k) {
    double lz = l_lo + (l_hi - l_lo) * k / (N - 1);
    double f = ell(lz);
    if (f > fbest) {
      fbest = f;
      kbest = k;
    }
  }
  double ga = l_lo + (l_hi - l_lo) * std::max(0, kbest - 1) / (N - 1);
  double gb = l_lo + (l_hi - l_lo) * std::min(N - 1, kbest + 1) / (N - 1);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = gb - gr * (gb - ga), c2 = ga + gr * (gb - ga);
  double f1 = ell(c1), f2 = ell(c2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      ga = c1;
      c1 = c2;
      f1 = f2;
      c2 = ga + gr * (gb - ga);
      f2 = ell(c2);
    } else {
      gb = c2;
      c2 = c1;
      f2 = f1;
      c1 = gb - gr * (gb - ga);
      f1 = ell(c1);
    }
  }
  double lzstar = 0.5 * (ga + gb);
  double lmax = std::max(fbest, std::max(f1, f2));

  double lo = lzstar, hi = lzstar;
  for (int it = 0; it < 400 && ell(lo - 0.25) > lmax - 50.0; ++it) lo -= 0.25;
  for (int it = 0; it < 400 && ell(hi + 0.25) > lmax - 50.0; ++it) hi += 0.25;

  auto fz = [&](double z) { return std::exp(ell(std::log(z)) - lmax); };
  double I = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      fz, std::exp(lo), std::exp(hi), 10, 1e-9);
  double logP = lmax + std::log(I);
  double rp = 2.0 * pv / (2.0 + pv);
  return logP / std::pow(t, rp);
}

std::vector<double> psi_inf_domain(const MeasureSpec& nu) {
  double m1 = nu.abs_moment(1.0);
  return {-m1, m1};
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string rate_curve_csv(const std::vector<RateCurve>& curves) {
  std::string out = "# schema: lp-ldp.rate-curve.v1\nw,value,kind,p,speed\n";
  for (const auto& c : curves) {
    std::string kind = c.kind.label();
    std::string ps = c.p.is_inf() ? "inf" : fmt_g17(c.p.value());
    std::string sp = c.speed.label();
    for (size_t i = 0; i < c.w.size(); ++i) {
      out += fmt_g17(c.w[i]);
      out += ',';
      out += fmt_g17(c.value[i]);
      out += ',';
      out += kind;
      out += ',';
      out += ps;
      out += ',';
      out += sp;
      out += '\n';
    }
  }
  return out;
}

std::string rate_curve_json(const std::vector<RateCurve>& curves) {
  nlohmann::json doc;
  doc["schema"] = "lp-ldp.rate-curve.v1";
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : curves) {
    nlohmann::json jc;
    jc["kind"] = c.kind.label();
    if (c.p.is_inf()) jc["p"] = "inf";
    else jc["p"] = c.p.value();
    jc["speed"] = c.speed.label();
    jc["w"] = c.w;
    nlohmann::json vals = nlohmann::json::array();
    for (double v : c.value) {
      if (std::isinf(v)) vals.push_back(v > 0 ? "inf" : "-inf");
      else vals.push_back(v);
    }
    jc["value"] = std::move(vals);
    arr.push_back(std::move(jc));
  }
  doc["curves"] = std::move(arr);
  return doc.dump(2);
}

}  // namespace lpldp
