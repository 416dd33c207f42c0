#include "lpldp/mgf.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <mutex>

#include "lpldp/detail/quad.hpp"

namespace lpldp {

namespace {

constexpr double kTableErr = 1e-11;  // accuracy budget of cached fits

// ---------------------------------------------------------------------------
// Piecewise-Chebyshev cache of log M_p and its two derivatives (finite p > 1,
// p != 2). Each derivative order is fitted from its own analytic quadrature.

struct ChebSeg {
  double lo = 0.0, hi = 1.0;
  std::vector<double> cf, c1, c2;

  static double clenshaw(const std::vector<double>& a, double x01) {
    double d = 0.0, dd = 0.0;
    for (std::size_t j = a.size() - 1; j >= 1; --j) {
      double sv = d;
      d = 2.0 * x01 * d - dd + a[j];
      dd = sv;
    }
    return x01 * d - dd + 0.5 * a[0];
  }

  void eval(double t, double* f, double* d1, double* d2) const {
    double x01 = (2.0 * t - lo - hi) / (hi - lo);
    *f = clenshaw(cf, x01);
    *d1 = clenshaw(c1, x01);
    *d2 = clenshaw(c2, x01);
  }
};

// Fit one derivative-triple segment; false when any sampled value is
// non-finite (the segment is then left to the direct fallback).
template <typename Direct>
bool fit_segment(double lo, double hi, const Direct& direct, ChebSeg* seg) {
  const int deg = 40;
  seg->lo = lo;
  seg->hi = hi;
  std::vector<double> vf(deg), v1(deg), v2(deg);
  for (int j = 0; j < deg; ++j) {
    double x01 = std::cos(M_PI * (j + 0.5) / deg);
    double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x01;
    if (!direct(t, &vf[j], &v1[j], &v2[j])) return false;
    if (!(std::isfinite(vf[j]) && std::isfinite(v1[j]) && std::isfinite(v2[j]))) return false;
  }
  auto fit = [&](const std::vector<double>& v) {
    std::vector<double> a(deg);
    for (int k = 0; k < deg; ++k) {
      double s_k = 0.0;
      for (int j = 0; j < deg; ++j) s_k += v[j] * std::cos(M_PI * k * (j + 0.5) / deg);
      a[k] = 2.0 * s_k / deg;
    }
    return a;
  };
  seg->cf = fit(vf);
  seg->c1 = fit(v1);
  seg->c2 = fit(v2);
  return true;
}

class LogMgf {
 public:
  explicit LogMgf(double p) : p_(p) {
    if (p_ == 2.0) return;
    const double brk[] = {0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
    auto direct = [&](double t, double* f, double* d1, double* d2) {
      double err;
      detail::log_mgf_mu_p_direct(p_, t, f, d1, d2, &err);
      return true;
    };
    for (int s = 0; s + 1 < static_cast<int>(std::size(brk)); ++s) {
      ChebSeg seg;
      if (!fit_segment(brk[s], brk[s + 1], direct, &seg)) break;
      segs_.push_back(std::move(seg));
    }
  }

  void eval(double t, double* f, double* d1, double* d2) const {
    if (p_ == 2.0) {
      *f = 0.5 * t * t;
      *d1 = t;
      *d2 = 1.0;
      return;
    }
    double at = std::fabs(t);
    if (segs_.empty() || at > segs_.back().hi) {
      double err;
      detail::log_mgf_mu_p_direct(p_, at, f, d1, d2, &err);
    } else {
      std::size_t i = 0;
      while (i + 1 < segs_.size() && at > segs_[i].hi) ++i;
      segs_[i].eval(at, f, d1, d2);
    }
    if (t < 0.0) *d1 = -*d1;
  }

  static std::shared_ptr<const LogMgf> get(double p) {
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const LogMgf>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;
    auto ptr = std::make_shared<const LogMgf>(p);
    cache.emplace(p, ptr);
    return ptr;
  }

 private:
  double p_;
  std::vector<ChebSeg> segs_;
};

// Cached J(c) = log E exp(c Y^2), Y ~ mu_p, finite p > 2, on [-512, 512]
// (direct quadrature beyond / above the finite-overflow cutoff).
class LogMgfSq {
 public:
  explicit LogMgfSq(double p) : p_(p) {
    std::vector<double> brk;
    for (double b = 512.0; b >= 1.0; b /= 2.0) brk.push_back(-b);
    brk.push_back(0.0);
    for (double b = 1.0; b <= 512.0; b *= 2.0) brk.push_back(b);
    auto direct = [&](double c, double* f, double* d1, double* d2) {
      double err;
      detail::log_mgf_sq_mu_p_direct(p_, c, f, d1, d2, &err);
      return true;
    };
    for (std::size_t s = 0; s + 1 < brk.size(); ++s) {
      ChebSeg seg;
      if (!fit_segment(brk[s], brk[s + 1], direct, &seg)) {
        if (segs_.empty()) continue;  // keep scanning for the finite window
        break;
      }
      segs_.push_back(std::move(seg));
    }
  }

  void eval(double c, double* f, double* d1, double* d2) const {
    if (segs_.empty() || c < segs_.front().lo || c > segs_.back().hi) {
      double err;
      detail::log_mgf_sq_mu_p_direct(p_, c, f, d1, d2, &err);
      return;
    }
    std::size_t i = 0;
    while (i + 1 < segs_.size() && c > segs_[i].hi) ++i;
    segs_[i].eval(c, f, d1, d2);
  }

  static std::shared_ptr<const LogMgfSq> get(double p) {
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const LogMgfSq>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;
    auto ptr = std::make_shared<const LogMgfSq>(p);
    cache.emplace(p, ptr);
    return ptr;
  }

 private:
  double p_;
  std::vector<ChebSeg> segs_;
};

// log M_gamma(s) with two derivatives for the allowed gamma families.
void gamma_log_mgf(const MeasureSpec& g, double s, double* f, double* d1, double* d2) {
  switch (g.kind) {
    case MeasureSpec::Kind::generalized_normal:
      if (g.p.is_inf()) {
        *f = detail::logsinhc(s);
        *d1 = detail::logsinhc_d1(s);
        *d2 = detail::logsinhc_d2(s);
        return;
      }
      LogMgf::get(g.p.value())->eval(s, f, d1, d2);
      return;
    case MeasureSpec::Kind::uniform_interval: {
      double m = 0.5 * (g.a + g.b), h = 0.5 * (g.b - g.a);
      *f = m * s + detail::logsinhc(h * s);
      *d1 = m + h * detail::logsinhc_d1(h * s);
      *d2 = h * h * detail::logsinhc_d2(h * s);
      return;
    }
    case MeasureSpec::Kind::dirac:
      *f = g.point * s;
      *d1 = g.point;
      *d2 = 0.0;
      return;
    case MeasureSpec::Kind::grid_discrete:
    case MeasureSpec::Kind::empirical: {
      const auto& xs = g.kind == MeasureSpec::Kind::grid_discrete ? g.points : g.samples;
      double uniform_w = 1.0 / static_cast<double>(xs.size());
      double m = -kInf;
      for (double x : xs) m = std::max(m, s * x);
      double z0 = 0.0, z1 = 0.0, z2 = 0.0;
      for (std::size_t j = 0; j < xs.size(); ++j) {
        double w = g.kind == MeasureSpec::Kind::grid_discrete ? g.weights[j] : uniform_w;
        double e = w * std::exp(s * xs[j] - m);
        z0 += e;
        z1 += e * xs[j];
        z2 += e * xs[j] * xs[j];
      }
      *f = m + std::log(z0);
      *d1 = z1 / z0;
      *d2 = std::max(0.0, z2 / z0 - (*d1) * (*d1));
      return;
    }
  }
  throw std::logic_error("gamma_log_mgf: bad kind");
}

void require_gamma_family(const MeasureSpec& g, const char* who) {
  if (g.kind == MeasureSpec::Kind::generalized_normal && !g.p.is_inf() && g.p.value() <= 1.0)
    throw std::invalid_argument(std::string(who) + ": gamma = generalized_normal requires p > 1");
}

void require_sub_gaussian_gamma(const MeasureSpec& g, const char* who) {
  if (g.kind == MeasureSpec::Kind::generalized_normal && !g.p.is_inf() && g.p.value() <= 2.0)
    throw std::invalid_argument(std::string(who) +
                                ": gamma must be compactly supported or lighter than Gaussian");
}

// ---------------------------------------------------------------------------
// Lambda_p(t1, t2) = -(1/p) log s + log M_p(t1 s^{-1/p}), s = 1 - p t2.

class LambdaP final : public Functional {
 public:
  explicit LambdaP(double p) : p_(p), L_(LogMgf::get(p)) {}
  int dim() const override { return 2; }
  bool in_domain(const double* t) const override {
    return std::isfinite(t[0]) && std::isfinite(t[1]) && t[1] < 1.0 / p_;
  }
  double value(const double* t) const override {
    if (!in_domain(t)) return kInf;
    double g[2];
    return derivatives(t, g, nullptr);
  }
  double derivatives(const double* t, double* grad, double* hess) const override {
    double s = 1.0 - p_ * t[1];
    double lam = std::pow(s, -1.0 / p_);
    double chi = t[0] * lam;
    double f, d1, d2;
    L_->eval(chi, &f, &d1, &d2);
    double val = -std::log(s) / p_ + f;
    grad[0] = d1 * lam;
    grad[1] = (1.0 + chi * d1) / s;
    if (hess) {
      hess[0] = d2 * lam * lam;
      hess[1] = hess[2] = lam / s * (d1 + chi * d2);
      hess[3] = (p_ + (1.0 + p_) * chi * d1 + chi * chi * d2) / (s * s);
    }
    return val;
  }

 private:
  double p_;
  std::shared_ptr<const LogMgf> L_;
};

// ---------------------------------------------------------------------------
// Psi_{p,nu}(t1, t2) = integral Lambda_p(t1 u, t2) nu(du).

class PsiPNu final : public Functional {
 public:
  // The integrand u -> Lambda_p(t1 u, t2) is entire in u, so a modest node
  // budget already resolves it to full precision over the |t| <= 50 range
  // the solvers visit.
  PsiPNu(double p, const MeasureSpec& nu, int budget = 64)
      : p_(p), L_(LogMgf::get(p)) {
    auto rule = QuadratureRule::for_measure(nu, budget);
    u_ = std::move(rule.nodes);
    w_ = std::move(rule.weights);
  }
  int dim() const override { return 2; }
  bool in_domain(const double* t) const override {
    return std::isfinite(t[0]) && std::isfinite(t[1]) && t[1] < 1.0 / p_;
  }
  double value(const double* t) const override {
    if (!in_domain(t)) return kInf;
    double g[2];
    return derivatives(t, g, nullptr);
  }
  double derivatives(const double* t, double* grad, double* hess) const override {
    double s = 1.0 - p_ * t[1];
    double lam = std::pow(s, -1.0 / p_);
    double sum_f = 0.0, g1 = 0.0, sum_xl = 0.0, h11 = 0.0, h12 = 0.0, h22x = 0.0;
    for (std::size_t j = 0; j < u_.size(); ++j) {
      double chi = t[0] * u_[j] * lam;
      double f, d1, d2;
      L_->eval(chi, &f, &d1, &d2);
      sum_f += w_[j] * f;
      g1 += w_[j] * u_[j] * d1;
      sum_xl += w_[j] * chi * d1;
      if (hess) {
        h11 += w_[j] * u_[j] * u_[j] * d2;
        h12 += w_[j] * u_[j] * (d1 + chi * d2);
        h22x += w_[j] * (chi * d1 * (1.0 + p_) + chi * chi * d2);
      }
    }
    grad[0] = lam * g1;
    grad[1] = (1.0 + sum_xl) / s;
    if (hess) {
      hess[0] = lam * lam * h11;
      hess[1] = hess[2] = lam / s * h12;
      hess[3] = (p_ + h22x) / (s * s);
    }
    return -std::log(s) / p_ + sum_f;
  }

 private:
  double p_;
  std::shared_ptr<const LogMgf> L_;
  std::vector<double> u_, w_;
};

// ---------------------------------------------------------------------------
// Phi_p(t0, t1, t2) = -(1/p) log s - (1/2) log b + J(c), b = 1 - 2 t0,
// c = t1^2 s^{-2/p} / (2 b), J(c) = log E exp(c Y^2), Y ~ mu_p, p >= 2.

class PhiP final : public Functional {
 public:
  explicit PhiP(double p) : p_(p) {
    if (p_ > 2.0) Jtab_ = LogMgfSq::get(p_);
  }
  int dim() const override { return 3; }
  bool in_domain(const double* t) const override {
    if (!(std::isfinite(t[0]) && std::isfinite(t[1]) && std::isfinite(t[2]))) return false;
    if (!(t[0] < 0.5 && t[2] < 1.0 / p_)) return false;
    if (p_ == 2.0) return c_of(t) < 0.5;
    return true;
  }
  double value(const double* t) const override {
    if (!in_domain(t)) return kInf;
    double g[3];
    return derivatives(t, g, nullptr);
  }
  double derivatives(const double* t, double* grad, double* hess) const override {
    double s = 1.0 - p_ * t[2], b = 1.0 - 2.0 * t[0];
    double S = 1.0 / s, B = 1.0 / b;
    double A = std::pow(s, -2.0 / p_);
    double t1 = t[1];
    double c = 0.5 * t1 * t1 * A * B;
    double J, J1, J2;
    jsq(c, &J, &J1, &J2);
    double c0 = t1 * t1 * A * B * B;
    double c1 = t1 * A * B;
    double c2 = t1 * t1 * A * B * S;
    grad[0] = B + J1 * c0;
    grad[1] = J1 * c1;
    grad[2] = S + J1 * c2;
    if (hess) {
      double c00 = 4.0 * t1 * t1 * A * B * B * B;
      double c01 = 2.0 * t1 * A * B * B;
      double c02 = 2.0 * t1 * t1 * A * B * B * S;
      double c11 = A * B;
      double c12 = 2.0 * t1 * A * B * S;
      double c22 = (2.0 + p_) * t1 * t1 * A * B * S * S;
      hess[0] = 2.0 * B * B + J2 * c0 * c0 + J1 * c00;
      hess[1] = hess[3] = J2 * c0 * c1 + J1 * c01;
      hess[2] = hess[6] = J2 * c0 * c2 + J1 * c02;
      hess[4] = J2 * c1 * c1 + J1 * c11;
      hess[5] = hess[7] = J2 * c1 * c2 + J1 * c12;
      hess[8] = p_ * S * S + J2 * c2 * c2 + J1 * c22;
    }
    return -std::log(s) / p_ - 0.5 * std::log(b) + J;
  }

 private:
  double c_of(const double* t) const {
    double s = 1.0 - p_ * t[2], b = 1.0 - 2.0 * t[0];
    return 0.5 * t[1] * t[1] * std::pow(s, -2.0 / p_) / b;
  }
  void jsq(double c, double* J, double* J1, double* J2) const {
    if (p_ == 2.0) {
      double q = 1.0 - 2.0 * c;
      *J = -0.5 * std::log(q);
      *J1 = 1.0 / q;
      *J2 = 2.0 / (q * q);
      return;
    }
    Jtab_->eval(c, J, J1, J2);
  }
  double p_;
  std::shared_ptr<const LogMgfSq> Jtab_;
};

// ---------------------------------------------------------------------------
// Phi_gamma(t0, t1) = -(1/2) log b + K(kappa), kappa = t1^2 / (2 b),
// K(kappa) = log E exp(kappa X^2), X ~ gamma.

class PhiGamma final : public Functional {
 public:
  explicit PhiGamma(const MeasureSpec& gamma) : gamma_(gamma) {
    require_sub_gaussian_gamma(gamma, "phi_gamma");
    if (gamma.kind == MeasureSpec::Kind::generalized_normal && !gamma.p.is_inf()) {
      heavy_p_ = gamma.p.value();
      return;
    }
    auto rule = QuadratureRule::for_measure(gamma, 64);
    w_ = rule.weights;
    x2_.resize(rule.nodes.size());
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) x2_[j] = rule.nodes[j] * rule.nodes[j];
  }
  int dim() const override { return 2; }
  bool in_domain(const double* t) const override {
    return std::isfinite(t[0]) && std::isfinite(t[1]) && t[0] < 0.5;
  }
  double value(const double* t) const override {
    if (!in_domain(t)) return kInf;
    double g[2];
    return derivatives(t, g, nullptr);
  }
  double derivatives(const double* t, double* grad, double* hess) const override {
    double b = 1.0 - 2.0 * t[0], B = 1.0 / b, t1 = t[1];
    double kap = 0.5 * t1 * t1 * B;
    double K, K1, K2;
    ksq(kap, &K, &K1, &K2);
    double k0 = t1 * t1 * B * B;
    double k1 = t1 * B;
    grad[0] = B + K1 * k0;
    grad[1] = K1 * k1;
    if (hess) {
      hess[0] = 2.0 * B * B + K2 * k0 * k0 + K1 * 4.0 * t1 * t1 * B * B * B;
      hess[1] = hess[2] = K2 * k0 * k1 + K1 * 2.0 * t1 * B * B;
      hess[3] = K2 * k1 * k1 + K1 * B;
    }
    return -0.5 * std::log(b) + K;
  }
  void ksq(double kap, double* K, double* K1, double* K2) const {
    if (heavy_p_ > 0.0) {
      double err;
      detail::log_mgf_sq_mu_p_direct(heavy_p_, kap, K, K1, K2, &err);
      return;
    }
    double m = -kInf;
    for (double v : x2_) m = std::max(m, kap * v);
    if (m < 0.0) m = 0.0;
    double z0 = 0.0, z1 = 0.0, z2 = 0.0;
    for (std::size_t j = 0; j < x2_.size(); ++j) {
      double e = w_[j] * std::exp(kap * x2_[j] - m);
      z0 += e;
      z1 += e * x2_[j];
      z2 += e * x2_[j] * x2_[j];
    }
    *K = m + std::log(z0);
    *K1 = z1 / z0;
    *K2 = std::max(0.0, z2 / z0 - (*K1) * (*K1));
  }

 private:
  MeasureSpec gamma_;
  double heavy_p_ = 0.0;  // generalized normal p > 2: direct quadrature
  std::vector<double> x2_, w_;
};

// ---------------------------------------------------------------------------
// Psi_{gamma,nu}(t) = integral log M_gamma(t u) nu(du).

class PsiGammaNu final : public Functional {
 public:
  // 400-node budget keeps composite panels short enough that the nearest
  // complex singularity of the integrand (for compact gamma, log M_gamma(tu)
  // has a pole at u = i pi / (t * halfwidth)) stays outside every panel's
  // Bernstein ellipse over the |t| <= 50 range the optimizers visit.
  PsiGammaNu(MeasureSpec gamma, const MeasureSpec& nu, int budget = 400)
      : gamma_(std::move(gamma)) {
    require_gamma_family(gamma_, "psi_gamma_nu");
    auto rule = QuadratureRule::for_measure(nu, budget);
    u_ = std::move(rule.nodes);
    w_ = std::move(rule.weights);
  }
  int dim() const override { return 1; }
  bool in_domain(const double* t) const override { return std::isfinite(t[0]); }
  double value(const double* t) const override {
    if (!in_domain(t)) return kInf;
    double g[1];
    return derivatives(t, g, nullptr);
  }
  double derivatives(const double* t, double* grad, double* hess) const override {
    double sum = 0.0, g = 0.0, h = 0.0;
    for (std::size_t j = 0; j < u_.size(); ++j) {
      double f, d1, d2;
      gamma_log_mgf(gamma_, t[0] * u_[j], &f, &d1, &d2);
      sum += w_[j] * f;
      g += w_[j] * u_[j] * d1;
      if (hess) h += w_[j] * u_[j] * u_[j] * d2;
    }
    grad[0] = g;
    if (hess) hess[0] = h;
    return sum;
  }

 private:
  MeasureSpec gamma_;
  std::vector<double> u_, w_;
};

void require_finite_p_gt1(PExponent p, const char* who) {
  if (p.is_inf() || p.value() <= 1.0)
    throw std::invalid_argument(std::string(who) + ": requires finite p in (1, inf)");
}

EvalResult eval2(const Functional& f, const double* t, bool want_gradient, double qerr) {
  EvalResult r;
  r.quadrature_error = qerr;
  if (!f.in_domain(t)) {
    r.value = kInf;
    return r;
  }
  std::vector<double> g(static_cast<std::size_t>(f.dim()));
  r.value = f.derivatives(t, g.data(), nullptr);
  if (!std::isfinite(r.value)) {
    r.value = kInf;
    return r;
  }
  if (want_gradient) r.gradient = std::move(g);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points.

EvalResult lambda_p(PExponent p, MgfPoint2 t, bool want_gradient) {
  require_finite_p_gt1(p, "lambda_p");
  LambdaP f(p.value());
  double tv[2] = {t.t1, t.t2};
  return eval2(f, tv, want_gradient, p.value() == 2.0 ? 0.0 : kTableErr);
}

EvalResult psi_p_nu(PExponent p, const MeasureSpec& nu, MgfPoint2 t, bool want_gradient) {
  require_finite_p_gt1(p, "psi_p_nu");
  double tv[2] = {t.t1, t.t2};
  PsiPNu f(p.value(), nu, 64);
  EvalResult r = eval2(f, tv, want_gradient, kTableErr);
  if (std::isfinite(r.value) &&
      (nu.kind == MeasureSpec::Kind::generalized_normal ||
       nu.kind == MeasureSpec::Kind::uniform_interval)) {
    PsiPNu fine(p.value(), nu, 128);
    r.quadrature_error = std::fabs(fine.value(tv) - r.value) + kTableErr;
  }
  return r;
}

EvalResult phi_p(PExponent p, MgfPoint3 t, bool want_gradient) {
  if (p.is_inf() || p.value() < 2.0)
    throw std::invalid_argument("phi_p: requires finite p in [2, inf)");
  PhiP f(p.value());
  double tv[3] = {t.t0, t.t1, t.t2};
  return eval2(f, tv, want_gradient, p.value() == 2.0 ? 0.0 : kTableErr);
}

EvalResult phi_gamma(const MeasureSpec& gamma, double t0, double t1, bool want_gradient) {
  PhiGamma f(gamma);
  double tv[2] = {t0, t1};
  return eval2(f, tv, want_gradient, kTableErr);
}

EvalResult psi_gamma_nu(const MeasureSpec& gamma, const MeasureSpec& nu, double t,
                        bool want_gradient) {
  PsiGammaNu f(gamma, nu);
  double tv[1] = {t};
  EvalResult r = eval2(f, tv, want_gradient, kTableErr);
  if (std::isfinite(r.value) &&
      (nu.kind == MeasureSpec::Kind::generalized_normal ||
       nu.kind == MeasureSpec::Kind::uniform_interval)) {
    PsiGammaNu fine(gamma, nu, 128);
    r.quadrature_error = std::fabs(fine.value(tv) - r.value) + kTableErr;
  }
  return r;
}

std::vector<double> gradient_lambda_p(PExponent p, MgfPoint2 t) {
  auto r = lambda_p(p, t, true);
  if (!r.gradient) throw std::domain_error("gradient_lambda_p: point outside effective domain");
  return *r.gradient;
}

std::vector<double> gradient_psi_p_nu(PExponent p, const MeasureSpec& nu, MgfPoint2 t) {
  auto r = psi_p_nu(p, nu, t, true);
  if (!r.gradient) throw std::domain_error("gradient_psi_p_nu: point outside effective domain");
  return *r.gradient;
}

std::vector<double> gradient_phi_p(PExponent p, MgfPoint3 t) {
  auto r = phi_p(p, t, true);
  if (!r.gradient) throw std::domain_error("gradient_phi_p: point outside effective domain");
  return *r.gradient;
}

void log_mgf_mu_p_derivs(PExponent p, double t, double* f, double* d1, double* d2) {
  if (p.is_inf()) {
    *f = detail::logsinhc(t);
    *d1 = detail::logsinhc_d1(t);
    *d2 = detail::logsinhc_d2(t);
    return;
  }
  double pv = p.value();
  if (pv == 1.0) {
    if (std::fabs(t) >= 1.0) throw std::domain_error("log_mgf_mu_p_derivs: p = 1 needs |t| < 1");
    double q = 1.0 - t * t;
    *f = -std::log(q);
    *d1 = 2.0 * t / q;
    *d2 = (2.0 + 2.0 * t * t) / (q * q);
    return;
  }
  LogMgf::get(pv)->eval(t, f, d1, d2);
}

void log_mgf_sq_mu_p_derivs(PExponent p, double c, double* f, double* d1, double* d2) {
  if (p.is_inf() || p.value() < 2.0)
    throw std::invalid_argument("log_mgf_sq_mu_p_derivs: requires finite p >= 2");
  if (p.value() == 2.0) {
    if (c >= 0.5) throw std::domain_error("log_mgf_sq_mu_p_derivs: p = 2 needs c < 1/2");
    double q = 1.0 - 2.0 * c;
    *f = -0.5 * std::log(q);
    *d1 = 1.0 / q;
    *d2 = 2.0 / (q * q);
    return;
  }
  double err;
  detail::log_mgf_sq_mu_p_direct(p.value(), c, f, d1, d2, &err);
}

void measure_log_mgf_derivs(const MeasureSpec& m, double s, double* f, double* d1, double* d2) {
  require_gamma_family(m, "measure_log_mgf_derivs");
  gamma_log_mgf(m, s, f, d1, d2);
}

FunctionalPtr make_lambda_p(PExponent p) {
  require_finite_p_gt1(p, "make_lambda_p");
  return std::make_unique<LambdaP>(p.value());
}

FunctionalPtr make_psi_p_nu(PExponent p, MeasureSpec nu) {
  require_finite_p_gt1(p, "make_psi_p_nu");
  return std::make_unique<PsiPNu>(p.value(), nu);
}

FunctionalPtr make_phi_p(PExponent p) {
  if (p.is_inf() || p.value() < 2.0)
    throw std::invalid_argument("make_phi_p: requires finite p in [2, inf)");
  return std::make_unique<PhiP>(p.value());
}

FunctionalPtr make_phi_gamma(MeasureSpec gamma) {
  return std::make_unique<PhiGamma>(gamma);
}

FunctionalPtr make_psi_gamma_nu(MeasureSpec gamma, MeasureSpec nu) {
  return std::make_unique<PsiGammaNu>(std::move(gamma), nu);
}

}  // namespace lpldp
