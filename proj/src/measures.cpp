#include "lpldp/measures.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "lpldp/detail/quad.hpp"

namespace lpldp {

namespace {

std::atomic<bool> g_corrupt_gh{false};

double sq(double x) { return x * x; }

}  // namespace

void corrupt_gauss_hermite_for_testing(bool enabled) { g_corrupt_gh.store(enabled); }

// ---------------------------------------------------------------------------
// Normal CDF / quantile.

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

// Rational approximation of Phi^{-1} (Wichura's PPND16), |error| ~ 1e-16.
double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("normal_quantile: u must lie in (0,1)");
  double q = u - 0.5;
  if (std::fabs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    double num =
        q * (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                   6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
               1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    double den = (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                       3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                     5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                   4.2313330701600911252e+1) * r + 1.0);
    return num / den;
  }
  double r = q < 0.0 ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    double num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                       2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                     3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                   4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    double den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                       1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                     6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                   2.05319162663775882187e+0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                       1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                     2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                   5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    double den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                       1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                     1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                   5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

// ---------------------------------------------------------------------------
// mu_p basics.

double log_norm_const_mu_p(PExponent p) {
  if (p.is_inf()) return std::log(2.0);
  double pv = p.value();
  return std::log(2.0) + std::log(pv) / pv + std::lgamma(1.0 + 1.0 / pv);
}

double density_mu_p(PExponent p, double y) {
  if (p.is_inf()) return std::fabs(y) <= 1.0 ? 0.5 : 0.0;
  double pv = p.value();
  return std::exp(-std::pow(std::fabs(y), pv) / pv - log_norm_const_mu_p(p));
}

double cdf_mu_p(PExponent p, double y) {
  if (p.is_inf()) return std::clamp((y + 1.0) / 2.0, 0.0, 1.0);
  double pv = p.value();
  double z = std::pow(std::fabs(y), pv) / pv;
  double half_tail = 0.5 * boost::math::gamma_q(1.0 / pv, z);
  return y >= 0.0 ? 1.0 - half_tail : half_tail;
}

double mgf_mu_p(PExponent p, double t) {
  if (p.is_inf()) return detail::logsinhc(t);
  double pv = p.value();
  if (pv == 2.0) return 0.5 * t * t;
  if (pv == 1.0) {
    if (std::fabs(t) >= 1.0) return kInf;
    return -std::log1p(-t * t);
  }
  double f, d1, d2, err;
  detail::log_mgf_mu_p_direct(pv, t, &f, &d1, &d2, &err);
  return f;
}

double quantile_mu_p(PExponent p, double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u must lie in (0,1)");
  if (p.is_inf()) return 2.0 * u - 1.0;
  double pv = p.value();
  if (pv == 2.0) return normal_quantile(u);
  if (pv == 1.0) {
    if (u == 0.5) return 0.0;
    return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
  }
  double m = 2.0 * u - 1.0;
  if (m == 0.0) return 0.0;
  double x = boost::math::gamma_p_inv(1.0 / pv, std::fabs(m));
  double y = std::pow(pv * x, 1.0 / pv);
  return m > 0.0 ? y : -y;
}

double lp_norm(const std::vector<double>& x, PExponent p) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  if (p.is_inf() || m == 0.0) return m;
  double pv = p.value();
  double s = 0.0;
  for (double v : x) s += std::pow(std::fabs(v) / m, pv);
  return m * std::pow(s, 1.0 / pv);
}

// ---------------------------------------------------------------------------
// Direct tilted-integral quadratures (shared with the mgf module).

namespace detail {

namespace {

// Expand delta until g(anchor + dir*delta) < gmax - 60 (integrand ~ e^-60).
template <typename G>
double expand_cutoff(const G& g, double anchor, double dir, double gmax, double step0) {
  double d = step0 > 0.0 && std::isfinite(step0) ? step0 : 1.0;
  for (int i = 0; i < 400; ++i) {
    if (g(anchor + dir * d) - gmax < -60.0) return d;
    d *= 2.0;
  }
  return d;
}

}  // namespace

void log_mgf_mu_p_direct(double p, double t, double* f, double* d1, double* d2, double* err) {
  using boost::math::quadrature::gauss_kronrod;
  const double logC = std::log(2.0) + std::log(p) / p + std::lgamma(1.0 + 1.0 / p);
  auto h = [&](double y) { return t * y - std::pow(std::fabs(y), p) / p; };
  double ystar = t == 0.0 ? 0.0 : std::copysign(std::pow(std::fabs(t), 1.0 / (p - 1.0)), t);
  double hmax = h(ystar);
  if (!std::isfinite(ystar) || !std::isfinite(hmax)) {
    // The tilted maximum itself overflows double range; report +inf.
    *f = kInf;
    *d1 = *d2 = 0.0;
    *err = 0.0;
    return;
  }
  // Curvature scale at the mode (p < 2 has a cusp at 0; fall back to 1).
  double hpp = (p - 1.0) * std::pow(std::fabs(ystar), p - 2.0);
  double sigma = (std::isfinite(hpp) && hpp > 1e-12) ? 1.0 / std::sqrt(hpp) : 1.0;
  double dhi = expand_cutoff(h, ystar, +1.0, hmax, sigma);
  double dlo = expand_cutoff(h, ystar, -1.0, hmax, sigma);
  double lo = ystar - dlo, hi = ystar + dhi;
  double e0 = 0, e1 = 0, e2 = 0;
  auto w0 = [&](double y) { return std::exp(h(y) - hmax); };
  auto w1 = [&](double y) { return y * std::exp(h(y) - hmax); };
  auto w2 = [&](double y) { return y * y * std::exp(h(y) - hmax); };
  double i0 = gauss_kronrod<double, 15>::integrate(w0, lo, hi, 12, 1e-11, &e0);
  double i1 = gauss_kronrod<double, 15>::integrate(w1, lo, hi, 12, 1e-11, &e1);
  double i2 = gauss_kronrod<double, 15>::integrate(w2, lo, hi, 12, 1e-11, &e2);
  *f = hmax + std::log(i0) - logC;
  *d1 = i1 / i0;
  *d2 = std::max(0.0, i2 / i0 - sq(i1 / i0));
  *err = (e0 + e1 + e2) / std::max(i0, 1e-300);
}

void log_mgf_sq_mu_p_direct(double p, double c, double* f, double* d1, double* d2, double* err) {
  using boost::math::quadrature::gauss_kronrod;
  const double logC = std::log(2.0) + std::log(p) / p + std::lgamma(1.0 + 1.0 / p);
  auto g = [&](double y) { return c * y * y - std::pow(y, p) / p; };
  double ystar = c <= 0.0 ? 0.0 : std::pow(2.0 * c, 1.0 / (p - 2.0));
  double gmax = g(ystar);
  if (!std::isfinite(ystar) || !std::isfinite(gmax)) {
    *f = kInf;
    *d1 = *d2 = 0.0;
    *err = 0.0;
    return;
  }
  double gpp = std::fabs(2.0 * c - (p - 1.0) * std::pow(ystar, p - 2.0));
  double sigma = (std::isfinite(gpp) && gpp > 1e-12) ? 1.0 / std::sqrt(gpp) : 1.0;
  double dhi = expand_cutoff(g, ystar, +1.0, gmax, sigma);
  double lo = 0.0, hi = ystar + dhi;
  double e0 = 0, e1 = 0, e2 = 0;
  auto w0 = [&](double y) { return std::exp(g(y) - gmax); };
  auto w1 = [&](double y) { return y * y * std::exp(g(y) - gmax); };
  auto w2 = [&](double y) { return y * y * y * y * std::exp(g(y) - gmax); };
  double i0 = gauss_kronrod<double, 15>::integrate(w0, lo, hi, 12, 1e-11, &e0);
  double i1 = gauss_kronrod<double, 15>::integrate(w1, lo, hi, 12, 1e-11, &e1);
  double i2 = gauss_kronrod<double, 15>::integrate(w2, lo, hi, 12, 1e-11, &e2);
  *f = gmax + std::log(2.0 * i0) - logC;
  *d1 = i1 / i0;
  *d2 = std::max(0.0, i2 / i0 - sq(i1 / i0));
  *err = (e0 + e1 + e2) / std::max(i0, 1e-300);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// MeasureSpec.

MeasureSpec MeasureSpec::generalized_normal(PExponent p) {
  MeasureSpec m;
  m.kind = Kind::generalized_normal;
  m.p = p;
  return m;
}

MeasureSpec MeasureSpec::uniform_interval(double a, double b) {
  if (!(std::isfinite(a) && std::isfinite(b) && a < b))
    throw std::invalid_argument("uniform_interval: need finite a < b");
  MeasureSpec m;
  m.kind = Kind::uniform_interval;
  m.a = a;
  m.b = b;
  return m;
}

MeasureSpec MeasureSpec::dirac(double point) {
  if (!std::isfinite(point)) throw std::invalid_argument("dirac: point must be finite");
  MeasureSpec m;
  m.kind = Kind::dirac;
  m.point = point;
  return m;
}

MeasureSpec MeasureSpec::grid_discrete(std::vector<double> points, std::vector<double> weights) {
  if (points.empty() || points.size() != weights.size())
    throw std::invalid_argument("grid_discrete: points/weights must be nonempty, equal length");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) throw std::invalid_argument("grid_discrete: non-finite point");
    if (i > 0 && !(points[i] > points[i - 1]))
      throw std::invalid_argument("grid_discrete: points must be strictly increasing");
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("grid_discrete: negative weight");
  }
  double s = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(std::fabs(s - 1.0) <= 1e-9))
    throw std::invalid_argument("grid_discrete: weights must sum to 1");
  for (auto& w : weights) w /= s;
  MeasureSpec m;
  m.kind = Kind::grid_discrete;
  m.points = std::move(points);
  m.weights = std::move(weights);
  return m;
}

MeasureSpec MeasureSpec::empirical(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("empirical: samples must be nonempty");
  for (double s : samples)
    if (!std::isfinite(s)) throw std::invalid_argument("empirical: non-finite sample");
  std::sort(samples.begin(), samples.end());
  MeasureSpec m;
  m.kind = Kind::empirical;
  m.samples = std::move(samples);
  return m;
}

double MeasureSpec::abs_moment(double r) const {
  if (!(r >= 0.0)) throw std::domain_error("abs_moment: r must be >= 0");
  if (r == 0.0) return 1.0;
  switch (kind) {
    case Kind::generalized_normal: {
      if (p.is_inf()) return 1.0 / (r + 1.0);
      double pv = p.value();
      return std::exp((r / pv) * std::log(pv) + std::lgamma((r + 1.0) / pv) -
                      std::lgamma(1.0 / pv));
    }
    case Kind::uniform_interval: {
      auto G = [&](double x) {
        return std::copysign(std::pow(std::fabs(x), r + 1.0), x) / (r + 1.0);
      };
      return (G(b) - G(a)) / (b - a);
    }
    case Kind::dirac:
      return std::pow(std::fabs(point), r);
    case Kind::grid_discrete: {
      double s = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i)
        s += weights[i] * std::pow(std::fabs(points[i]), r);
      return s;
    }
    case Kind::empirical: {
      double s = 0.0;
      for (double x : samples) s += std::pow(std::fabs(x), r);
      return s / static_cast<double>(samples.size());
    }
  }
  throw std::logic_error("abs_moment: bad kind");
}

double MeasureSpec::mean() const {
  switch (kind) {
    case Kind::generalized_normal:
      return 0.0;
    case Kind::uniform_interval:
      return 0.5 * (a + b);
    case Kind::dirac:
      return point;
    case Kind::grid_discrete: {
      double s = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * points[i];
      return s;
    }
    case Kind::empirical:
      return std::accumulate(samples.begin(), samples.end(), 0.0) /
             static_cast<double>(samples.size());
  }
  throw std::logic_error("mean: bad kind");
}

double MeasureSpec::second_moment() const {
  if (kind == Kind::uniform_interval) return (a * a + a * b + b * b) / 3.0;
  return abs_moment(2.0);
}

double MeasureSpec::support_radius() const {
  switch (kind) {
    case Kind::generalized_normal:
      return p.is_inf() ? 1.0 : kInf;
    case Kind::uniform_interval:
      return std::max(std::fabs(a), std::fabs(b));
    case Kind::dirac:
      return std::fabs(point);
    case Kind::grid_discrete:
      return std::max(std::fabs(points.front()), std::fabs(points.back()));
    case Kind::empirical:
      return std::max(std::fabs(samples.front()), std::fabs(samples.back()));
  }
  throw std::logic_error("support_radius: bad kind");
}

double MeasureSpec::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u must lie in (0,1)");
  switch (kind) {
    case Kind::generalized_normal:
      return quantile_mu_p(p, u);
    case Kind::uniform_interval:
      return a + u * (b - a);
    case Kind::dirac:
      return point;
    case Kind::grid_discrete: {
      // Left-continuous generalized inverse of the step CDF.
      double cum = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        cum += weights[i];
        if (cum >= u * (1.0 - 1e-14)) return points[i];
      }
      return points.back();
    }
    case Kind::empirical: {
      auto nsz = static_cast<double>(samples.size());
      auto idx = static_cast<std::size_t>(std::ceil(u * nsz)) - 1;
      if (idx >= samples.size()) idx = samples.size() - 1;
      return samples[idx];
    }
  }
  throw std::logic_error("quantile: bad kind");
}

std::string MeasureSpec::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case Kind::generalized_normal:
      j["kind"] = "generalized_normal";
      if (p.is_inf())
        j["params"]["p"] = "inf";
      else
        j["params"]["p"] = p.value();
      break;
    case Kind::uniform_interval:
      j["kind"] = "uniform_interval";
      j["params"]["a"] = a;
      j["params"]["b"] = b;
      break;
    case Kind::dirac:
      j["kind"] = "dirac";
      j["params"]["point"] = point;
      break;
    case Kind::grid_discrete:
      j["kind"] = "grid_discrete";
      j["params"]["points"] = points;
      j["params"]["weights"] = weights;
      break;
    case Kind::empirical:
      j["kind"] = "empirical";
      j["params"]["samples"] = samples;
      break;
  }
  return j.dump();
}

MeasureSpec MeasureSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("measure JSON parse error: ") + e.what());
  }
  try {
    std::string kind = j.at("kind").get<std::string>();
    const auto& prm = j.at("params");
    if (kind == "generalized_normal") {
      const auto& pj = prm.at("p");
      if (pj.is_string()) {
        if (pj.get<std::string>() != "inf")
          throw std::invalid_argument("measure JSON: p string must be \"inf\"");
        return generalized_normal(PExponent::infinity());
      }
      return generalized_normal(PExponent(pj.get<double>()));
    }
    if (kind == "uniform_interval")
      return uniform_interval(prm.at("a").get<double>(), prm.at("b").get<double>());
    if (kind == "dirac") return dirac(prm.at("point").get<double>());
    if (kind == "grid_discrete")
      return grid_discrete(prm.at("points").get<std::vector<double>>(),
                           prm.at("weights").get<std::vector<double>>());
    if (kind == "empirical") return empirical(prm.at("samples").get<std::vector<double>>());
    throw std::invalid_argument("measure JSON: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("measure JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Quadrature rules.

double QuadratureRule::integrate(const std::vector<double>& fvals) const {
  if (fvals.size() != nodes.size())
    throw std::invalid_argument("QuadratureRule::integrate: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < fvals.size(); ++i) s += weights[i] * fvals[i];
  return s;
}

QuadratureRule QuadratureRule::gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  // Golub-Welsch on the probabilists' Hermite Jacobi matrix (offdiag sqrt(k)).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double v = std::sqrt(static_cast<double>(k));
    J(k - 1, k) = v;
    J(k, k - 1) = v;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    rule.weights[i] = sq(es.eigenvectors()(0, i));
    wsum += rule.weights[i];
  }
  for (auto& w : rule.weights) w /= wsum;
  if (g_corrupt_gh.load()) rule.weights[n / 2] *= 1.5;
  rule.target = MeasureSpec::generalized_normal(PExponent(2.0));
  return rule;
}

namespace {

// Composite Gauss-Legendre panels of `pts` points against density f on [a,b].
template <int Pts, typename F>
void gl_panels(double a, double b, int panels, const F& density, std::vector<double>* nodes,
               std::vector<double>* weights) {
  using G = boost::math::quadrature::gauss<double, Pts>;
  const auto& half_x = G::abscissa();  // nonnegative abscissae
  const auto& half_w = G::weights();
  std::vector<double> xs, ws;
  for (std::size_t i = 0; i < half_x.size(); ++i) {
    if (half_x[i] > 0.0) {
      xs.push_back(-half_x[i]);
      ws.push_back(half_w[i]);
    }
  }
  std::reverse(xs.begin(), xs.end());
  std::reverse(ws.begin(), ws.end());
  for (std::size_t i = 0; i < half_x.size(); ++i) {
    xs.push_back(half_x[i]);
    ws.push_back(half_w[i]);
  }
  double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    double lo = a + k * h;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double x = lo + 0.5 * h * (xs[i] + 1.0);
      nodes->push_back(x);
      weights->push_back(0.5 * h * ws[i] * density(x));
    }
  }
}

}  // namespace

QuadratureRule QuadratureRule::for_measure(const MeasureSpec& m, int n) {
  QuadratureRule rule;
  rule.target = m;
  switch (m.kind) {
    case MeasureSpec::Kind::dirac:
      rule.nodes = {m.point};
      rule.weights = {1.0};
      return rule;
    case MeasureSpec::Kind::grid_discrete:
      rule.nodes = m.points;
      rule.weights = m.weights;
      return rule;
    case MeasureSpec::Kind::empirical:
      rule.nodes = m.samples;
      rule.weights.assign(m.samples.size(), 1.0 / static_cast<double>(m.samples.size()));
      return rule;
    case MeasureSpec::Kind::uniform_interval: {
      int panels = std::max(2, n / 20);
      double len = m.b - m.a;
      gl_panels<20>(m.a, m.b, panels, [&](double) { return 1.0 / len; }, &rule.nodes,
                    &rule.weights);
      return rule;
    }
    case MeasureSpec::Kind::generalized_normal: {
      if (m.p.is_inf()) {
        int panels = std::max(2, n / 20);
        gl_panels<20>(-1.0, 1.0, panels, [](double) { return 0.5; }, &rule.nodes, &rule.weights);
        return rule;
      }
      double pv = m.p.value();
      if (pv == 2.0) return gauss_hermite(std::max(n, 8));
      // Symmetric composite panels out to negligible tail mass, weighted by
      // the density; total weight renormalized to 1.
      double xcut = boost::math::gamma_q_inv(1.0 / pv, 2e-15);
      double ymax = std::pow(pv * xcut, 1.0 / pv);
      int panels = std::max(8, n / 8);
      gl_panels<20>(-ymax, ymax, panels,
                    [&](double y) { return density_mu_p(m.p, y); }, &rule.nodes, &rule.weights);
      double s = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
      for (auto& w : rule.weights) w /= s;
      return rule;
    }
  }
  throw std::logic_error("for_measure: bad kind");
}

// ---------------------------------------------------------------------------
// Sampling.

RngEngine make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                   static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return RngEngine(ss);
}

double sample_mu_p(PExponent p, RngEngine& eng) {
  if (p.is_inf()) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return u(eng);
  }
  double pv = p.value();
  std::gamma_distribution<double> gamma(1.0 / pv, 1.0);
  double g = gamma(eng);
  double mag = std::pow(pv * g, 1.0 / pv);
  return (eng() & 1u) ? mag : -mag;
}

Direction sample_sphere(int n, RngEngine& eng) {
  if (n < 1) throw std::invalid_argument("sample_sphere: n must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Direction d;
  d.coords.resize(n);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& c : d.coords) {
      c = gauss(eng);
      norm2 += c * c;
    }
  } while (norm2 == 0.0);
  double inv = 1.0 / std::sqrt(norm2);
  for (auto& c : d.coords) c *= inv;
  return d;
}

BallSample sample_ball(PExponent p, int n, RngEngine& eng) {
  if (n < 1) throw std::invalid_argument("sample_ball: n must be >= 1");
  BallSample s;
  s.p = p;
  s.coords.resize(n);
  for (auto& c : s.coords) c = sample_mu_p(p, eng);
  double norm = lp_norm(s.coords, p);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double u = uni(eng);
  while (u <= 0.0) u = uni(eng);
  double r = std::exp(std::log(u) / n) / norm;
  for (auto& c : s.coords) c *= r;
  return s;
}

}  // namespace lpldp
