#include "lpldp/legendre.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "lpldp/measures.hpp"

namespace lpldp {

namespace {

constexpr double kGradTol = 1e-8;
constexpr int kMaxIter = 200;
constexpr double kBracketLo = 1e-6;
constexpr double kBracketHi = 1e6;

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct FullEval {
  double val;     // <tau, t> - f(t)
  VectorXd resid; // tau - grad f(t)
  MatrixXd hess;  // Hessian of f at t
};

}  // namespace

LegendreResult conjugate(const Functional& f, const std::vector<double>& tau,
                         const std::vector<double>* start) {
  const int d = f.dim();
  if (static_cast<int>(tau.size()) != d)
    throw std::invalid_argument("conjugate: tau dimension mismatch");
  VectorXd tv = Eigen::Map<const VectorXd>(tau.data(), d);

  VectorXd t = VectorXd::Zero(d);
  if (start && static_cast<int>(start->size()) == d && f.in_domain(start->data())) {
    t = Eigen::Map<const VectorXd>(start->data(), d);
  }
  if (!f.in_domain(t.data())) throw std::invalid_argument("conjugate: 0 not in domain");

  std::vector<double> gbuf(d), hbuf(static_cast<std::size_t>(d) * d);
  auto eval_full = [&](const VectorXd& x) {
    FullEval e;
    double fv = f.derivatives(x.data(), gbuf.data(), hbuf.data());
    e.val = tv.dot(x) - fv;
    e.resid = tv - Eigen::Map<VectorXd>(gbuf.data(), d);
    e.hess = Eigen::Map<MatrixXd>(hbuf.data(), d, d);
    return e;
  };
  auto eval_val = [&](const VectorXd& x) -> double {
    if (!f.in_domain(x.data())) return -kInf;
    double fv = f.value(x.data());
    if (!std::isfinite(fv)) return -kInf;
    return tv.dot(x) - fv;
  };

  auto result_at = [&](const VectorXd& x, double val, double gn, LegendreResult::Status st) {
    LegendreResult r;
    r.value = st == LegendreResult::Status::infinite ? kInf : val;
    r.argmax.assign(x.data(), x.data() + d);
    r.grad_norm = gn;
    r.status = st;
    return r;
  };

  int stall = 0;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    FullEval e = eval_full(t);
    double gn = e.resid.norm();
    if (!std::isfinite(e.val) || !std::isfinite(gn))
      throw SolverError("conjugate: non-finite objective inside domain",
                        std::vector<double>(t.data(), t.data() + d));
    if (gn < kGradTol) return result_at(t, e.val, gn, LegendreResult::Status::converged);

    // Newton direction on the concave objective; gradient fallback when the
    // Hessian is unusable, with a growth factor so flat rays still escape.
    VectorXd dir;
    Eigen::LDLT<MatrixXd> ldlt(e.hess);
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
      dir = ldlt.solve(e.resid);
      ok = dir.allFinite() && e.resid.dot(dir) > 0.0;
    }
    if (!ok) dir = e.resid * (1.0 + t.norm());

    double alpha = 1.0;
    int wall = 0;
    VectorXd cand = t + alpha * dir;
    while (wall < 120 && !f.in_domain(cand.data())) {
      alpha *= 0.5;
      ++wall;
      cand = t + alpha * dir;
    }
    double slope = e.resid.dot(dir);
    double gnew = -kInf;
    int ls = 0;
    for (; ls < 60; ++ls) {
      cand = t + alpha * dir;
      gnew = eval_val(cand);
      if (gnew >= e.val + 1e-4 * alpha * slope) break;
      alpha *= 0.5;
    }
    if (ls == 60) {
      // No ascent step exists numerically: the supremum is being approached
      // along a boundary / infinite ray with vanishing increments.
      if (wall > 0 || t.norm() > 1e6 || gn < 1e-4)
        return result_at(t, e.val, gn, LegendreResult::Status::boundary_divergent);
      throw SolverError("conjugate: line search failed",
                        std::vector<double>(t.data(), t.data() + d));
    }
    t = cand;

    if (gnew > 1e14) return result_at(t, gnew, gn, LegendreResult::Status::infinite);
    if (t.norm() > 1e10) {
      // Objective still rising along the escape direction => sup is +inf.
      double fres = f.derivatives(t.data(), gbuf.data(), nullptr);
      (void)fres;
      VectorXd r2 = tv - Eigen::Map<VectorXd>(gbuf.data(), d);
      if (r2.dot(dir) / dir.norm() > 0.0)
        return result_at(t, gnew, gn, LegendreResult::Status::infinite);
      return result_at(t, gnew, gn, LegendreResult::Status::boundary_divergent);
    }
    if (std::fabs(gnew - e.val) < 1e-12 * (1.0 + std::fabs(gnew)))
      ++stall;
    else
      stall = 0;
    if (stall >= 3) {
      FullEval e2 = eval_full(t);
      if (e2.resid.norm() < kGradTol)
        return result_at(t, e2.val, e2.resid.norm(), LegendreResult::Status::converged);
      return result_at(t, e2.val, e2.resid.norm(), LegendreResult::Status::boundary_divergent);
    }
  }
  throw SolverError("conjugate: iteration budget exhausted",
                    std::vector<double>(t.data(), t.data() + d));
}

double biconjugate(const Functional& f, const std::vector<double>& t) {
  const int d = f.dim();
  if (static_cast<int>(t.size()) != d)
    throw std::invalid_argument("biconjugate: t dimension mismatch");
  if (!f.in_domain(t.data())) throw std::domain_error("biconjugate: t outside domain");
  std::vector<double> tau(static_cast<std::size_t>(d));
  f.derivatives(t.data(), tau.data(), nullptr);
  LegendreResult star = conjugate(f, tau, &t);
  double dot = 0.0;
  for (int i = 0; i < d; ++i) dot += t[i] * tau[i];
  return dot - star.value;
}

// ---------------------------------------------------------------------------
// Contraction manifolds.

namespace {

// tau(theta), its Jacobian (dim x nfree) and second derivatives, for the
// positive free parameters theta.
struct Manifold {
  ContractionSpec spec;
  int dim = 2, nfree = 1;

  explicit Manifold(const ContractionSpec& s) : spec(s) {
    switch (s.kind) {
      case ContractionSpec::Kind::annealed3:
        dim = 3;
        nfree = 2;
        break;
      case ContractionSpec::Kind::quenched2:
      case ContractionSpec::Kind::product2:
        dim = 2;
        nfree = 1;
        break;
    }
  }

  std::vector<double> tau(const double* th) const {
    const double w = spec.w, p = spec.p;
    switch (spec.kind) {
      case ContractionSpec::Kind::quenched2:
        return {w * std::pow(th[0], 1.0 / p), th[0]};
      case ContractionSpec::Kind::product2:
        return {th[0], w * std::sqrt(th[0])};
      case ContractionSpec::Kind::annealed3:
        return {th[0], w * std::sqrt(th[0]) * std::pow(th[1], 1.0 / p), th[1]};
    }
    return {};
  }

  // J(i, k) = d tau_i / d theta_k, row-major dim x nfree.
  void jacobian(const double* th, double* J) const {
    const double w = spec.w, p = spec.p;
    switch (spec.kind) {
      case ContractionSpec::Kind::quenched2:
        J[0] = (w / p) * std::pow(th[0], 1.0 / p - 1.0);
        J[1] = 1.0;
        return;
      case ContractionSpec::Kind::product2:
        J[0] = 1.0;
        J[1] = 0.5 * w / std::sqrt(th[0]);
        return;
      case ContractionSpec::Kind::annealed3: {
        double x = th[0], y = th[1];
        J[0] = 1.0;
        J[1] = 0.0;
        J[2] = 0.5 * w * std::pow(y, 1.0 / p) / std::sqrt(x);
        J[3] = (w / p) * std::sqrt(x) * std::pow(y, 1.0 / p - 1.0);
        J[4] = 0.0;
        J[5] = 1.0;
        return;
      }
    }
  }

  // hess_k = d^2 tau_i / d theta^2 contracted against weights lambda_i:
  // returns sum_i lambda_i * d2 tau_i (nfree x nfree, row-major).
  void weighted_second(const double* th, const double* lambda, double* out) const {
    const double w = spec.w, p = spec.p;
    switch (spec.kind) {
      case ContractionSpec::Kind::quenched2:
        out[0] = lambda[0] * (w / p) * (1.0 / p - 1.0) * std::pow(th[0], 1.0 / p - 2.0);
        return;
      case ContractionSpec::Kind::product2:
        out[0] = lambda[1] * (-0.25) * w * std::pow(th[0], -1.5);
        return;
      case ContractionSpec::Kind::annealed3: {
        double x = th[0], y = th[1];
        double dxx = -0.25 * w * std::pow(x, -1.5) * std::pow(y, 1.0 / p);
        double dxy = (0.5 * w / p) * std::pow(x, -0.5) * std::pow(y, 1.0 / p - 1.0);
        double dyy = (w / p) * (1.0 / p - 1.0) * std::sqrt(x) * std::pow(y, 1.0 / p - 2.0);
        out[0] = lambda[1] * dxx;
        out[1] = out[2] = lambda[1] * dxy;
        out[3] = lambda[1] * dyy;
        return;
      }
    }
  }
};

struct ConjOutcome {
  bool ok = false;        // a classified LegendreResult was produced
  LegendreResult res;
};

ConjOutcome safe_conjugate(const Functional& f, const std::vector<double>& tau,
                           const std::vector<double>* warm) {
  ConjOutcome o;
  try {
    o.res = conjugate(f, tau, warm);
    o.ok = true;
  } catch (const SolverError&) {
    o.ok = false;
  }
  return o;
}

}  // namespace

LegendreResult rate_infimum(const Functional& f, const ContractionSpec& spec,
                            InfimumDiagnostics* diag) {
  Manifold M(spec);
  if (M.dim != f.dim()) throw std::invalid_argument("rate_infimum: functional/manifold mismatch");
  const int nf = M.nfree;

  std::vector<double> warm;  // inner warm start
  // Evaluate F(theta) = f*(tau(theta)); +inf for unclassified failures.
  auto F = [&](const double* th, LegendreResult* out) -> double {
    auto tau = M.tau(th);
    const std::vector<double>* ws = warm.empty() ? nullptr : &warm;
    ConjOutcome o = safe_conjugate(f, tau, ws);
    if (!o.ok) return kInf;
    if (out) *out = o.res;
    if (o.res.status == LegendreResult::Status::infinite) return kInf;
    warm = o.res.argmax;
    return o.res.value;
  };

  // --- stage 1: coarse log-spaced scan of the free parameters.
  std::vector<std::vector<double>> grid;
  if (nf == 1) {
    for (int i = 0; i < 49; ++i) {
      double lx = std::log(kBracketLo) +
                  (std::log(kBracketHi) - std::log(kBracketLo)) * i / 48.0;
      grid.push_back({std::exp(lx)});
    }
  } else {
    for (int i = 0; i < 13; ++i)
      for (int j = 0; j < 13; ++j) {
        double lx = -6.0 * std::log(10.0) + 12.0 * std::log(10.0) * i / 12.0;
        double ly = -6.0 * std::log(10.0) + 12.0 * std::log(10.0) * j / 12.0;
        grid.push_back({std::exp(lx), std::exp(ly)});
      }
  }
  double best_val = kInf;
  int best_idx = -1;
  LegendreResult best_res;
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    LegendreResult r;
    double v = F(grid[i].data(), &r);
    if (v < best_val) {
      best_val = v;
      best_idx = i;
      best_res = r;
    }
  }
  if (best_idx < 0 || !std::isfinite(best_val)) {
    LegendreResult r;
    r.value = kInf;
    r.status = LegendreResult::Status::infinite;
    return r;
  }
  std::vector<double> th = grid[best_idx];

  // --- stage 2 (1-D): golden section in log-theta around the best bracket.
  if (nf == 1) {
    double step = (std::log(kBracketHi) - std::log(kBracketLo)) / 48.0;
    double la = std::log(th[0]) - step, lb = std::log(th[0]) + step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = lb - gr * (lb - la), x2 = la + gr * (lb - la);
    double e1p = std::exp(x1), e2p = std::exp(x2);
    double f1 = F(&e1p, nullptr), f2 = F(&e2p, nullptr);
    for (int it = 0; it < 70 && lb - la > 1e-12; ++it) {
      if (f1 <= f2) {
        lb = x2;
        x2 = x1;
        f2 = f1;
        x1 = lb - gr * (lb - la);
        e1p = std::exp(x1);
        f1 = F(&e1p, nullptr);
      } else {
        la = x1;
        x1 = x2;
        f1 = f2;
        x2 = la + gr * (lb - la);
        e2p = std::exp(x2);
        f2 = F(&e2p, nullptr);
      }
    }
    th[0] = std::exp(0.5 * (la + lb));
  } else {
    // --- stage 2 (2-D): Nelder-Mead in log-theta.
    auto Flog = [&](const VectorXd& z) {
      double thv[2] = {std::exp(z(0)), std::exp(z(1))};
      return F(thv, nullptr);
    };
    std::vector<VectorXd> simplex;
    VectorXd z0(2);
    z0 << std::log(th[0]), std::log(th[1]);
    simplex.push_back(z0);
    for (int k = 0; k < 2; ++k) {
      VectorXd z = z0;
      z(k) += 0.4;
      simplex.push_back(z);
    }
    std::vector<double> fv(3);
    for (int k = 0; k < 3; ++k) fv[k] = Flog(simplex[k]);
    for (int it = 0; it < 300; ++it) {
      // Order ascending.
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
          if (fv[b] < fv[a]) {
            std::swap(fv[a], fv[b]);
            std::swap(simplex[a], simplex[b]);
          }
      if ((simplex[2] - simplex[0]).norm() < 1e-10 &&
          std::fabs(fv[2] - fv[0]) < 1e-13 * (1.0 + std::fabs(fv[0])))
        break;
      VectorXd cen = 0.5 * (simplex[0] + simplex[1]);
      VectorXd xr = cen + (cen - simplex[2]);
      double fr = Flog(xr);
      if (fr < fv[0]) {
        VectorXd xe = cen + 2.0 * (cen - simplex[2]);
        double fe = Flog(xe);
        if (fe < fr) {
          simplex[2] = xe;
          fv[2] = fe;
        } else {
          simplex[2] = xr;
          fv[2] = fr;
        }
      } else if (fr < fv[1]) {
        simplex[2] = xr;
        fv[2] = fr;
      } else {
        VectorXd xc = cen + 0.5 * (simplex[2] - cen);
        double fc = Flog(xc);
        if (fc < fv[2]) {
          simplex[2] = xc;
          fv[2] = fc;
        } else {
          simplex[1] = simplex[0] + 0.5 * (simplex[1] - simplex[0]);
          simplex[2] = simplex[0] + 0.5 * (simplex[2] - simplex[0]);
          fv[1] = Flog(simplex[1]);
          fv[2] = Flog(simplex[2]);
        }
      }
    }
    int bi = 0;
    for (int k = 1; k < 3; ++k)
      if (fv[k] < fv[bi]) bi = k;
    th = {std::exp(simplex[bi](0)), std::exp(simplex[bi](1))};
  }

  // --- stage 3: Newton polish on the envelope F(theta).
  LegendreResult inner;
  double Fcur = F(th.data(), &inner);
  double env_grad_norm = kInf;
  for (int it = 0; it < 30; ++it) {
    if (!std::isfinite(Fcur) || inner.status != LegendreResult::Status::converged) break;
    std::vector<double> J(static_cast<std::size_t>(M.dim) * nf);
    M.jacobian(th.data(), J.data());
    MatrixXd Jac(M.dim, nf);
    for (int i = 0; i < M.dim; ++i)
      for (int k = 0; k < nf; ++k) Jac(i, k) = J[static_cast<std::size_t>(i) * nf + k];
    VectorXd tstar = Eigen::Map<VectorXd>(inner.argmax.data(), M.dim);
    VectorXd g = Jac.transpose() * tstar;
    env_grad_norm = g.norm();
    if (env_grad_norm < kGradTol) break;
    // Hessian of the envelope: t* . d2tau + J^T H_f(t*)^{-1} J.
    std::vector<double> gbuf(static_cast<std::size_t>(M.dim));
    std::vector<double> hbuf(static_cast<std::size_t>(M.dim) * M.dim);
    f.derivatives(tstar.data(), gbuf.data(), hbuf.data());
    MatrixXd Hf = Eigen::Map<MatrixXd>(hbuf.data(), M.dim, M.dim);
    MatrixXd Hinv_J = Hf.ldlt().solve(Jac);
    std::vector<double> secbuf(static_cast<std::size_t>(nf) * nf);
    M.weighted_second(th.data(), tstar.data(), secbuf.data());
    MatrixXd H(nf, nf);
    for (int a = 0; a < nf; ++a)
      for (int b = 0; b < nf; ++b)
        H(a, b) = secbuf[static_cast<std::size_t>(a) * nf + b];
    H += Jac.transpose() * Hinv_J;
    VectorXd step = H.ldlt().solve(-g);
    if (!step.allFinite() || g.dot(step) >= 0.0) step = -g;
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls) {
      std::vector<double> cand(th);
      bool pos = true;
      for (int k = 0; k < nf; ++k) {
        cand[k] = th[k] + alpha * step(k);
        if (!(cand[k] > 0.0)) pos = false;
      }
      if (pos) {
        LegendreResult cres;
        double Fc = F(cand.data(), &cres);
        if (Fc <= Fcur + 1e-4 * alpha * g.dot(step)) {
          th = cand;
          Fcur = Fc;
          inner = cres;
          moved = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }

  LegendreResult out;
  out.value = Fcur;
  out.argmax = M.tau(th.data());
  out.grad_norm = std::isfinite(env_grad_norm) ? env_grad_norm : 0.0;
  out.status = inner.status;
  if (!std::isfinite(Fcur)) {
    out.value = kInf;
    out.status = LegendreResult::Status::infinite;
  }
  if (diag) {
    diag->tau = out.argmax;
    diag->inner_t = inner.argmax;
    diag->envelope_grad = out.grad_norm;
  }
  return out;
}

}  // namespace lpldp
