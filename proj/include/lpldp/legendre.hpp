// legendre: Legendre-Fenchel conjugation of the cumulant functionals and
// constrained infima of conjugates over contraction manifolds.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lpldp/functional.hpp"

namespace lpldp {

/// Raised when a Legendre solve exhausts its iteration budget without
/// reaching a classification; carries the last iterate for diagnosis.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> last_iterate)
      : std::runtime_error(what), last_iterate(std::move(last_iterate)) {}
  std::vector<double> last_iterate;
};

/// Outcome of sup_t {<tau, t> - f(t)}.
///  converged          : interior maximizer found, grad_norm < 1e-8.
///  boundary_divergent : supremum finite but approached along an unbounded /
///                       boundary ray; argmax is the last iterate.
///  infinite           : supremum is +inf; value is +inf.
struct LegendreResult {
  enum class Status { converged, boundary_divergent, infinite };
  double value = 0.0;
  std::vector<double> argmax;
  double grad_norm = 0.0;
  Status status = Status::converged;
};

/// Constraint manifold for rate-function contractions; the free parameters
/// are positive and the constrained tau1 is a function of them and w:
///  annealed3 : tau = (tau0, w tau0^{1/2} tau2^{1/p}, tau2), free (tau0, tau2)
///  quenched2 : tau = (w tau^{1/p}, tau), free tau
///  product2  : tau = (tau0, w tau0^{1/2}), free tau0
struct ContractionSpec {
  enum class Kind { annealed3, quenched2, product2 };
  Kind kind = Kind::quenched2;
  double w = 0.0;
  double p = 2.0;  // exponent entering tau2^{1/p} (unused by product2)

  static ContractionSpec annealed3(double w, double p) { return {Kind::annealed3, w, p}; }
  static ContractionSpec quenched2(double w, double p) { return {Kind::quenched2, w, p}; }
  static ContractionSpec product2(double w) { return {Kind::product2, w, 2.0}; }
};

/// f*(tau) = sup_t {<tau, t> - f(t)} by damped Newton with backtracking.
/// `start` optionally warm-starts the iteration (must lie in the domain).
LegendreResult conjugate(const Functional& f, const std::vector<double>& tau,
                         const std::vector<double>* start = nullptr);

/// f**(t): conjugate of the conjugate, via the envelope identity
/// f**(t) = <t, grad f(t)> - f*(grad f(t)).
double biconjugate(const Functional& f, const std::vector<double>& t);

/// Diagnostics from a contraction infimum: the optimal free parameters, the
/// inner conjugate maximizer t* there (used for importance-sampling tilts),
/// and the norm of the envelope gradient at the reported minimizer.
struct InfimumDiagnostics {
  std::vector<double> tau;       // full tau vector at the minimizer
  std::vector<double> inner_t;   // t* achieving f*(tau)
  double envelope_grad = 0.0;
};

/// inf over the contraction manifold of f*(tau(theta)): log-spaced bracket
/// scan + golden section + Newton polish (1-D manifolds), or Nelder-Mead in
/// log-parameters + Newton polish (annealed3). Free parameters live in
/// [1e-6, 1e6]. Ties prefer the smallest tau2.
LegendreResult rate_infimum(const Functional& f, const ContractionSpec& spec,
                            InfimumDiagnostics* diag = nullptr);

}  // namespace lpldp
