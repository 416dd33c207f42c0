// functional: interface for smooth convex functions on an open domain of R^d,
// exposing analytic values, gradients and Hessians to the Legendre machinery.
#pragma once

#include <memory>

namespace lpldp {

/// A convex function f: open domain in R^d -> R with two analytic derivatives.
/// Outside the domain value() is +inf and derivatives() must not be called.
class Functional {
 public:
  virtual ~Functional() = default;
  virtual int dim() const = 0;
  virtual bool in_domain(const double* t) const = 0;
  /// f(t); +inf when t is outside the domain.
  virtual double value(const double* t) const = 0;
  /// Value at an interior point, filling grad (size dim) and, when hess is
  /// non-null, the dense row-major Hessian (size dim*dim). Derivatives are
  /// analytic (differentiated under the integral), never finite differences.
  virtual double derivatives(const double* t, double* grad, double* hess) const = 0;
};

using FunctionalPtr = std::unique_ptr<Functional>;

}  // namespace lpldp
