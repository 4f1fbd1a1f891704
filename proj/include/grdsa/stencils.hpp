#pragma once

// Exact finite-difference weight tables for the truncated one-sided
// derivative operator and the Hessian operators composed from it.
//
// The truncated operator of order k combines k+1 function values taken at
// theta + l*delta*Delta, l = 0..k. Composing an order-k1 and an order-k2
// operator along the same direction gives a stencil on shifts 0..k1+k2.
// All weights are exact rationals on the integer shift grid (delta = 1);
// the delta scaling is applied by the estimators.

#include <span>
#include <string>
#include <vector>

#include "grdsa/rational.hpp"

namespace grdsa {

/// Default cap on the truncation order. Weights grow combinatorially and the
/// float conversion loses the cancellation structure beyond this.
inline constexpr int kDefaultMaxOrder = 12;

struct StencilWeight {
  int shift = 0;
  Rational weight;
};

/// Weighted sum of shift^q over a stencil, exact.
Rational stencil_moment(std::span<const StencilWeight> weights, int q);

struct GradStencil {
  int k = 0;
  std::vector<StencilWeight> weights;  // shifts 0..k

  Rational moment(int q) const { return stencil_moment(weights, q); }
};

struct HessStencil {
  int k1 = 0;
  int k2 = 0;
  std::vector<StencilWeight> weights;  // shifts 0..k1+k2

  Rational moment(int q) const { return stencil_moment(weights, q); }
  /// Coefficient of the q-th order Taylor term: moment(q) / q!.
  Rational taylor_coefficient(int q) const;
};

/// c_0^k = sum_{j=1}^k 1/j; c_l^k = (1/l) * k!/(k-l)! for l >= 1.
Rational coeff(int k, int l);

/// Weight at shift l is (-1)^(1-l) c_l^k / l!.
GradStencil grad_stencil(int k, int max_order = kDefaultMaxOrder);

/// Weight at shift s is sum over l+m=s of (-1)^(-l-m) c_l^{k1} c_m^{k2} / (l! m!).
HessStencil hess_stencil(int k1, int k2, int max_order = kDefaultMaxOrder);

/// The single exact-to-float conversion used at the estimator boundary.
std::vector<double> to_doubles(std::span<const StencilWeight> weights);

/// Process-wide cap applied by the cached accessors below (default
/// kDefaultMaxOrder).
void set_order_cap(int max_order);
int order_cap_value();

/// Cached float weights, indexed by shift. Thread-safe; entries are immutable.
const std::vector<double>& grad_weights(int k);
const std::vector<double>& hess_weights(int k1, int k2);

struct IdentityCheck {
  std::string id;
  int k = 0;   // truncation order (k1 for the unequal checks)
  int k2 = 0;  // second order for unequal checks, otherwise equal to k
  int q = 0;   // moment order where relevant, 0 otherwise
  Rational lhs;
  Rational rhs;
  bool pass = false;
};

struct IdentityReport {
  int k_max = 0;
  std::vector<IdentityCheck> checks;

  bool all_pass() const;
  std::size_t failures() const;
};

/// Certifies, in exact arithmetic and for every k <= k_max, the combinatorial
/// identities behind the bias expansion and the cancellations of the
/// equal-truncation Hessian stencil. Also checks the unequal-truncation
/// vanishing/leading-term structure for pairs with k1 != k2 <= min(k_max, 6).
/// Failures are reported, never thrown.
IdentityReport verify_identities(int k_max, int max_order = kDefaultMaxOrder);

}  // namespace grdsa
