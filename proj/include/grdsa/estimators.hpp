#pragma once

// Noisy zeroth-order gradient and Hessian estimators built from the exact
// stencils. A single estimate draws no randomness of its own: the caller
// supplies the perturbation direction, the oracle supplies the noise.

#include <cstdint>
#include <span>
#include <vector>

#include "grdsa/oracle.hpp"
#include "grdsa/perturb.hpp"
#include "grdsa/rng.hpp"
#include "grdsa/types.hpp"

namespace grdsa {

struct GradientEstimate {
  Vec value;
  int k = 0;
  double delta = 0.0;
  std::uint64_t measurements_used = 0;
};

struct HessianEstimate {
  Mat value;
  int k1 = 0;
  int k2 = 0;
  double delta = 0.0;
  std::uint64_t measurements_used = 0;
};

/// Measured values f(theta + s*delta*direction) indexed by shift s.
using ShiftValues = std::vector<double>;

/// Evaluates the oracle at shifts 0..max_shift along one direction.
ShiftValues measure_shifts(BudgetedOracle& oracle, const Vec& theta, const Vec& direction, double delta,
                           int max_shift);

/// value = factor * direction * (1/delta) * sum_l w_l f_l, with w from the
/// order-k gradient stencil. `values` must cover shifts 0..k.
Vec gradient_from_values(std::span<const double> values, const Vec& direction, double delta, int k,
                         const PerturbationSpec& spec);

/// value = M(direction) * (1/delta^2) * sum_s w_s f_s, with w from the
/// (k1, k2) Hessian stencil. `values` must cover shifts 0..k1+k2.
Mat hessian_from_values(std::span<const double> values, const Vec& direction, double delta, int k1, int k2,
                        const PerturbationSpec& spec, ScalingMode scaling);

/// Single-sample gradient estimate. When `shared` covers shifts 0..k those
/// measurements are reused and no evaluation is spent.
GradientEstimate estimate_gradient(BudgetedOracle& oracle, const Vec& theta, const Vec& direction,
                                   double delta, int k, const PerturbationSpec& spec,
                                   std::span<const double> shared = {});

/// Single-sample Hessian estimate; consumes k1+k2+1 evaluations. When
/// `measured` is non-null it receives the shift values for reuse.
HessianEstimate estimate_hessian(BudgetedOracle& oracle, const Vec& theta, const Vec& direction,
                                 double delta, int k1, int k2, const PerturbationSpec& spec,
                                 ScalingMode scaling = ScalingMode::MomentMatched,
                                 ShiftValues* measured = nullptr);

/// Mean of m single-sample gradient estimates, each with its own direction
/// drawn from `perturbations.substream(i)` and fresh noise.
GradientEstimate batch_gradient(BudgetedOracle& oracle, const Vec& theta, double delta, int k, int m,
                                const PerturbationSpec& spec, const RandomStream& perturbations);

/// Mean of b single-sample Hessian estimates (k1 = k2 = k by default).
HessianEstimate batch_hessian(BudgetedOracle& oracle, const Vec& theta, double delta, int k, int b,
                              const PerturbationSpec& spec, const RandomStream& perturbations,
                              ScalingMode scaling = ScalingMode::MomentMatched);

}  // namespace grdsa
