#pragma once

// Cubic-regularized zeroth-order Newton method. Each step minimises
//   rho(s) = g^T s + 1/2 s^T H s + (alpha/6) ||s||^3
// built from batched gradient and Hessian estimates, and the output is a
// uniformly drawn iterate.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grdsa/newton.hpp"
#include "grdsa/oracle.hpp"
#include "grdsa/perturb.hpp"
#include "grdsa/rng.hpp"
#include "grdsa/types.hpp"

namespace grdsa {

struct CubicModel {
  Vec g;
  Mat h;
  double alpha = 1.0;

  double value(const Vec& s) const;
  /// g + H s + (alpha/2) ||s|| s
  Vec stationarity(const Vec& s) const;
};

struct CubicSolveInfo {
  int iterations = 0;
  double radius = 0.0;  // ||s*||
  bool hard_case = false;
};

inline constexpr double kCubicTolerance = 1e-8;

/// Global minimiser of the cubic model via the secular equation in r = ||s||.
/// Throws NumericalError when the root search does not converge.
Vec solve_cubic_subproblem(const CubicModel& model, double tol = kCubicTolerance, CubicSolveInfo* info = nullptr);

struct CubicPrefactors {
  double n = 1.0;
  double m = 1.0;
  double b = 1.0;
  double delta = 1.0;
};

struct CubicConfig {
  int k = 1;
  double epsilon = 0.0;  // 0 when sizes were given directly
  std::uint64_t n = 1;   // iterations N
  std::uint64_t m = 1;   // gradient batch
  std::uint64_t b = 1;   // Hessian batch
  double delta = 0.1;
  std::optional<double> hessian_lipschitz;
  /// Explicit cubic penalty; otherwise 3 L_H, floored at kAlphaFloor.
  std::optional<double> alpha;
  bool reuse = false;
  double tol = kCubicTolerance;
  ScalingMode scaling = ScalingMode::MomentMatched;

  static constexpr double kAlphaFloor = 1e-3;

  /// N = ceil(pN eps^-3/2), m = ceil(pm eps^-(2+2/k)), b = ceil(pb eps^-(1+4/k)),
  /// delta = pdelta eps^(1/k).
  static CubicConfig from_epsilon(double epsilon, int k, std::optional<double> hessian_lipschitz,
                                  const CubicPrefactors& prefactors = {});

  double penalty() const;
  /// Evaluations one step consumes.
  std::uint64_t step_cost() const;
  /// Throws std::invalid_argument on a non-positive field.
  void validate() const;
};

struct CrzonStep {
  Vec theta;
  Vec gradient;
  Mat hessian;
  Vec step;
};

/// theta_n = theta_{n-1} + s*, with s* minimising the model built from a
/// gradient batch of m and a Hessian batch of b. Gradient member i draws its
/// direction from perturbations.substream(0).substream(i), Hessian member j
/// from perturbations.substream(1).substream(j). Under reuse the first
/// min(m, b) gradient members take the Hessian members' directions and
/// measurements.
CrzonStep crzon_step(const Vec& theta, BudgetedOracle& oracle, const CubicConfig& config,
                     const PerturbationSpec& spec, const RandomStream& perturbations);

struct CrzonRunConfig {
  Objective objective;
  NoiseModel noise = NoiseModel::linear_gaussian(0.001);
  PerturbationSpec perturbation = PerturbationSpec::gaussian(1);
  CubicConfig cubic;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> budget;
  std::optional<Vec> initial;
  double init_lower = 2.0;
  double init_upper = 3.0;
};

struct SospReport {
  std::uint64_t seed = 0;
  int k = 0;
  double epsilon = 0.0;
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  std::uint64_t b = 0;
  double delta = 0.0;
  std::uint64_t iterations = 0;  // steps completed
  std::uint64_t r = 0;           // output index in 1..iterations
  Vec theta_r;
  std::vector<Vec> iterates;     // theta_0 .. theta_iterations
  std::uint64_t evals_used = 0;
  std::optional<double> grad_norm;
  std::optional<double> lambda_min;
};

/// Runs N steps or until the next step is unaffordable, then returns theta_R
/// with R uniform on 1..iterations. Errors if not even one step fits.
SospReport run_crzon(const CrzonRunConfig& config);

}  // namespace grdsa
