#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "grdsa/rng.hpp"
#include "grdsa/types.hpp"

namespace grdsa {

/// A smooth objective with optional analytic derivatives. Pure and shareable.
struct Objective {
  std::string name;
  int dim = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;  // empty when unavailable
  std::function<Mat(const Vec&)> hessian;   // empty when unavailable
  std::optional<Vec> optimum;
  /// Lipschitz constant of the Hessian, when known for the fixture.
  std::optional<double> hessian_lipschitz;

  bool has_derivatives() const { return static_cast<bool>(gradient) && static_cast<bool>(hessian); }
};

/// 10 d + sum_n (theta_n^2 - 10 cos(2 pi theta_n)); minimiser at zero.
Objective rastrigin(int dim);
/// 1/2 theta^T A theta + b^T theta. A must be symmetric.
Objective quadratic(const Mat& a, const Vec& b);
/// theta_1^2 - theta_2^2 + theta_2^4 / 4: strict saddle at the origin,
/// minima at (0, +-sqrt(2)).
Objective saddle_quartic();
/// sum_i theta_i^4.
Objective quartic(int dim);
/// exp(theta_1 / 2) + sin(theta_2 / 2): every derivative order is non-zero.
Objective smooth_exp_sin();
Objective linear(const Vec& c);
Objective constant(int dim, double value);

/// Largest relative deviation between the analytic gradient and central
/// differences of the value at `points` random points in [-radius, radius]^d.
double gradient_self_check(const Objective& objective, RandomStream& stream, int points = 100,
                           double radius = 2.0);

/// Additive measurement noise. LinearGaussian: xi = [theta^T, 1] z with
/// z ~ N(0, sigma^2 I_{d+1}) drawn fresh for every evaluation.
class NoiseModel {
 public:
  enum class Kind { None, LinearGaussian };

  static NoiseModel none() { return NoiseModel(Kind::None, 0.0); }
  static NoiseModel linear_gaussian(double sigma);

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  double draw(const Vec& theta, RandomStream& stream) const;

 private:
  NoiseModel(Kind kind, double sigma) : kind_(kind), sigma_(sigma) {}
  Kind kind_;
  double sigma_;
};

class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted(std::uint64_t used, std::uint64_t budget);
};

/// Black-box access to f(theta, xi) = F(theta) + xi with exact measurement
/// counting. Single-writer: each optimisation run owns its own oracle.
class BudgetedOracle {
 public:
  BudgetedOracle(Objective objective, NoiseModel noise, RandomStream noise_stream,
                 std::optional<std::uint64_t> budget = std::nullopt);

  double evaluate(const Vec& theta);

  std::uint64_t used() const { return used_; }
  std::optional<std::uint64_t> budget() const { return budget_; }
  std::uint64_t remaining() const;
  bool can_afford(std::uint64_t evaluations) const { return remaining() >= evaluations; }

  const Objective& objective() const { return objective_; }
  const NoiseModel& noise() const { return noise_; }

 private:
  Objective objective_;
  NoiseModel noise_;
  RandomStream stream_;
  std::optional<std::uint64_t> budget_;
  std::uint64_t used_ = 0;
};

/// ||final - optimum||^2 / ||initial - optimum||^2.
double parameter_error(const Vec& final_theta, const Vec& initial_theta, const Vec& optimum);

}  // namespace grdsa
