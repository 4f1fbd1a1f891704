#include "grdsa/estimators.hpp"

#include <stdexcept>
#include <string>

#include "grdsa/stencils.hpp"

namespace grdsa {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("perturbation constant delta must be > 0");
}

void check_direction(const Vec& theta, const Vec& direction, const PerturbationSpec& spec) {
  if (direction.size() != theta.size() || direction.size() != spec.dim()) {
    throw std::invalid_argument("estimator: theta, direction and perturbation dimensions differ");
  }
}

double weighted_sum(std::span<const double> values, const std::vector<double>& weights) {
  if (values.size() < weights.size()) {
    throw std::invalid_argument("estimator: need measurements at shifts 0.." +
                                std::to_string(weights.size() - 1));
  }
  double sum = 0.0;
  for (std::size_t s = 0; s < weights.size(); ++s) sum += weights[s] * values[s];
  return sum;
}

}  // namespace

ShiftValues measure_shifts(BudgetedOracle& oracle, const Vec& theta, const Vec& direction, double delta,
                           int max_shift) {
  ShiftValues values;
  values.reserve(max_shift + 1);
  for (int s = 0; s <= max_shift; ++s) values.push_back(oracle.evaluate(theta + (s * delta) * direction));
  return values;
}

Vec gradient_from_values(std::span<const double> values, const Vec& direction, double delta, int k,
                         const PerturbationSpec& spec) {
  check_delta(delta);
  const double difference = weighted_sum(values, grad_weights(k)) / delta;
  return (gradient_unbias_factor(spec) * difference) * direction;
}

Mat hessian_from_values(std::span<const double> values, const Vec& direction, double delta, int k1, int k2,
                        const PerturbationSpec& spec, ScalingMode scaling) {
  check_delta(delta);
  const double second_difference = weighted_sum(values, hess_weights(k1, k2)) / (delta * delta);
  return second_difference * scaling_matrix(spec, direction, scaling);
}

GradientEstimate estimate_gradient(BudgetedOracle& oracle, const Vec& theta, const Vec& direction,
                                   double delta, int k, const PerturbationSpec& spec,
                                   std::span<const double> shared) {
  check_delta(delta);
  check_direction(theta, direction, spec);
  GradientEstimate out{Vec(), k, delta, 0};
  if (!shared.empty()) {
    if (shared.size() < static_cast<std::size_t>(k + 1)) {
      throw std::invalid_argument("estimate_gradient: shared measurements do not cover shifts 0..k");
    }
    out.value = gradient_from_values(shared, direction, delta, k, spec);
    return out;
  }
  grad_weights(k);  // validates k before spending any evaluation
  const ShiftValues values = measure_shifts(oracle, theta, direction, delta, k);
  out.measurements_used = values.size();
  out.value = gradient_from_values(values, direction, delta, k, spec);
  return out;
}

HessianEstimate estimate_hessian(BudgetedOracle& oracle, const Vec& theta, const Vec& direction,
                                 double delta, int k1, int k2, const PerturbationSpec& spec,
                                 ScalingMode scaling, ShiftValues* measured) {
  check_delta(delta);
  check_direction(theta, direction, spec);
  hess_weights(k1, k2);
  ShiftValues values = measure_shifts(oracle, theta, direction, delta, k1 + k2);
  HessianEstimate out{hessian_from_values(values, direction, delta, k1, k2, spec, scaling), k1, k2, delta,
                      values.size()};
  if (measured) *measured = std::move(values);
  return out;
}

GradientEstimate batch_gradient(BudgetedOracle& oracle, const Vec& theta, double delta, int k, int m,
                                const PerturbationSpec& spec, const RandomStream& perturbations) {
  if (m < 1) throw std::invalid_argument("batch_gradient: batch size must be >= 1");
  GradientEstimate out{Vec::Zero(theta.size()), k, delta, 0};
  for (int i = 0; i < m; ++i) {
    RandomStream stream = perturbations.substream(static_cast<std::uint64_t>(i));
    const Vec direction = sample(spec, stream);
    const GradientEstimate one = estimate_gradient(oracle, theta, direction, delta, k, spec);
    out.value += one.value;
    out.measurements_used += one.measurements_used;
  }
  out.value /= static_cast<double>(m);
  return out;
}

HessianEstimate batch_hessian(BudgetedOracle& oracle, const Vec& theta, double delta, int k, int b,
                              const PerturbationSpec& spec, const RandomStream& perturbations,
                              ScalingMode scaling) {
  if (b < 1) throw std::invalid_argument("batch_hessian: batch size must be >= 1");
  const auto d = theta.size();
  HessianEstimate out{Mat::Zero(d, d), k, k, delta, 0};
  for (int j = 0; j < b; ++j) {
    RandomStream stream = perturbations.substream(static_cast<std::uint64_t>(j));
    const Vec direction = sample(spec, stream);
    const HessianEstimate one = estimate_hessian(oracle, theta, direction, delta, k, k, spec, scaling);
    out.value += one.value;
    out.measurements_used += one.measurements_used;
  }
  out.value /= static_cast<double>(b);
  return out;
}

}  // namespace grdsa
