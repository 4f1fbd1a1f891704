#pragma once

// Projected two-timescale stochastic Newton method. The averaged Hessian is
// tracked with weights b(n) on the fast timescale; parameters move with steps
// a(n) along -Theta(Hbar)^{-1} grad on the slow one and are projected back
// into a coordinate box.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grdsa/oracle.hpp"
#include "grdsa/perturb.hpp"
#include "grdsa/rng.hpp"
#include "grdsa/types.hpp"

namespace grdsa {

/// a(n) = a0/(n+A)^alpha, b(n) = b0/(n+B)^beta, delta(n) = delta0/n^gamma.
struct Schedules {
  double a0 = 0.9;
  double a_offset = 20.0;
  double alpha = 0.9;
  double b0 = 0.9;
  double b_offset = 10.0;
  double beta = 0.56;
  double delta0 = 0.9;
  double gamma = 0.16667;

  double a(std::uint64_t n) const;
  double b(std::uint64_t n) const;
  double delta(std::uint64_t n) const;
};

struct ScheduleReport {
  bool a_diverges = false;            // sum a(n) = inf      (alpha <= 1)
  bool b_diverges = false;            // sum b(n) = inf      (beta <= 1)
  bool ratio_vanishes = false;        // a(n)/b(n) -> 0      (alpha > beta)
  bool step_square_summable = false;  // sum (a/delta)^2 < inf   (2(alpha-gamma) > 1)
  bool hessian_square_summable = false;  // sum (b/delta^2)^2 < inf (2(beta-2gamma) > 1)
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

/// Symbolic exponent checks of the step-size conditions. Violations of the
/// summability conditions are warnings; invalid constants are errors.
ScheduleReport validate_schedules(const Schedules& schedules);

class ProjectionBox {
 public:
  ProjectionBox(Vec lower, Vec upper);
  static ProjectionBox uniform(int dim, double lower, double upper);

  Vec project(const Vec& theta) const;
  bool contains(const Vec& theta) const;
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

 private:
  Vec lower_;
  Vec upper_;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric eigendecomposition with eigenvalues clamped below at eps.
struct ClampedEigen {
  Vec eigenvalues;   // clamped, ascending
  Mat eigenvectors;  // orthonormal columns

  Mat matrix() const;
  /// Solves Theta(H) x = rhs without forming an inverse.
  Vec solve(const Vec& rhs) const;
};

ClampedEigen clamp_eigen(const Mat& h, double eps_pd);

/// Projection onto symmetric matrices with lambda_min >= eps_pd.
Mat theta_operator(const Mat& h, double eps_pd);

struct NewtonState {
  Vec theta;
  Mat hbar;
  std::uint64_t n = 0;  // completed iterations
};

struct NewtonOptions {
  int k = 1;
  bool reuse = true;
  ScalingMode scaling = ScalingMode::MomentMatched;
  double eps_pd = 0.1;
  Schedules schedules;
};

/// Evaluations one iteration consumes: 2k+1 with reuse, (k+1)+(2k+1) without.
std::uint64_t newton_iteration_cost(const NewtonOptions& options);
/// Evaluations one gradient-only iteration consumes: k+1.
std::uint64_t gradient_iteration_cost(int k);

/// One iteration. Throws BudgetExhausted without updating the state (the
/// oracle counter still reflects what was spent).
NewtonState newton_step(const NewtonState& state, BudgetedOracle& oracle, const NewtonOptions& options,
                        const ProjectionBox& box, const PerturbationSpec& spec, RandomStream& perturbations);

/// First-order counterpart: theta <- Gamma(theta - a(n) grad).
NewtonState gradient_step(const NewtonState& state, BudgetedOracle& oracle, const NewtonOptions& options,
                          const ProjectionBox& box, const PerturbationSpec& spec, RandomStream& perturbations);

enum class Algorithm { Newton, GradientOnly };

struct RunConfig {
  Algorithm algorithm = Algorithm::Newton;
  Objective objective;
  NoiseModel noise = NoiseModel::linear_gaussian(0.001);
  PerturbationSpec perturbation = PerturbationSpec::gaussian(1);
  NewtonOptions options;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  double box_lower = -5.12;
  double box_upper = 5.12;
  /// theta_0 is drawn i.i.d. uniform on [init_lower, init_upper]^d unless
  /// an explicit start is given.
  double init_lower = 2.0;
  double init_upper = 3.0;
  std::optional<Vec> initial;
  /// Keep every stride-th iterate in the trajectory; 0 disables recording.
  std::uint64_t trajectory_stride = 0;
};

struct RunRecord {
  std::uint64_t seed = 0;
  int k = 0;
  std::uint64_t budget = 0;
  std::uint64_t iterations = 0;
  std::uint64_t evals_used = 0;
  Vec initial;
  Vec final_theta;
  std::optional<double> final_parameter_error;
  std::vector<Vec> trajectory;
  double wall_seconds = 0.0;
};

/// Runs until the next iteration can no longer be afforded.
RunRecord run_newton(const RunConfig& config);

}  // namespace grdsa
