#include "grdsa/newton.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "grdsa/estimators.hpp"
#include "grdsa/stencils.hpp"

namespace grdsa {

double Schedules::a(std::uint64_t n) const { return a0 / std::pow(static_cast<double>(n) + a_offset, alpha); }
double Schedules::b(std::uint64_t n) const { return b0 / std::pow(static_cast<double>(n) + b_offset, beta); }
double Schedules::delta(std::uint64_t n) const { return delta0 / std::pow(static_cast<double>(n), gamma); }

ScheduleReport validate_schedules(const Schedules& s) {
  ScheduleReport r;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) r.errors.push_back(fmt::format("{} must be positive (got {})", name, v));
  };
  positive(s.a0, "a0");
  positive(s.b0, "b0");
  positive(s.delta0, "delta0");
  positive(s.alpha, "alpha");
  positive(s.beta, "beta");
  positive(s.gamma, "gamma");
  if (!(s.a_offset >= 0.0)) r.errors.push_back(fmt::format("a offset A must be >= 0 (got {})", s.a_offset));
  if (!(s.b_offset >= 0.0)) r.errors.push_back(fmt::format("b offset B must be >= 0 (got {})", s.b_offset));

  r.a_diverges = s.alpha <= 1.0;
  r.b_diverges = s.beta <= 1.0;
  r.ratio_vanishes = s.alpha > s.beta;
  const double step_exponent = 2.0 * (s.alpha - s.gamma);
  const double hessian_exponent = 2.0 * (s.beta - 2.0 * s.gamma);
  r.step_square_summable = step_exponent > 1.0;
  r.hessian_square_summable = hessian_exponent > 1.0;

  if (!r.a_diverges) r.warnings.push_back(fmt::format("Σa(n) converges (α = {:.2f} > 1)", s.alpha));
  if (!r.b_diverges) r.warnings.push_back(fmt::format("Σb(n) converges (β = {:.2f} > 1)", s.beta));
  if (!r.ratio_vanishes) {
    r.warnings.push_back(fmt::format("a(n)/b(n) does not vanish (α = {:.2f} ≤ β = {:.2f})", s.alpha, s.beta));
  }
  if (!r.step_square_summable) {
    r.warnings.push_back(fmt::format("Σ(a/δ)² diverges (2(α−γ) = {:.2f} ≤ 1)", step_exponent));
  }
  if (!r.hessian_square_summable) {
    r.warnings.push_back(fmt::format("Σ(b/δ²)² diverges (2(β−2γ) = {:.2f} ≤ 1)", hessian_exponent));
  }
  return r;
}

ProjectionBox::ProjectionBox(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() == 0) {
    throw std::invalid_argument("projection box: bounds must be non-empty and of equal length");
  }
  if (!(lower_.array() < upper_.array()).all()) {
    throw std::invalid_argument("projection box: lower bound must be below upper bound in every coordinate");
  }
}

ProjectionBox ProjectionBox::uniform(int dim, double lower, double upper) {
  return {Vec::Constant(dim, lower), Vec::Constant(dim, upper)};
}

Vec ProjectionBox::project(const Vec& theta) const { return theta.cwiseMax(lower_).cwiseMin(upper_); }

bool ProjectionBox::contains(const Vec& theta) const {
  return (theta.array() >= lower_.array()).all() && (theta.array() <= upper_.array()).all();
}

Mat ClampedEigen::matrix() const { return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose(); }

Vec ClampedEigen::solve(const Vec& rhs) const {
  return eigenvectors * (eigenvectors.transpose() * rhs).cwiseQuotient(eigenvalues);
}

ClampedEigen clamp_eigen(const Mat& h, double eps_pd) {
  if (!(eps_pd > 0.0)) throw std::invalid_argument("eps_pd must be > 0");
  if (h.rows() != h.cols()) throw std::invalid_argument("Theta: matrix must be square");
  if (!h.allFinite()) {
    std::ostringstream os;
    os << "Theta: non-finite matrix\n" << h;
    throw NumericalError(os.str());
  }
  const Mat sym = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  if (eig.info() != Eigen::Success) {
    std::ostringstream os;
    os << "Theta: eigendecomposition failed for\n" << sym;
    throw NumericalError(os.str());
  }
  return {eig.eigenvalues().cwiseMax(eps_pd), eig.eigenvectors()};
}

Mat theta_operator(const Mat& h, double eps_pd) {
  Mat out = clamp_eigen(h, eps_pd).matrix();
  return 0.5 * (out + out.transpose());
}

std::uint64_t newton_iteration_cost(const NewtonOptions& options) {
  const auto k = static_cast<std::uint64_t>(options.k);
  return options.reuse ? 2 * k + 1 : (k + 1) + (2 * k + 1);
}

std::uint64_t gradient_iteration_cost(int k) { return static_cast<std::uint64_t>(k) + 1; }

NewtonState newton_step(const NewtonState& state, BudgetedOracle& oracle, const NewtonOptions& options,
                        const ProjectionBox& box, const PerturbationSpec& spec, RandomStream& perturbations) {
  const std::uint64_t n = state.n + 1;
  const double delta = options.schedules.delta(n);
  const Vec direction = sample(spec, perturbations);

  ShiftValues shared;
  const HessianEstimate hess =
      estimate_hessian(oracle, state.theta, direction, delta, options.k, options.k, spec, options.scaling, &shared);
  const GradientEstimate grad =
      options.reuse
          ? estimate_gradient(oracle, state.theta, direction, delta, options.k, spec, shared)
          : estimate_gradient(oracle, state.theta, direction, delta, options.k, spec);

  NewtonState next;
  next.n = n;
  next.hbar = state.hbar + options.schedules.b(n) * (hess.value - state.hbar);
  const Vec step = clamp_eigen(next.hbar, options.eps_pd).solve(grad.value);
  next.theta = box.project(state.theta - options.schedules.a(n) * step);
  return next;
}

NewtonState gradient_step(const NewtonState& state, BudgetedOracle& oracle, const NewtonOptions& options,
                          const ProjectionBox& box, const PerturbationSpec& spec, RandomStream& perturbations) {
  const std::uint64_t n = state.n + 1;
  const Vec direction = sample(spec, perturbations);
  const GradientEstimate grad =
      estimate_gradient(oracle, state.theta, direction, options.schedules.delta(n), options.k, spec);
  NewtonState next;
  next.n = n;
  next.hbar = state.hbar;
  next.theta = box.project(state.theta - options.schedules.a(n) * grad.value);
  return next;
}

RunRecord run_newton(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const int d = config.objective.dim;
  if (d < 1) throw std::invalid_argument("run: objective dimension must be >= 1");
  if (config.perturbation.dim() != d) throw std::invalid_argument("run: perturbation dimension mismatch");
  if (config.options.k < 1) throw std::invalid_argument("run: estimator order k must be >= 1");
  grad_weights(config.options.k);  // enforces the order cap
  if (const ScheduleReport report = validate_schedules(config.options.schedules); !report.ok()) {
    throw std::invalid_argument("run: invalid schedules: " + report.errors.front());
  }
  const ProjectionBox box = ProjectionBox::uniform(d, config.box_lower, config.box_upper);
  const std::uint64_t cost = config.algorithm == Algorithm::Newton ? newton_iteration_cost(config.options)
                                                                   : gradient_iteration_cost(config.options.k);
  if (config.budget < cost) {
    throw std::invalid_argument(fmt::format("run: budget {} cannot afford one iteration ({} evaluations)",
                                            config.budget, cost));
  }

  const RandomStream root(config.seed);
  RandomStream init_stream = root.substream(1);
  RandomStream perturbations = root.substream(2);
  BudgetedOracle oracle(config.objective, config.noise, root.substream(3), config.budget);

  NewtonState state;
  if (config.initial) {
    if (config.initial->size() != d) throw std::invalid_argument("run: initial point has the wrong length");
    state.theta = box.project(*config.initial);
  } else {
    state.theta.resize(d);
    for (int i = 0; i < d; ++i) state.theta[i] = init_stream.uniform(config.init_lower, config.init_upper);
    state.theta = box.project(state.theta);
  }
  state.hbar = Mat::Identity(d, d);

  RunRecord record;
  record.seed = config.seed;
  record.k = config.options.k;
  record.budget = config.budget;
  record.initial = state.theta;
  if (config.trajectory_stride > 0) record.trajectory.push_back(state.theta);

  while (oracle.can_afford(cost)) {
    state = config.algorithm == Algorithm::Newton
                ? newton_step(state, oracle, config.options, box, config.perturbation, perturbations)
                : gradient_step(state, oracle, config.options, box, config.perturbation, perturbations);
    if (config.trajectory_stride > 0 && state.n % config.trajectory_stride == 0) {
      record.trajectory.push_back(state.theta);
    }
  }

  record.iterations = state.n;
  record.evals_used = oracle.used();
  record.final_theta = state.theta;
  if (config.objective.optimum && (record.initial - *config.objective.optimum).squaredNorm() > 0.0) {
    record.final_parameter_error = parameter_error(state.theta, record.initial, *config.objective.optimum);
  }
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

}  // namespace grdsa
