#include "grdsa/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "grdsa/estimators.hpp"
#include "grdsa/stencils.hpp"

namespace grdsa {

double CubicModel::value(const Vec& s) const {
  return g.dot(s) + 0.5 * s.dot(h * s) + alpha / 6.0 * std::pow(s.norm(), 3);
}

Vec CubicModel::stationarity(const Vec& s) const { return g + h * s + (0.5 * alpha * s.norm()) * s; }

namespace {

[[noreturn]] void fail(const CubicModel& model, const std::string& what) {
  std::ostringstream os;
  os << "cubic subproblem: " << what << "\nalpha = " << model.alpha << "\ng = " << model.g.transpose()
     << "\nH =\n"
     << model.h;
  throw NumericalError(os.str());
}

}  // namespace

Vec solve_cubic_subproblem(const CubicModel& model, double tol, CubicSolveInfo* info) {
  const auto d = model.g.size();
  if (!(model.alpha > 0.0)) throw std::invalid_argument("cubic subproblem: alpha must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("cubic subproblem: tol must be > 0");
  if (model.h.rows() != d || model.h.cols() != d) throw std::invalid_argument("cubic subproblem: shape mismatch");
  if (!model.g.allFinite() || !model.h.allFinite()) fail(model, "non-finite input");

  const Mat sym = 0.5 * (model.h + model.h.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  if (eig.info() != Eigen::Success) fail(model, "eigendecomposition failed");
  const Vec& lambda = eig.eigenvalues();
  const Mat& v = eig.eigenvectors();
  const Vec gh = v.transpose() * model.g;
  const double half_alpha = 0.5 * model.alpha;
  const double gnorm = model.g.norm();
  const double target = tol * std::max(1.0, gnorm);
  const double r_min = std::max(0.0, -lambda[0] / half_alpha);
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());

  // Denominators are lambda_i + (alpha/2) r with r = r_min + t. Shifting the
  // spectrum by its bottom keeps the small gap near r_min exact.
  Vec shifted = lambda;
  if (r_min > 0.0) shifted.array() -= lambda[0];
  auto den = [&](Eigen::Index i, double t) { return shifted[i] + half_alpha * t; };

  CubicSolveInfo local;
  auto coords = [&](double t, bool skip_bottom) {
    Vec c(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double q = den(i, t);
      c[i] = (skip_bottom && q <= 1e-12 * scale) ? 0.0 : -gh[i] / q;
    }
    return c;
  };

  // Bottom eigenspace: directions where the shifted matrix is singular at r_min.
  double bottom_weight = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (den(i, 0.0) <= 1e-12 * scale) bottom_weight += gh[i] * gh[i];
  }
  if (std::sqrt(bottom_weight) <= 1e-12 * std::max(1.0, gnorm)) {
    Vec c = coords(0.0, true);
    const double rest = c.norm();
    if (rest <= r_min) {
      const double tau = std::sqrt(std::max(0.0, r_min * r_min - rest * rest));
      if (tau > 0.0) {
        // Sign chosen to keep the bottom component aligned with -g.
        c[0] = gh[0] > 0.0 ? -tau : tau;
        local.hard_case = true;
      }
      const Vec s = v * c;
      local.radius = s.norm();
      if (info) *info = local;
      return s;
    }
  }

  auto phi = [&](double t, double* slope) {
    double norm2 = 0.0, dnorm2 = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double q = den(i, t);
      const double c = gh[i] / q;
      norm2 += c * c;
      dnorm2 += -2.0 * half_alpha * c * c / q;
    }
    const double norm = std::sqrt(norm2);
    if (slope) *slope = (norm > 0.0 ? 0.5 * dnorm2 / norm : 0.0) - 1.0;
    return norm - (r_min + t);
  };

  double lo = 0.0;
  double hi = std::sqrt(2.0 * gnorm / model.alpha);
  if (!(hi > 0.0)) hi = 1.0;
  while (phi(hi, nullptr) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++local.iterations > 200) fail(model, "could not bracket the secular equation");
  }

  double t = hi;
  for (;;) {
    if (++local.iterations > 200) {
      fail(model, fmt::format("no convergence after 200 iterations (bracket [{}, {}])", r_min + lo, r_min + hi));
    }
    double slope = 0.0;
    const double f = phi(t, &slope);
    const Vec s = v * coords(t, false);
    const bool collapsed = (hi - lo) <= 1e-15 * hi;
    if (half_alpha * std::abs(f) * s.norm() <= target || collapsed) {
      const double resid = model.stationarity(s).norm();
      if (resid <= target) {
        local.radius = s.norm();
        if (info) *info = local;
        return s;
      }
      if (collapsed) fail(model, fmt::format("bracket collapsed with stationarity residual {}", resid));
    }
    if (f > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    double next = slope < 0.0 ? t - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
}

CubicConfig CubicConfig::from_epsilon(double epsilon, int k, std::optional<double> hessian_lipschitz,
                                      const CubicPrefactors& p) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("crzon: epsilon must be > 0");
  if (k < 1) throw std::invalid_argument("crzon: k must be >= 1");
  if (!(p.n > 0.0 && p.m > 0.0 && p.b > 0.0 && p.delta > 0.0)) {
    throw std::invalid_argument("crzon: prefactors must be > 0");
  }
  auto count = [](double x) {
    if (!(x < 9.0e15)) throw std::invalid_argument("crzon: epsilon too small, batch size overflows");
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(x)));
  };
  const double kk = k;
  CubicConfig c;
  c.k = k;
  c.epsilon = epsilon;
  c.n = count(p.n * std::pow(epsilon, -1.5));
  c.m = count(p.m * std::pow(epsilon, -(2.0 + 2.0 / kk)));
  c.b = count(p.b * std::pow(epsilon, -(1.0 + 4.0 / kk)));
  c.delta = p.delta * std::pow(epsilon, 1.0 / kk);
  c.hessian_lipschitz = hessian_lipschitz;
  return c;
}

double CubicConfig::penalty() const {
  if (alpha) return *alpha;
  if (hessian_lipschitz && 3.0 * *hessian_lipschitz > 0.0) return 3.0 * *hessian_lipschitz;
  return kAlphaFloor;
}

std::uint64_t CubicConfig::step_cost() const {
  const auto kk = static_cast<std::uint64_t>(k);
  if (reuse) return b * (2 * kk + 1) + (m > b ? (m - b) * (kk + 1) : 0);
  return m * (kk + 1) + b * (2 * kk + 1);
}

void CubicConfig::validate() const {
  if (k < 1) throw std::invalid_argument("crzon: k must be >= 1");
  grad_weights(k);
  if (n < 1 || m < 1 || b < 1) throw std::invalid_argument("crzon: N, m and b must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("crzon: delta must be > 0");
  if (alpha && !(*alpha > 0.0)) throw std::invalid_argument("crzon: alpha must be > 0");
  if (hessian_lipschitz && !(*hessian_lipschitz >= 0.0)) throw std::invalid_argument("crzon: L_H must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("crzon: tol must be > 0");
}

CrzonStep crzon_step(const Vec& theta, BudgetedOracle& oracle, const CubicConfig& config,
                     const PerturbationSpec& spec, const RandomStream& perturbations) {
  const auto d = theta.size();
  const RandomStream grad_streams = perturbations.substream(0);
  const RandomStream hess_streams = perturbations.substream(1);
  Vec g = Vec::Zero(d);
  Mat h = Mat::Zero(d, d);

  const std::uint64_t shared = config.reuse ? std::min(config.m, config.b) : 0;
  for (std::uint64_t j = 0; j < config.b; ++j) {
    RandomStream stream = hess_streams.substream(j);
    const Vec direction = sample(spec, stream);
    ShiftValues values;
    h += estimate_hessian(oracle, theta, direction, config.delta, config.k, config.k, spec, config.scaling, &values)
             .value;
    if (j < shared) g += estimate_gradient(oracle, theta, direction, config.delta, config.k, spec, values).value;
  }
  for (std::uint64_t i = shared; i < config.m; ++i) {
    RandomStream stream = grad_streams.substream(i);
    const Vec direction = sample(spec, stream);
    g += estimate_gradient(oracle, theta, direction, config.delta, config.k, spec).value;
  }
  g /= static_cast<double>(config.m);
  h /= static_cast<double>(config.b);

  CrzonStep out;
  out.gradient = g;
  out.hessian = h;
  out.step = solve_cubic_subproblem({g, h, config.penalty()}, config.tol);
  out.theta = theta + out.step;
  return out;
}

SospReport run_crzon(const CrzonRunConfig& config) {
  const CubicConfig& cubic = config.cubic;
  cubic.validate();
  const int d = config.objective.dim;
  if (d < 1) throw std::invalid_argument("crzon: objective dimension must be >= 1");
  if (config.perturbation.dim() != d) throw std::invalid_argument("crzon: perturbation dimension mismatch");
  const std::uint64_t cost = cubic.step_cost();
  if (config.budget && *config.budget < cost) {
    throw std::invalid_argument(
        fmt::format("crzon: budget {} cannot afford one step ({} evaluations)", *config.budget, cost));
  }

  const RandomStream root(config.seed);
  RandomStream init_stream = root.substream(1);
  const RandomStream perturbations = root.substream(2);
  BudgetedOracle oracle(config.objective, config.noise, root.substream(3), config.budget);
  RandomStream index_stream = root.substream(4);

  Vec theta(d);
  if (config.initial) {
    if (config.initial->size() != d) throw std::invalid_argument("crzon: initial point has the wrong length");
    theta = *config.initial;
  } else {
    for (int i = 0; i < d; ++i) theta[i] = init_stream.uniform(config.init_lower, config.init_upper);
  }

  SospReport report;
  report.seed = config.seed;
  report.k = cubic.k;
  report.epsilon = cubic.epsilon;
  report.n = cubic.n;
  report.m = cubic.m;
  report.b = cubic.b;
  report.delta = cubic.delta;
  report.iterates.push_back(theta);
  for (std::uint64_t step = 1; step <= cubic.n && oracle.can_afford(cost); ++step) {
    theta = crzon_step(theta, oracle, cubic, config.perturbation, perturbations.substream(step)).theta;
    report.iterates.push_back(theta);
    report.iterations = step;
  }
  report.r = 1 + index_stream.index(report.iterations);
  report.theta_r = report.iterates[report.r];
  report.evals_used = oracle.used();
  if (config.objective.has_derivatives()) {
    report.grad_norm = config.objective.gradient(report.theta_r).norm();
    const Mat hess = config.objective.hessian(report.theta_r);
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (hess + hess.transpose()), Eigen::EigenvaluesOnly);
    report.lambda_min = eig.eigenvalues()[0];
  }
  return report;
}

}  // namespace grdsa
