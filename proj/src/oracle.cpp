#include "grdsa/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace grdsa {

namespace {

void require_dim(const Vec& theta, int dim, const std::string& name) {
  if (theta.size() != dim) {
    throw std::invalid_argument(name + ": expected a " + std::to_string(dim) + "-vector, got " +
                                std::to_string(theta.size()));
  }
}

}  // namespace

Objective rastrigin(int dim) {
  if (dim < 1) throw std::invalid_argument("rastrigin: dimension must be >= 1");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Objective f;
  f.name = "rastrigin";
  f.dim = dim;
  f.value = [dim](const Vec& x) {
    double sum = 10.0 * dim;
    for (int i = 0; i < dim; ++i) sum += x[i] * x[i] - 10.0 * std::cos(two_pi * x[i]);
    return sum;
  };
  f.gradient = [dim](const Vec& x) {
    Vec g(dim);
    for (int i = 0; i < dim; ++i) g[i] = 2.0 * x[i] + 10.0 * two_pi * std::sin(two_pi * x[i]);
    return g;
  };
  f.hessian = [dim](const Vec& x) {
    Mat h = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) h(i, i) = 2.0 + 10.0 * two_pi * two_pi * std::cos(two_pi * x[i]);
    return h;
  };
  f.optimum = Vec::Zero(dim);
  f.hessian_lipschitz = 10.0 * std::pow(two_pi, 3);
  return f;
}

Objective quadratic(const Mat& a, const Vec& b) {
  if (a.rows() != a.cols() || a.rows() < 1) throw std::invalid_argument("quadratic: A must be square");
  if (b.size() != a.rows()) throw std::invalid_argument("quadratic: b has the wrong length");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("quadratic: A must be symmetric");
  }
  Objective f;
  f.name = "quadratic";
  f.dim = static_cast<int>(a.rows());
  f.value = [a, b](const Vec& x) { return 0.5 * x.dot(a * x) + b.dot(x); };
  f.gradient = [a, b](const Vec& x) -> Vec { return a * x + b; };
  f.hessian = [a](const Vec&) -> Mat { return a; };
  Eigen::SelfAdjointEigenSolver<Mat> eig(a);
  if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0) {
    f.optimum = Vec(a.ldlt().solve(-b));
  }
  f.hessian_lipschitz = 0.0;
  return f;
}

Objective saddle_quartic() {
  Objective f;
  f.name = "saddle";
  f.dim = 2;
  f.value = [](const Vec& x) { return x[0] * x[0] - x[1] * x[1] + 0.25 * std::pow(x[1], 4); };
  f.gradient = [](const Vec& x) {
    Vec g(2);
    g << 2.0 * x[0], -2.0 * x[1] + std::pow(x[1], 3);
    return g;
  };
  f.hessian = [](const Vec& x) {
    Mat h = Mat::Zero(2, 2);
    h(0, 0) = 2.0;
    h(1, 1) = -2.0 + 3.0 * x[1] * x[1];
    return h;
  };
  Vec opt(2);
  opt << 0.0, std::sqrt(2.0);
  f.optimum = opt;
  f.hessian_lipschitz = 6.0;
  return f;
}

Objective quartic(int dim) {
  if (dim < 1) throw std::invalid_argument("quartic: dimension must be >= 1");
  Objective f;
  f.name = "quartic";
  f.dim = dim;
  f.value = [](const Vec& x) { return x.array().pow(4).sum(); };
  f.gradient = [](const Vec& x) -> Vec { return 4.0 * x.array().pow(3).matrix(); };
  f.hessian = [](const Vec& x) -> Mat { return (12.0 * x.array().square()).matrix().asDiagonal(); };
  f.optimum = Vec::Zero(dim);
  return f;
}

Objective smooth_exp_sin() {
  Objective f;
  f.name = "smooth";
  f.dim = 2;
  f.value = [](const Vec& x) { return std::exp(0.5 * x[0]) + std::sin(0.5 * x[1]); };
  f.gradient = [](const Vec& x) {
    Vec g(2);
    g << 0.5 * std::exp(0.5 * x[0]), 0.5 * std::cos(0.5 * x[1]);
    return g;
  };
  f.hessian = [](const Vec& x) {
    Mat h = Mat::Zero(2, 2);
    h(0, 0) = 0.25 * std::exp(0.5 * x[0]);
    h(1, 1) = -0.25 * std::sin(0.5 * x[1]);
    return h;
  };
  return f;
}

Objective linear(const Vec& c) {
  Objective f;
  f.name = "linear";
  f.dim = static_cast<int>(c.size());
  f.value = [c](const Vec& x) { return c.dot(x); };
  f.gradient = [c](const Vec&) -> Vec { return c; };
  f.hessian = [n = c.size()](const Vec&) -> Mat { return Mat::Zero(n, n); };
  return f;
}

Objective constant(int dim, double value) {
  Objective f;
  f.name = "constant";
  f.dim = dim;
  f.value = [value](const Vec&) { return value; };
  f.gradient = [dim](const Vec&) -> Vec { return Vec::Zero(dim); };
  f.hessian = [dim](const Vec&) -> Mat { return Mat::Zero(dim, dim); };
  return f;
}

double gradient_self_check(const Objective& objective, RandomStream& stream, int points, double radius) {
  if (!objective.gradient) throw std::invalid_argument("gradient_self_check: objective has no gradient");
  const int d = objective.dim;
  double worst = 0.0;
  for (int p = 0; p < points; ++p) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = stream.uniform(-radius, radius);
    const Vec analytic = objective.gradient(x);
    Vec numeric(d);
    for (int i = 0; i < d; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      Vec plus = x, minus = x;
      plus[i] += h;
      minus[i] -= h;
      numeric[i] = (objective.value(plus) - objective.value(minus)) / (2.0 * h);
    }
    const double scale = std::max(1.0, analytic.norm());
    worst = std::max(worst, (analytic - numeric).norm() / scale);
  }
  return worst;
}

NoiseModel NoiseModel::linear_gaussian(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("noise sigma must be >= 0");
  return NoiseModel(Kind::LinearGaussian, sigma);
}

double NoiseModel::draw(const Vec& theta, RandomStream& stream) const {
  if (kind_ == Kind::None) return 0.0;
  double xi = sigma_ * stream.normal();  // the constant coordinate of [theta, 1]
  for (Eigen::Index i = 0; i < theta.size(); ++i) xi += theta[i] * sigma_ * stream.normal();
  return xi;
}

BudgetExhausted::BudgetExhausted(std::uint64_t used, std::uint64_t budget)
    : std::runtime_error("evaluation budget exhausted (" + std::to_string(used) + " of " +
                         std::to_string(budget) + " used)") {}

BudgetedOracle::BudgetedOracle(Objective objective, NoiseModel noise, RandomStream noise_stream,
                               std::optional<std::uint64_t> budget)
    : objective_(std::move(objective)), noise_(noise), stream_(std::move(noise_stream)), budget_(budget) {
  if (!objective_.value) throw std::invalid_argument("oracle: objective has no value function");
}

double BudgetedOracle::evaluate(const Vec& theta) {
  require_dim(theta, objective_.dim, objective_.name);
  if (budget_ && used_ >= *budget_) throw BudgetExhausted(used_, *budget_);
  ++used_;
  return objective_.value(theta) + noise_.draw(theta, stream_);
}

std::uint64_t BudgetedOracle::remaining() const {
  if (!budget_) return std::numeric_limits<std::uint64_t>::max();
  return *budget_ - used_;
}

double parameter_error(const Vec& final_theta, const Vec& initial_theta, const Vec& optimum) {
  if (final_theta.size() != optimum.size() || initial_theta.size() != optimum.size()) {
    throw std::invalid_argument("parameter_error: dimension mismatch");
  }
  const double denom = (initial_theta - optimum).squaredNorm();
  if (denom == 0.0) throw std::invalid_argument("parameter_error: initial point equals the optimum");
  return (final_theta - optimum).squaredNorm() / denom;
}

}  // namespace grdsa
