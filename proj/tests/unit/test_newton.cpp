#include "doctest.h"

#include <cmath>

#include "grdsa/estimators.hpp"
#include "grdsa/newton.hpp"

using namespace grdsa;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Mat diag(std::initializer_list<double> xs) { return vec(xs).asDiagonal(); }

Schedules constant_schedules(double a, double b, double delta) {
  Schedules s;
  s.a0 = a;
  s.a_offset = 0.0;
  s.alpha = 0.0;
  s.b0 = b;
  s.b_offset = 0.0;
  s.beta = 0.0;
  s.delta0 = delta;
  s.gamma = 0.0;
  return s;
}

}  // namespace

TEST_SUITE("newton") {
  TEST_CASE("schedule values") {
    const Schedules s;
    CHECK(s.a(1) == doctest::Approx(0.9 / std::pow(21.0, 0.9)));
    CHECK(s.b(1) == doctest::Approx(0.9 / std::pow(11.0, 0.56)));
    CHECK(s.delta(1) == doctest::Approx(0.9));
    CHECK(s.delta(64) == doctest::Approx(0.9 / std::pow(64.0, 0.16667)));
    for (std::uint64_t n = 1; n < 1000; ++n) {
      CHECK(s.a(n + 1) <= s.a(n));
      CHECK(s.b(n + 1) <= s.b(n));
      CHECK(s.delta(n + 1) <= s.delta(n));
      CHECK(s.a(n) > 0.0);
    }
  }

  TEST_CASE("validator on the default schedules") {
    const ScheduleReport r = validate_schedules(Schedules{});
    CHECK(r.ok());
    CHECK(r.a_diverges);
    CHECK(r.b_diverges);
    CHECK(r.ratio_vanishes);
    CHECK(r.step_square_summable);
    CHECK_FALSE(r.hessian_square_summable);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0] == "Σ(b/δ²)² diverges (2(β−2γ) = 0.45 ≤ 1)");
  }

  TEST_CASE("validator flags each condition") {
    Schedules s;
    s.alpha = 0.5;
    s.beta = 0.7;
    ScheduleReport r = validate_schedules(s);
    CHECK_FALSE(r.ratio_vanishes);
    CHECK_FALSE(r.step_square_summable);
    CHECK(r.warnings.size() == 3);

    s = Schedules{};
    s.alpha = 1.2;
    s.beta = 1.1;
    s.gamma = 0.01;
    r = validate_schedules(s);
    CHECK_FALSE(r.a_diverges);
    CHECK_FALSE(r.b_diverges);
    CHECK(r.hessian_square_summable);
    CHECK(r.warnings.size() == 2);

    s = Schedules{};
    s.alpha = 0.0;
    s.gamma = -0.1;
    s.a0 = -1.0;
    s.b_offset = -2.0;
    r = validate_schedules(s);
    CHECK_FALSE(r.ok());
    CHECK(r.errors.size() == 4);
  }

  TEST_CASE("theta operator examples") {
    CHECK(theta_operator(diag({2, 4}), 0.1).isApprox(diag({2, 4})));
    CHECK(theta_operator(diag({-1, 3}), 0.1).isApprox(diag({0.1, 3})));
    CHECK(theta_operator(Mat::Zero(2, 2), 0.1).isApprox(0.1 * Mat::Identity(2, 2)));
    CHECK_THROWS_AS(theta_operator(diag({1, 1}), 0.0), std::invalid_argument);
    Mat bad = diag({1, 1});
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(theta_operator(bad, 0.1), NumericalError);
  }

  TEST_CASE("theta operator bounds on random symmetric matrices") {
    RandomStream s(31);
    for (int t = 0; t < 500; ++t) {
      const int d = 2 + static_cast<int>(s.index(5));
      Mat a(d, d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) a(i, j) = 3.0 * s.normal();
      }
      const Mat h = 0.5 * (a + a.transpose());
      const double eps = 0.05 + s.uniform(0.0, 1.0);
      const Mat th = theta_operator(h, eps);
      CHECK(th == th.transpose());
      Eigen::SelfAdjointEigenSolver<Mat> eig(th);
      CHECK(eig.eigenvalues().minCoeff() >= eps * (1.0 - 1e-12));
      CHECK(th.inverse().operatorNorm() <= (1.0 / eps) * (1.0 + 1e-9));
      const ClampedEigen ce = clamp_eigen(h, eps);
      const Vec rhs = Vec::Random(d);
      CHECK((th * ce.solve(rhs) - rhs).norm() < 1e-9 * std::max(1.0, rhs.norm() / eps));
    }
  }

  TEST_CASE("projection box") {
    const ProjectionBox box = ProjectionBox::uniform(2, -1.0, 1.0);
    const Vec inside = vec({0.5, -0.2});
    CHECK(box.project(inside) == inside);
    const Vec outside = vec({3.0, -7.0});
    CHECK(box.project(outside) == vec({1.0, -1.0}));
    CHECK(box.project(box.project(outside)) == box.project(outside));
    CHECK(box.contains(box.project(outside)));
    CHECK_THROWS_AS(ProjectionBox::uniform(2, 1.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(ProjectionBox(vec({0, 0}), vec({1})), std::invalid_argument);
  }

  TEST_CASE("iteration costs") {
    NewtonOptions o;
    for (int k = 1; k <= 5; ++k) {
      o.k = k;
      o.reuse = true;
      CHECK(newton_iteration_cost(o) == static_cast<std::uint64_t>(2 * k + 1));
      o.reuse = false;
      CHECK(newton_iteration_cost(o) == static_cast<std::uint64_t>((k + 1) + (2 * k + 1)));
      CHECK(gradient_iteration_cost(k) == static_cast<std::uint64_t>(k + 1));
    }
  }

  TEST_CASE("averaged hessian: b = 1 keeps the latest sample, b = 1/n the running mean") {
    const Objective f = rastrigin(2);
    const auto spec = PerturbationSpec::gaussian(2);
    const ProjectionBox box = ProjectionBox::uniform(2, -5.12, 5.12);
    for (bool running_mean : {false, true}) {
      NewtonOptions o;
      o.k = 2;
      o.schedules = constant_schedules(0.0, 1.0, 0.1);  // a = 0 freezes theta
      if (running_mean) o.schedules.beta = 1.0;         // b(n) = 1/n
      BudgetedOracle oracle(f, NoiseModel::none(), RandomStream(0));
      BudgetedOracle replay(f, NoiseModel::none(), RandomStream(0));
      RandomStream perturbations(8), replay_stream(8);
      NewtonState state{vec({0.3, 0.6}), Mat::Identity(2, 2), 0};
      Mat sum = Mat::Zero(2, 2), last;
      for (int n = 1; n <= 20; ++n) {
        state = newton_step(state, oracle, o, box, spec, perturbations);
        last = estimate_hessian(replay, state.theta, sample(spec, replay_stream), 0.1, 2, 2, spec).value;
        sum += last;
        CHECK(state.n == static_cast<std::uint64_t>(n));
        CHECK(state.hbar == state.hbar.transpose());
        if (running_mean) {
          CHECK((state.hbar - sum / n).norm() < 1e-9 * (1.0 + sum.norm()));
        } else {
          CHECK((state.hbar - last).norm() < 1e-12 * (1.0 + last.norm()));
        }
      }
    }
  }

  TEST_CASE("with Hbar = I the step is minus the gradient estimate") {
    const Objective f = quadratic(Mat::Identity(2, 2), Vec::Zero(2));
    const auto spec = PerturbationSpec::gaussian(2);
    const ProjectionBox box = ProjectionBox::uniform(2, -100.0, 100.0);
    NewtonOptions o;
    o.schedules = constant_schedules(1.0, 0.0, 0.1);  // b = 0 keeps Hbar = I
    const Vec theta = vec({1, 1});
    BudgetedOracle oracle(f, NoiseModel::none(), RandomStream(0));
    BudgetedOracle replay(f, NoiseModel::none(), RandomStream(0));
    RandomStream perturbations(44), replay_stream(44);
    constexpr int n = 20000;
    Vec sum = Vec::Zero(2), sumsq = Vec::Zero(2);
    for (int i = 0; i < n; ++i) {
      const NewtonState next = newton_step({theta, Mat::Identity(2, 2), 0}, oracle, o, box, spec, perturbations);
      const Vec g = estimate_gradient(replay, theta, sample(spec, replay_stream), 0.1, 1, spec).value;
      CHECK((next.theta - (theta - g)).norm() < 1e-12);
      CHECK(next.hbar == Mat::Identity(2, 2));
      sum += next.theta;
      sumsq += next.theta.cwiseAbs2();
    }
    // the exact Newton step lands on the minimiser in expectation
    const Vec mean = sum / n;
    const Vec se = ((sumsq / n - mean.cwiseAbs2()) / n).cwiseSqrt();
    CHECK(std::abs(mean[0]) < 4.0 * se[0]);
    CHECK(std::abs(mean[1]) < 4.0 * se[1]);
  }

  TEST_CASE("outward steps stay on the boundary") {
    const Objective f = linear(vec({-5, 0}));  // descent pushes theta_1 up
    const auto spec = PerturbationSpec::gaussian(2);
    const ProjectionBox box = ProjectionBox::uniform(2, -1.0, 1.0);
    NewtonOptions o;
    o.schedules = constant_schedules(1.0, 0.0, 0.1);
    BudgetedOracle oracle(f, NoiseModel::none(), RandomStream(0));
    RandomStream perturbations(2);
    NewtonState state{vec({1.0, 0.0}), Mat::Identity(2, 2), 0};
    for (int i = 0; i < 50; ++i) {
      state = newton_step(state, oracle, o, box, spec, perturbations);
      CHECK(box.contains(state.theta));
    }
  }

  TEST_CASE("an unaffordable step throws and leaves the counter at what was spent") {
    BudgetedOracle oracle(rastrigin(2), NoiseModel::none(), RandomStream(0), 2);
    RandomStream perturbations(1);
    const NewtonState state{vec({1, 1}), Mat::Identity(2, 2), 0};
    CHECK_THROWS_AS(newton_step(state, oracle, NewtonOptions{}, ProjectionBox::uniform(2, -5, 5),
                                PerturbationSpec::gaussian(2), perturbations),
                    BudgetExhausted);
    CHECK(oracle.used() == 2);
  }

  TEST_CASE("run on a noisy quadratic") {
    RunConfig c;
    c.objective = quadratic(diag({2, 4}), Vec::Zero(2));
    c.perturbation = PerturbationSpec::gaussian(2);
    c.budget = 3000;
    int converged = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      c.seed = seed;
      const RunRecord r = run_newton(c);
      CHECK(r.evals_used == r.iterations * 3);
      CHECK(r.evals_used == 3000);
      CHECK(r.final_parameter_error.has_value());
      const double g0 = c.objective.gradient(r.initial).norm();
      const double gt = c.objective.gradient(r.final_theta).norm();
      if (gt < g0 / 10.0) ++converged;
      CHECK(r.initial.minCoeff() >= 2.0);
      CHECK(r.initial.maxCoeff() <= 3.0);
    }
    CHECK(converged >= 8);
  }

  TEST_CASE("run accounting and errors") {
    RunConfig c;
    c.objective = rastrigin(3);
    c.perturbation = PerturbationSpec::gaussian(3);
    c.options.k = 2;
    c.budget = 1003;
    c.trajectory_stride = 1;
    const RunRecord r = run_newton(c);
    CHECK(r.iterations == 200);
    CHECK(r.evals_used == 1000);
    CHECK(r.trajectory.size() == 201);
    const ProjectionBox box = ProjectionBox::uniform(3, c.box_lower, c.box_upper);
    for (const Vec& t : r.trajectory) CHECK(box.contains(t));

    const RunRecord again = run_newton(c);
    CHECK(again.final_theta == r.final_theta);

    c.options.reuse = false;
    const RunRecord no_reuse = run_newton(c);
    CHECK(no_reuse.evals_used == no_reuse.iterations * 8);
    CHECK(no_reuse.evals_used + 8 > c.budget);

    c.algorithm = Algorithm::GradientOnly;
    const RunRecord grad_only = run_newton(c);
    CHECK(grad_only.evals_used == grad_only.iterations * 3);
    CHECK(grad_only.evals_used + 3 > c.budget);

    c.budget = 0;
    CHECK_THROWS_AS(run_newton(c), std::invalid_argument);
    c.budget = 2;
    CHECK_THROWS_AS(run_newton(c), std::invalid_argument);
    c.budget = 100;
    c.options.k = 0;
    CHECK_THROWS_AS(run_newton(c), std::invalid_argument);
    c.options.k = 1;
    c.options.schedules.alpha = -1.0;
    CHECK_THROWS_AS(run_newton(c), std::invalid_argument);
    c.options.schedules = Schedules{};
    c.box_lower = 6.0;
    CHECK_THROWS_AS(run_newton(c), std::invalid_argument);
  }
}
