// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria. An optional argument selects a single criterion.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "grdsa/config.hpp"
#include "grdsa/cubic.hpp"
#include "grdsa/estimators.hpp"
#include "grdsa/harness.hpp"
#include "grdsa/newton.hpp"
#include "grdsa/stencils.hpp"

using namespace grdsa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double lambda_min(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[0];
}

Outcome stencil_certification() {
  const auto start = Clock::now();
  const IdentityReport report = verify_identities(12);
  const double elapsed = seconds_since(start);
  // every required identity must be present for every k, not just pass
  std::set<std::string> seen;
  for (const auto& c : report.checks) {
    if (c.id.rfind("unequal", 0) == 0) continue;
    seen.insert(fmt::format("{}/{}/{}", c.id, c.k, c.q));
  }
  std::size_t missing = 0;
  for (int k = 1; k <= 12; ++k) {
    for (const char* id : {"weights.harmonic", "weights.unit", "taylor.constant", "taylor.first", "taylor.second"}) {
      bool found = false;
      for (const auto& key : seen) found = found || key.rfind(fmt::format("{}/{}/", id, k), 0) == 0;
      if (!found) ++missing;
    }
    for (int q = 1; q < k; ++q) missing += seen.count(fmt::format("weights.vanish/{}/{}", k, q)) ? 0 : 1;
    for (int q = 3; q <= k; ++q) missing += seen.count(fmt::format("taylor.higher/{}/{}", k, q)) ? 0 : 1;
  }
  return {report.all_pass() && missing == 0 && elapsed < 5.0,
          fmt::format("{} exact checks, {} failures, {} missing, {:.3f} s", report.checks.size(), report.failures(),
                      missing, elapsed)};
}

Outcome printed_stencils() {
  const std::vector<std::pair<int, std::vector<int>>> tables{
      {1, {1, -2, 1}}, {4, {9, -24, 22, -8, 1}}, {36, {121, -396, 522, -368, 153, -36, 4}}};
  bool pass = true;
  std::string detail;
  for (int k = 1; k <= 3; ++k) {
    const auto& [denominator, numerators] = tables[k - 1];
    const HessStencil h = hess_stencil(k, k);
    bool equal = h.weights.size() == numerators.size();
    for (std::size_t i = 0; equal && i < numerators.size(); ++i) {
      equal = h.weights[i].weight == Rational(numerators[i], denominator);
    }
    pass = pass && equal;
    detail += fmt::format("k={} {}; ", k, equal ? "exact" : "MISMATCH");
  }
  return {pass, detail};
}

Outcome unbiased_on_quadratic() {
  const auto start = Clock::now();
  const Mat a = vec({2, 4}).asDiagonal();
  const Objective f = quadratic(a, Vec::Zero(2));
  const auto spec = PerturbationSpec::gaussian(2);
  const Vec theta = vec({0.5, -1.0});
  constexpr int n = 1000000;
  bool pass = true;
  std::string detail;
  for (ScalingMode mode : {ScalingMode::MomentMatched, ScalingMode::PaperLiteral}) {
    BudgetedOracle oracle(f, NoiseModel::none(), RandomStream(0));
    RandomStream s(2718);
    Mat sum = Mat::Zero(2, 2), sumsq = Mat::Zero(2, 2);
    for (int i = 0; i < n; ++i) {
      const Mat h = estimate_hessian(oracle, theta, sample(spec, s), 0.5, 1, 1, spec, mode).value;
      sum += h;
      sumsq += h.cwiseAbs2();
    }
    const Mat mean = sum / n;
    const Mat se = ((sumsq / n - mean.cwiseAbs2()) / n).cwiseSqrt();
    const Mat target = mode == ScalingMode::MomentMatched ? a : Mat(2.0 * a);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(mean(i, j) - target(i, j)) / se(i, j));
    }
    pass = pass && worst < 4.0;
    detail += fmt::format("{} mean diag ({:.4f}, {:.4f}) vs {}A, worst {:.2f} SE; ",
                          mode == ScalingMode::MomentMatched ? "corrected" : "literal", mean(0, 0), mean(1, 1),
                          mode == ScalingMode::MomentMatched ? "" : "2", worst);
  }
  const double elapsed = seconds_since(start);
  return {pass && elapsed < 30.0, detail + fmt::format("{:.1f} s", elapsed)};
}

Outcome bias_slopes() {
  const auto start = Clock::now();
  auto spec = [](EstimatorKind kind, int k1, int k2) {
    BiasSweepSpec s;
    s.kind = kind;
    s.k1 = k1;
    s.k2 = k2;
    s.fixture = smooth_exp_sin();
    s.point = vec({0.3, 0.7});
    s.perturbation = PerturbationSpec::gaussian(2);
    s.deltas = {0.4, 0.2, 0.1, 0.05};
    s.samples = 100000;
    s.seed = 20;
    return s;
  };
  bool pass = true;
  std::string detail;
  for (auto kind : {EstimatorKind::Gradient, EstimatorKind::Hessian}) {
    for (int k = 1; k <= 3; ++k) {
      const BiasSweepRecord r = run_bias_sweep(spec(kind, k, k));
      const bool ok = r.slope_mean >= k - 0.3 && r.slope_pathwise >= k - 0.3;
      pass = pass && ok;
      detail += fmt::format("{}{} {:.2f}/{:.2f}{}; ", kind == EstimatorKind::Gradient ? "g" : "H", k, r.slope_mean,
                            r.slope_pathwise, ok ? "" : " LOW");
    }
  }
  const BiasSweepRecord equal = run_bias_sweep(spec(EstimatorKind::Hessian, 1, 1));
  const BiasSweepRecord unequal = run_bias_sweep(spec(EstimatorKind::Hessian, 1, 3));
  const bool capped = unequal.slope_pathwise <= 1.5;
  const bool no_gain = std::abs(unequal.slope_mean - equal.slope_mean) <= 0.3;
  pass = pass && capped && no_gain;
  const double elapsed = seconds_since(start);
  detail += fmt::format("H(1,3) pathwise {:.2f} (<= 1.5), mean {:.2f} vs H(1,1) mean {:.2f}; {:.1f} s",
                        unequal.slope_pathwise, unequal.slope_mean, equal.slope_mean, elapsed);
  return {pass && elapsed < 120.0, detail};
}

Outcome variance_scaling() {
  const Objective f = quadratic(vec({2, 4}).asDiagonal(), Vec::Zero(2));
  const auto spec = PerturbationSpec::gaussian(2);
  const NoiseModel noise = NoiseModel::linear_gaussian(0.001);
  const Vec theta = vec({1, 1});
  const VarianceResult small = hessian_variance(f, noise, theta, spec, 0.002, 1, 200000, 31);
  const VarianceResult large = hessian_variance(f, noise, theta, spec, 0.004, 1, 200000, 31);
  const double ratio = small.total_variance / large.total_variance;
  return {ratio >= 8.0 && ratio <= 32.0,
          fmt::format("var(delta=0.002) / var(delta=0.004) = {:.2f} (nominal 16)", ratio)};
}

Outcome table_ordering() {
  const auto start = Clock::now();
  ExperimentConfig c;
  c.objective = "rastrigin";
  c.seed = 1;
  c.bench.methods = {"G2SF-9", "G2SF-3", "GSF-5"};
  c.bench.dims = {5, 10};
  c.bench.budgets = {5000};
  c.bench.seeds = 10;
  const TableResult r = run_table(c);
  std::map<std::pair<std::string, int>, double> mean;
  std::string detail;
  for (const auto& cell : r.cells) {
    mean[{cell.method, cell.dim}] = cell.runs == 10 ? cell.mean : NAN;
    detail += fmt::format("{} d={} {:.3f}±{:.3f}; ", cell.method, cell.dim, cell.mean, cell.sd);
  }
  bool pass = true;
  for (int d : {5, 10}) {
    const bool vs3 = mean[{"G2SF-9", d}] < mean[{"G2SF-3", d}];
    const bool vs5 = mean[{"G2SF-9", d}] < mean[{"GSF-5", d}];
    pass = pass && vs3 && vs5;
    if (!vs3) detail += fmt::format("d={}: G2SF-9 !< G2SF-3; ", d);
    if (!vs5) detail += fmt::format("d={}: G2SF-9 !< GSF-5; ", d);
  }
  const double band = mean[{"G2SF-9", 5}];
  const bool in_band = band >= 0.03 && band <= 0.45;
  if (!in_band) detail += fmt::format("G2SF-9 d=5 mean {:.3f} outside [0.03, 0.45]; ", band);
  const double elapsed = seconds_since(start);
  return {pass && in_band && elapsed < 300.0, detail + fmt::format("{:.1f} s", elapsed)};
}

Outcome cubic_oracle() {
  const auto start = Clock::now();
  RandomStream s(404);
  double worst_gap = -1e300, worst_residual = 0.0;
  int failures = 0;
  for (int t = 0; t < 100; ++t) {
    CubicModel m;
    m.g = vec({s.normal(), s.normal()});
    const double off = s.normal();
    Mat h(2, 2);
    h << 2.0 * s.normal(), off, off, 2.0 * s.normal();
    m.h = h;
    m.alpha = s.uniform(0.5, 5.0);
    // the solver tolerance is relative to max(1, |g|); ask for an absolute 1e-8
    const Vec x = solve_cubic_subproblem(m, 1e-8 / std::max(1.0, m.g.norm()));
    double best = 1e300;
    for (int i = 0; i <= 400; ++i) {
      for (int j = 0; j <= 400; ++j) best = std::min(best, m.value(vec({-3.0 + 0.015 * i, -3.0 + 0.015 * j})));
    }
    const double gap = m.value(x) - best;
    const double residual = m.stationarity(x).norm();
    worst_gap = std::max(worst_gap, gap);
    worst_residual = std::max(worst_residual, residual);
    if (gap > 1e-3 || residual > 1e-8) ++failures;
  }
  const double elapsed = seconds_since(start);
  return {failures == 0 && elapsed < 60.0,
          fmt::format("100 instances, worst objective minus grid minimum {:.2e}, worst residual {:.2e}, {:.1f} s",
                      worst_gap, worst_residual, elapsed)};
}

Outcome saddle_escape() {
  const auto start = Clock::now();
  const Vec start_point = vec({0.01, 0.01});
  const Objective f = saddle_quartic();
  int crzon_escapes = 0, newton_failures = 0;
  std::uint64_t crzon_evals = 0;
  std::string lambdas_crzon, lambdas_newton;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CrzonRunConfig run;
    run.objective = f;
    run.noise = NoiseModel::linear_gaussian(0.001);
    run.perturbation = PerturbationSpec::gaussian(2);
    run.initial = start_point;
    run.seed = seed;
    run.cubic.k = 1;
    run.cubic.n = 30;
    run.cubic.m = 200;
    run.cubic.b = 400;
    run.cubic.delta = 0.05;
    run.cubic.hessian_lipschitz = *f.hessian_lipschitz;
    const SospReport r = run_crzon(run);
    crzon_evals = r.evals_used;
    if (*r.lambda_min >= -0.5) ++crzon_escapes;
    lambdas_crzon += fmt::format("{:.2f} ", *r.lambda_min);

    RunConfig newton;
    newton.objective = f;
    newton.noise = NoiseModel::linear_gaussian(0.001);
    newton.perturbation = PerturbationSpec::gaussian(2);
    newton.initial = start_point;
    newton.seed = seed;
    newton.options.k = 1;
    newton.budget = r.evals_used;
    const RunRecord nr = run_newton(newton);
    const double lm = lambda_min(f.hessian(nr.final_theta));
    if (lm < -0.5) ++newton_failures;
    lambdas_newton += fmt::format("{:.2f} ", lm);
  }
  const double elapsed = seconds_since(start);
  const bool crzon_ok = crzon_escapes >= 8;
  const bool newton_ok = newton_failures >= 5;
  return {crzon_ok && newton_ok && elapsed < 120.0,
          fmt::format("CRZON lambda_min >= -0.5 in {}/10 [{}]; Newton (same {} evaluations) fails in {}/10 "
                      "(needs >= 5) [{}]; {:.1f} s",
                      crzon_escapes, lambdas_crzon, crzon_evals, newton_failures, lambdas_newton, elapsed)};
}

Outcome budget_identities() {
  bool pass = true;
  std::string detail;
  for (int k = 1; k <= 4; ++k) {
    // per-iteration counter differences
    BudgetedOracle oracle(rastrigin(3), NoiseModel::linear_gaussian(0.001), RandomStream(k));
    NewtonOptions o;
    o.k = k;
    RandomStream perturbations(100 + k);
    NewtonState state{Vec::Constant(3, 2.5), Mat::Identity(3, 3), 0};
    const ProjectionBox box = ProjectionBox::uniform(3, -5.12, 5.12);
    for (int i = 0; i < 25; ++i) {
      const std::uint64_t before = oracle.used();
      state = newton_step(state, oracle, o, box, PerturbationSpec::gaussian(3), perturbations);
      pass = pass && oracle.used() - before == static_cast<std::uint64_t>(2 * k + 1);
    }
    RunConfig run;
    run.objective = rastrigin(3);
    run.perturbation = PerturbationSpec::gaussian(3);
    run.options.k = k;
    run.budget = 1000;
    const RunRecord r = run_newton(run);
    pass = pass && r.evals_used == r.iterations * (2 * k + 1);
  }
  detail += "Newton 2k+1 per iteration for k=1..4; ";
  for (auto [k, n, m, b] : std::vector<std::array<std::uint64_t, 4>>{{1, 3, 20, 40}, {2, 5, 64, 16}, {3, 2, 7, 9}}) {
    CrzonRunConfig run;
    run.objective = saddle_quartic();
    run.perturbation = PerturbationSpec::gaussian(2);
    run.initial = vec({0.01, 0.01});
    run.cubic.k = static_cast<int>(k);
    run.cubic.n = n;
    run.cubic.m = m;
    run.cubic.b = b;
    run.cubic.delta = 0.05;
    run.cubic.hessian_lipschitz = 6.0;
    const SospReport r = run_crzon(run);
    const std::uint64_t expected = n * (m * (k + 1) + b * (2 * k + 1));
    pass = pass && r.evals_used == expected;
    detail += fmt::format("CRZON k={} N={} m={} b={}: {} = {}; ", k, n, m, b, r.evals_used, expected);
  }
  return {pass, detail};
}

Outcome schedule_validator() {
  const ScheduleReport r = validate_schedules(Schedules{});
  ExperimentConfig c;
  c.budget = 5000;
  const ValidationReport v = validate_config(c);
  const std::string expected = "Σ(b/δ²)² diverges (2(β−2γ) = 0.45 ≤ 1)";
  const bool pass = r.ok() && r.warnings.size() == 1 && r.warnings[0] == expected && v.ok() &&
                    v.warnings.size() == 1 && v.warnings[0] == expected;
  std::string detail = fmt::format("{} warning(s)", r.warnings.size());
  for (const auto& w : r.warnings) detail += ": " + w;
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"stencil certification", stencil_certification},
      {"printed stencil tables", printed_stencils},
      {"unbiased on quadratics", unbiased_on_quadratic},
      {"bias-order slopes", bias_slopes},
      {"variance scaling", variance_scaling},
      {"Rastrigin table ordering", table_ordering},
      {"cubic subproblem vs grid", cubic_oracle},
      {"saddle escape", saddle_escape},
      {"budget accounting", budget_identities},
      {"schedule validator", schedule_validator},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && only != static_cast<int>(i + 1)) continue;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failed;
    std::cout << fmt::format("{} [{:>2}] {}: {}", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, out.detail)
              << std::endl;
  }
  return failed;
}
