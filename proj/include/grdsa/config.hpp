#pragma once

// INI-style experiment configuration. Top-level keys come first, then
// [section] blocks; '#' and ';' start comments. Unknown keys are rejected.
//
//   objective = rastrigin        # rastrigin | quadratic | saddle | quartic | smooth
//   dim = 5
//   budget = 5000
//   seed = 1
//   [noise]     sigma
//   [perturb]   family (gaussian | uniform), eta
//   [estimator] k, k1, k2, reuse, paper_literal_scaling, max_order
//   [schedule]  a0, A, alpha, b0, B, beta, delta0, gamma
//   [newton]    algorithm (newton | gradient), eps_pd, box_lower, box_upper, stride
//   [init]      lower, upper (theta_0 ~ U[lower, upper]^d), point (fixed theta_0)
//   [quadratic] a (row-major), b
//   [crzon]     epsilon, prefactor_N, prefactor_m, prefactor_b, delta_prefactor,
//               N, m, b, delta, alpha, L_H, reuse, tol
//   [bench]     methods, dims, budgets, seeds, threads, out, summary
//   [bias]      kind (grad | hess), k1, k2, fixture, point, deltas, samples, out
//
// Lists are comma or whitespace separated.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "grdsa/cubic.hpp"
#include "grdsa/newton.hpp"
#include "grdsa/oracle.hpp"
#include "grdsa/perturb.hpp"
#include "grdsa/stencils.hpp"

namespace grdsa {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CrzonSettings {
  std::optional<double> epsilon;
  CubicPrefactors prefactors;
  std::optional<std::uint64_t> n;
  std::optional<std::uint64_t> m;
  std::optional<std::uint64_t> b;
  std::optional<double> delta;
  std::optional<double> alpha;
  std::optional<double> hessian_lipschitz;
  bool reuse = false;
  double tol = kCubicTolerance;
};

struct BenchSettings {
  std::vector<std::string> methods{"G2SF-3", "G2SF-9", "GSF-5"};
  std::vector<int> dims{5, 10};
  std::vector<std::uint64_t> budgets{5000};
  int seeds = 10;
  int threads = 0;  // 0: hardware concurrency
  std::string out;
  std::string summary;
};

struct BiasSettings {
  std::string kind = "hess";
  int k1 = 1;
  std::optional<int> k2;
  std::string fixture = "smooth";
  std::optional<Vec> point;
  std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
  std::uint64_t samples = 100000;
  std::string out;
};

struct ExperimentConfig {
  std::string objective = "rastrigin";
  int dim = 2;
  std::optional<std::uint64_t> budget;
  std::uint64_t seed = 0;

  double sigma = 0.001;
  PerturbationFamily family = PerturbationFamily::Gaussian;
  double eta = 1.0;

  int k = 1;
  std::optional<int> k1;
  std::optional<int> k2;
  bool reuse = true;
  bool paper_literal_scaling = false;
  int max_order = kDefaultMaxOrder;

  Schedules schedules;
  Algorithm algorithm = Algorithm::Newton;
  double eps_pd = 0.1;
  double box_lower = -5.12;
  double box_upper = 5.12;
  double init_lower = 2.0;
  double init_upper = 3.0;
  std::optional<Vec> initial;
  std::uint64_t stride = 0;

  std::optional<Mat> quadratic_a;
  std::optional<Vec> quadratic_b;

  CrzonSettings crzon;
  BenchSettings bench;
  BiasSettings bias;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Builds the named objective; "quadratic" uses [quadratic] or defaults to
/// A = I, b = 0.
Objective make_objective(const std::string& name, int dim, const ExperimentConfig& config);
Objective make_objective(const ExperimentConfig& config);
PerturbationSpec make_perturbation(const ExperimentConfig& config, int dim);
PerturbationSpec make_perturbation(PerturbationFamily family, double eta, int dim);
NoiseModel make_noise(const ExperimentConfig& config);
ScalingMode make_scaling(const ExperimentConfig& config);

RunConfig make_run_config(const ExperimentConfig& config, std::uint64_t seed);
CubicConfig make_cubic_config(const ExperimentConfig& config, const Objective& objective);
CrzonRunConfig make_crzon_config(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace grdsa
