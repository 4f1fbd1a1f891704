#pragma once

// Benchmark tables over (method, dim, budget, seed), estimator bias sweeps
// and configuration checks.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "grdsa/config.hpp"
#include "grdsa/newton.hpp"

namespace grdsa {

/// Table labels: G2SF-(2k+1) and G2R-(2k+1) are Newton with Gaussian and
/// uniform directions; GSF-(k+1) and GR-(k+1) the gradient-only counterparts.
struct MethodSpec {
  std::string label;
  Algorithm algorithm = Algorithm::Newton;
  PerturbationFamily family = PerturbationFamily::Gaussian;
  int k = 1;
};

MethodSpec parse_method(const std::string& label);

struct TableRun {
  std::string method;
  int dim = 0;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  int k = 0;
  std::optional<RunRecord> record;
  std::string error;  // non-empty when the run failed
};

struct TableCell {
  std::string method;
  int dim = 0;
  std::uint64_t budget = 0;
  std::size_t runs = 0;  // successful runs
  double mean = 0.0;
  double sd = 0.0;       // sample standard deviation (n-1); 0 for a single run
  std::string error;     // first failure in the cell, if any
};

struct TableResult {
  std::vector<TableRun> runs;    // method-major, then dim, budget, seed
  std::vector<TableCell> cells;  // same order without the seed axis
};

/// Runs every (method, dim, budget, seed) combination on the config's
/// objective. Seeds are config.seed + 0..seeds-1, so all methods share
/// starting points. Failed runs are recorded, not rethrown.
TableResult run_table(const ExperimentConfig& config);

void write_runs_csv(std::ostream& out, const TableResult& result, bool wall_time = true);
void write_cells_csv(std::ostream& out, const TableResult& result);
std::string format_cells(const TableResult& result);

enum class EstimatorKind { Gradient, Hessian };

struct BiasSweepSpec {
  EstimatorKind kind = EstimatorKind::Hessian;
  int k1 = 1;
  int k2 = 1;  // Hessian only
  Objective fixture;
  Vec point;
  PerturbationSpec perturbation = PerturbationSpec::gaussian(1);
  std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  int threads = 0;
};

/// Bias is measured against the exact linear/quadratic part of each sample:
/// residual = estimate - factor * D (D^T grad) for gradients and
/// estimate - M(D) (D^T H D) for Hessians, with the same directions for every
/// delta. `mean` is the norm of the averaged residual (the bias of the
/// expected estimate); `pathwise` is the root-mean-square residual norm.
struct BiasSweepRecord {
  EstimatorKind kind = EstimatorKind::Hessian;
  int k1 = 0;
  int k2 = 0;
  std::string fixture;
  std::vector<double> deltas;
  std::uint64_t samples = 0;
  std::vector<double> mean;
  std::vector<double> mean_stderr;
  std::vector<double> pathwise;
  double slope_mean = 0.0;
  double slope_pathwise = 0.0;
};

BiasSweepRecord run_bias_sweep(const BiasSweepSpec& spec);
BiasSweepSpec make_bias_spec(const ExperimentConfig& config);
void write_bias_csv(std::ostream& out, const BiasSweepRecord& record);

/// Least-squares slope of log(y) against log(x); NaN if any y <= 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct VarianceResult {
  double delta = 0.0;
  double total_variance = 0.0;  // sum of entrywise sample variances
  Mat mean;
};

/// Single-sample Hessian estimator spread at theta under the given noise.
VarianceResult hessian_variance(const Objective& objective, const NoiseModel& noise, const Vec& theta,
                                const PerturbationSpec& spec, double delta, int k, std::uint64_t samples,
                                std::uint64_t seed);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

/// Schedule conditions, box and start range, budget feasibility, order cap
/// and section-specific checks. Never throws on a bad value.
ValidationReport validate_config(const ExperimentConfig& config);

}  // namespace grdsa
