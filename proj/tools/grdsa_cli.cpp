// grdsa: stencil tables, optimiser runs, benchmarks and config checks.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "grdsa/config.hpp"
#include "grdsa/cubic.hpp"
#include "grdsa/harness.hpp"
#include "grdsa/newton.hpp"
#include "grdsa/stencils.hpp"

using namespace grdsa;
using json = nlohmann::json;

namespace {

/// Writes to the file when a path is given, otherwise to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string csv_num(double v) { return fmt::format("{:.10g}", v); }
std::string csv_opt(const std::optional<double>& v) { return v ? csv_num(*v) : std::string(); }

ExperimentConfig load(const std::string& path) {
  ExperimentConfig config = load_config(path);
  set_order_cap(config.max_order);
  return config;
}

int stencil_print(int k1, std::optional<int> k2, bool as_json) {
  std::vector<StencilWeight> weights;
  std::string title;
  if (k2) {
    weights = hess_stencil(k1, *k2).weights;
    title = fmt::format("hessian stencil k1={} k2={} ({} measurements, divide by delta^2)", k1, *k2, weights.size());
  } else {
    weights = grad_stencil(k1).weights;
    title = fmt::format("gradient stencil k={} ({} measurements, divide by delta)", k1, weights.size());
  }
  if (as_json) {
    json j;
    j["kind"] = k2 ? "hessian" : "gradient";
    j["k1"] = k1;
    if (k2) j["k2"] = *k2;
    for (const auto& w : weights) {
      j["weights"].push_back({{"shift", w.shift}, {"exact", to_string(w.weight)}, {"decimal", to_double(w.weight)}});
    }
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::cout << title << '\n';
  std::cout << fmt::format("{:>5}  {:>16}  {:>22}\n", "shift", "weight", "decimal");
  for (const auto& w : weights) {
    std::cout << fmt::format("{:>5}  {:>16}  {:>22.17g}\n", w.shift, to_string(w.weight), to_double(w.weight));
  }
  return 0;
}

int stencil_verify(int kmax, bool as_json) {
  const IdentityReport report = verify_identities(kmax, std::max(kmax, kDefaultMaxOrder));
  if (as_json) {
    json j;
    j["k_max"] = kmax;
    j["checks"] = json::array();
    for (const auto& c : report.checks) {
      j["checks"].push_back({{"id", c.id},
                             {"k", c.k},
                             {"k2", c.k2},
                             {"q", c.q},
                             {"lhs", to_string(c.lhs)},
                             {"rhs", to_string(c.rhs)},
                             {"pass", c.pass}});
    }
    j["failures"] = report.failures();
    j["all_pass"] = report.all_pass();
    std::cout << j.dump(2) << '\n';
  } else {
    for (const auto& c : report.checks) {
      std::cout << fmt::format("{:<4} {:<16} k={:<3} k2={:<3} q={:<3} {} = {}\n", c.pass ? "pass" : "FAIL", c.id,
                               c.k, c.k2, c.q, to_string(c.lhs), to_string(c.rhs));
    }
    std::cout << fmt::format("{} checks, {} failures\n", report.checks.size(), report.failures());
  }
  return report.all_pass() ? 0 : 1;
}

int newton_run(const std::string& path, int seeds, const std::string& out_path) {
  const ExperimentConfig config = load(path);
  if (seeds < 1) throw std::invalid_argument("--seeds must be >= 1");
  Output out(out_path);
  out.stream() << "seed,k,budget,iterations,final_parameter_error,evals_used\n";
  for (int s = 0; s < seeds; ++s) {
    const RunRecord r = run_newton(make_run_config(config, config.seed + static_cast<std::uint64_t>(s)));
    out.stream() << r.seed << ',' << r.k << ',' << r.budget << ',' << r.iterations << ','
                 << csv_opt(r.final_parameter_error) << ',' << r.evals_used << '\n';
  }
  return 0;
}

int crzon_run(const std::string& path, int seeds, const std::string& out_path) {
  const ExperimentConfig config = load(path);
  if (seeds < 1) throw std::invalid_argument("--seeds must be >= 1");
  Output out(out_path);
  out.stream() << "seed,k,epsilon,N,m,b,delta,evals_used,grad_norm_at_R,lambda_min_at_R\n";
  for (int s = 0; s < seeds; ++s) {
    const SospReport r = run_crzon(make_crzon_config(config, config.seed + static_cast<std::uint64_t>(s)));
    out.stream() << r.seed << ',' << r.k << ',' << (r.epsilon > 0.0 ? csv_num(r.epsilon) : std::string()) << ','
                 << r.n << ',' << r.m << ',' << r.b << ',' << csv_num(r.delta) << ',' << r.evals_used << ','
                 << csv_opt(r.grad_norm) << ',' << csv_opt(r.lambda_min) << '\n';
  }
  return 0;
}

int bench_table(const std::string& path, std::string out_path, std::string summary_path, bool as_json) {
  const ExperimentConfig config = load(path);
  if (out_path.empty()) out_path = config.bench.out;
  if (summary_path.empty()) summary_path = config.bench.summary;
  const TableResult result = run_table(config);
  if (!out_path.empty()) {
    Output out(out_path);
    write_runs_csv(out.stream(), result);
  }
  if (!summary_path.empty()) {
    Output out(summary_path);
    write_cells_csv(out.stream(), result);
  }
  if (as_json) {
    json j = json::array();
    for (const auto& c : result.cells) {
      json cell = {{"method", c.method}, {"dim", c.dim}, {"budget", c.budget}, {"runs", c.runs}};
      if (c.runs > 0) {
        cell["mean"] = c.mean;
        cell["sd"] = c.sd;
      }
      if (!c.error.empty()) cell["error"] = c.error;
      j.push_back(cell);
    }
    std::cout << j.dump(2) << '\n';
  } else if (out_path.empty() && summary_path.empty()) {
    write_cells_csv(std::cout, result);
  } else {
    std::cout << format_cells(result);
  }
  for (const auto& c : result.cells) {
    if (c.runs == 0) return 1;
  }
  return 0;
}

int bench_bias(const std::string& path, std::string out_path, bool as_json) {
  const ExperimentConfig config = load(path);
  if (out_path.empty()) out_path = config.bias.out;
  const BiasSweepRecord r = run_bias_sweep(make_bias_spec(config));
  if (!out_path.empty()) {
    Output out(out_path);
    write_bias_csv(out.stream(), r);
  }
  if (as_json) {
    json j = {{"kind", r.kind == EstimatorKind::Hessian ? "hess" : "grad"},
              {"k1", r.k1},
              {"k2", r.k2},
              {"fixture", r.fixture},
              {"samples", r.samples},
              {"deltas", r.deltas},
              {"bias_mean", r.mean},
              {"bias_mean_stderr", r.mean_stderr},
              {"bias_pathwise", r.pathwise},
              {"slope_mean", r.slope_mean},
              {"slope_pathwise", r.slope_pathwise}};
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  if (out_path.empty()) write_bias_csv(std::cout, r);
  std::cout << fmt::format("slope_mean {:.3f}\nslope_pathwise {:.3f}\n", r.slope_mean, r.slope_pathwise);
  return 0;
}

int config_validate(const std::string& path, bool as_json) {
  const ExperimentConfig config = load_config(path);
  const ValidationReport report = validate_config(config);
  if (as_json) {
    std::cout << json{{"ok", report.ok()}, {"errors", report.errors}, {"warnings", report.warnings}}.dump(2)
              << '\n';
  } else {
    for (const auto& e : report.errors) std::cout << "error: " << e << '\n';
    for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
    if (report.errors.empty() && report.warnings.empty()) std::cout << "ok\n";
  }
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order gradient and Hessian estimation, stochastic Newton and CRZON"};
  app.require_subcommand(1);
  int code = 0;

  auto* stencil = app.add_subcommand("stencil", "Exact finite-difference weight tables");
  stencil->require_subcommand(1);
  auto* print = stencil->add_subcommand("print", "Print a gradient (k1 only) or Hessian (k1, k2) stencil");
  int k1 = 1;
  std::optional<int> k2;
  bool as_json = false;
  print->add_option("--k1", k1, "Truncation order (first operator)")->required();
  print->add_option("--k2", k2, "Second truncation order; prints the Hessian stencil");
  print->add_flag("--json", as_json, "Structured output");
  print->callback([&] { code = stencil_print(k1, k2, as_json); });

  auto* verify = stencil->add_subcommand("verify", "Certify the combinatorial identities in exact arithmetic");
  int kmax = kDefaultMaxOrder;
  verify->add_option("--kmax", kmax, "Largest order checked")->required()->check(CLI::PositiveNumber);
  verify->add_flag("--json", as_json, "Structured output");
  verify->callback([&] { code = stencil_verify(kmax, as_json); });

  std::string config_path;
  std::string out_path;
  std::string summary_path;
  int seeds = 1;

  auto* newton = app.add_subcommand("newton", "Projected stochastic Newton method");
  newton->require_subcommand(1);
  auto* newton_cmd = newton->add_subcommand("run", "Run over seeds and write one CSV row per seed");
  newton_cmd->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  newton_cmd->add_option("--seeds", seeds, "Number of seeds (config seed + 0..n-1)");
  newton_cmd->add_option("--out", out_path, "CSV output (default stdout)");
  newton_cmd->callback([&] { code = newton_run(config_path, seeds, out_path); });

  auto* crzon = app.add_subcommand("crzon", "Cubic-regularized zeroth-order Newton method");
  crzon->require_subcommand(1);
  auto* crzon_cmd = crzon->add_subcommand("run", "Run over seeds and write one CSV row per seed");
  crzon_cmd->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  crzon_cmd->add_option("--seeds", seeds, "Number of seeds (config seed + 0..n-1)");
  crzon_cmd->add_option("--out", out_path, "CSV output (default stdout)");
  crzon_cmd->callback([&] { code = crzon_run(config_path, seeds, out_path); });

  auto* bench = app.add_subcommand("bench", "Benchmarks");
  bench->require_subcommand(1);
  auto* table = bench->add_subcommand("table", "Parameter-error table over methods, dims, budgets and seeds");
  table->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  table->add_option("--out", out_path, "Per-run CSV (overrides bench.out)");
  table->add_option("--summary", summary_path, "Per-cell CSV (overrides bench.summary)");
  table->add_flag("--json", as_json, "Print the cell summary as JSON");
  table->callback([&] { code = bench_table(config_path, out_path, summary_path, as_json); });

  auto* bias = bench->add_subcommand("bias-sweep", "Estimator bias against delta with a fitted log-log slope");
  bias->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  bias->add_option("--out", out_path, "CSV output (overrides bias.out)");
  bias->add_flag("--json", as_json, "Structured output");
  bias->callback([&] { code = bench_bias(config_path, out_path, as_json); });

  auto* config = app.add_subcommand("config", "Configuration files");
  config->require_subcommand(1);
  auto* validate = config->add_subcommand("validate", "Check schedules, bounds, budgets and orders");
  validate->add_option("file", config_path, "Config file")->required()->check(CLI::ExistingFile);
  validate->add_flag("--json", as_json, "Structured output");
  validate->callback([&] { code = config_validate(config_path, as_json); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return code;
}
