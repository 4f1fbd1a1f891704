#include "grdsa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <regex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "grdsa/estimators.hpp"
#include "grdsa/stencils.hpp"

namespace grdsa {

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls job(i) for i in [0, count) on `threads` workers.
template <typename Job>
void parallel_for(std::size_t count, int threads, Job&& job) {
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(resolve_threads(threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

EstimatorKind parse_kind(const std::string& text) {
  if (text == "grad" || text == "gradient") return EstimatorKind::Gradient;
  if (text == "hess" || text == "hessian") return EstimatorKind::Hessian;
  throw ConfigError("bias.kind: expected grad or hess, got '" + text + "'");
}

}  // namespace

MethodSpec parse_method(const std::string& label) {
  static const std::regex pattern(R"(^(G2SF|G2R|GSF|GR)-([0-9]+)$)");
  std::smatch m;
  if (!std::regex_match(label, m, pattern)) {
    throw ConfigError("unknown method '" + label + "' (expected G2SF-n, G2R-n, GSF-n or GR-n)");
  }
  const std::string family = m[1];
  const int measurements = std::stoi(m[2]);
  MethodSpec spec;
  spec.label = label;
  spec.family = (family == "G2R" || family == "GR") ? PerturbationFamily::Uniform : PerturbationFamily::Gaussian;
  if (family == "G2SF" || family == "G2R") {
    if (measurements < 3 || measurements % 2 == 0) {
      throw ConfigError("method '" + label + "': Newton methods use 2k+1 measurements (odd, >= 3)");
    }
    spec.algorithm = Algorithm::Newton;
    spec.k = (measurements - 1) / 2;
  } else {
    if (measurements < 2) throw ConfigError("method '" + label + "': gradient methods use k+1 >= 2 measurements");
    spec.algorithm = Algorithm::GradientOnly;
    spec.k = measurements - 1;
  }
  return spec;
}

TableResult run_table(const ExperimentConfig& config) {
  const BenchSettings& bench = config.bench;
  if (bench.methods.empty() || bench.dims.empty() || bench.budgets.empty()) {
    throw ConfigError("bench: methods, dims and budgets must be non-empty");
  }
  if (bench.seeds < 1) throw ConfigError("bench: seeds must be >= 1");
  std::vector<MethodSpec> methods;
  for (const auto& label : bench.methods) methods.push_back(parse_method(label));

  TableResult result;
  for (const auto& method : methods) {
    for (int dim : bench.dims) {
      for (std::uint64_t budget : bench.budgets) {
        for (int s = 0; s < bench.seeds; ++s) {
          TableRun run;
          run.method = method.label;
          run.dim = dim;
          run.budget = budget;
          run.seed = config.seed + static_cast<std::uint64_t>(s);
          run.k = method.k;
          result.runs.push_back(std::move(run));
        }
      }
    }
  }

  parallel_for(result.runs.size(), bench.threads, [&](std::size_t i) {
    TableRun& run = result.runs[i];
    try {
      const MethodSpec method = parse_method(run.method);
      ExperimentConfig cell = config;
      cell.dim = run.dim;
      cell.budget = run.budget;
      cell.k = method.k;
      cell.family = method.family;
      cell.algorithm = method.algorithm;
      if (cell.initial && cell.initial->size() != run.dim) cell.initial.reset();
      run.record = run_newton(make_run_config(cell, run.seed));
    } catch (const std::exception& e) {
      run.error = e.what();
    }
  });

  const auto per_cell = static_cast<std::size_t>(bench.seeds);
  for (std::size_t first = 0; first < result.runs.size(); first += per_cell) {
    const TableRun& head = result.runs[first];
    TableCell cell;
    cell.method = head.method;
    cell.dim = head.dim;
    cell.budget = head.budget;
    std::vector<double> errors;
    for (std::size_t i = first; i < first + per_cell; ++i) {
      const TableRun& run = result.runs[i];
      if (!run.error.empty()) {
        if (cell.error.empty()) cell.error = run.error;
      } else if (run.record && run.record->final_parameter_error) {
        errors.push_back(*run.record->final_parameter_error);
      } else if (cell.error.empty()) {
        cell.error = "objective has no known optimum";
      }
    }
    cell.runs = errors.size();
    if (!errors.empty()) {
      double sum = 0.0;
      for (double e : errors) sum += e;
      cell.mean = sum / static_cast<double>(errors.size());
      if (errors.size() > 1) {
        double ss = 0.0;
        for (double e : errors) ss += (e - cell.mean) * (e - cell.mean);
        cell.sd = std::sqrt(ss / static_cast<double>(errors.size() - 1));
      }
    }
    result.cells.push_back(std::move(cell));
  }
  return result;
}

void write_runs_csv(std::ostream& out, const TableResult& result, bool wall_time) {
  out << "method,dim,budget,seed,k,iterations,evals_used,final_parameter_error,status";
  if (wall_time) out << ",wall_seconds";
  out << '\n';
  for (const auto& run : result.runs) {
    out << run.method << ',' << run.dim << ',' << run.budget << ',' << run.seed << ',' << run.k << ',';
    if (run.record) {
      const RunRecord& r = *run.record;
      out << r.iterations << ',' << r.evals_used << ','
          << (r.final_parameter_error ? num(*r.final_parameter_error) : std::string()) << ",ok";
      if (wall_time) out << ',' << fmt::format("{:.6f}", r.wall_seconds);
    } else {
      out << ",,,error";
      if (wall_time) out << ',';
    }
    out << '\n';
  }
}

void write_cells_csv(std::ostream& out, const TableResult& result) {
  out << "method,dim,budget,runs,mean_parameter_error,sd_parameter_error,status\n";
  for (const auto& cell : result.cells) {
    out << cell.method << ',' << cell.dim << ',' << cell.budget << ',' << cell.runs << ',';
    if (cell.runs > 0) {
      out << num(cell.mean) << ',' << num(cell.sd);
    } else {
      out << ',';
    }
    out << ',' << (cell.error.empty() ? "ok" : "error") << '\n';
  }
}

std::string format_cells(const TableResult& result) {
  std::string out = fmt::format("{:<10} {:>5} {:>8} {:>20} {:>5}\n", "method", "dim", "budget", "parameter error",
                                "runs");
  for (const auto& cell : result.cells) {
    const std::string value =
        cell.runs > 0 ? fmt::format("{:.3f} ± {:.3f}", cell.mean, cell.sd) : std::string("failed");
    out += fmt::format("{:<10} {:>5} {:>8} {:>20} {:>5}", cell.method, cell.dim, cell.budget, value, cell.runs);
    if (!cell.error.empty()) out += "  [" + cell.error + "]";
    out += '\n';
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 paired points");
  double sx = 0.0, sy = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: x values are all equal");
  return sxy / sxx;
}

BiasSweepRecord run_bias_sweep(const BiasSweepSpec& spec) {
  const Objective& f = spec.fixture;
  if (!f.has_derivatives()) throw std::invalid_argument("bias sweep: fixture needs analytic derivatives");
  if (spec.point.size() != f.dim || spec.perturbation.dim() != f.dim) {
    throw std::invalid_argument("bias sweep: point, fixture and perturbation dimensions differ");
  }
  if (spec.deltas.size() < 2) throw std::invalid_argument("bias sweep: need at least two deltas");
  for (std::size_t i = 0; i < spec.deltas.size(); ++i) {
    if (!(spec.deltas[i] > 0.0)) throw std::invalid_argument("bias sweep: deltas must be > 0");
    if (i > 0 && !(spec.deltas[i] < spec.deltas[i - 1])) {
      throw std::invalid_argument("bias sweep: deltas must be strictly decreasing");
    }
  }
  if (spec.samples < 1) throw std::invalid_argument("bias sweep: samples must be >= 1");
  const bool hessian = spec.kind == EstimatorKind::Hessian;
  if (hessian) {
    hess_weights(spec.k1, spec.k2);
  } else {
    grad_weights(spec.k1);
  }

  const int d = f.dim;
  const std::size_t nd = spec.deltas.size();
  const Eigen::Index width = hessian ? d * d : d;
  const int max_shift = hessian ? spec.k1 + spec.k2 : spec.k1;
  const Vec grad = f.gradient(spec.point);
  const Mat hess = f.hessian(spec.point);
  const double factor = gradient_unbias_factor(spec.perturbation);
  const RandomStream root(spec.seed);

  struct Sums {
    std::vector<Vec> sum, sumsq;
    std::vector<double> sq_norm;
  };
  constexpr std::uint64_t kChunk = 4096;
  const std::uint64_t chunks = (spec.samples + kChunk - 1) / kChunk;
  std::vector<Sums> partial(chunks);

  parallel_for(chunks, spec.threads, [&](std::size_t c) {
    Sums s;
    s.sum.assign(nd, Vec::Zero(width));
    s.sumsq.assign(nd, Vec::Zero(width));
    s.sq_norm.assign(nd, 0.0);
    std::vector<double> values(max_shift + 1);
    const std::uint64_t begin = c * kChunk, end = std::min(spec.samples, begin + kChunk);
    for (std::uint64_t i = begin; i < end; ++i) {
      RandomStream stream = root.substream(i);
      const Vec dir = sample(spec.perturbation, stream);
      Vec control;
      Mat scaling;
      if (hessian) {
        scaling = scaling_matrix(spec.perturbation, dir);
        const Mat expected = scaling * dir.dot(hess * dir);
        control = Eigen::Map<const Vec>(expected.data(), width);
      } else {
        control = (factor * dir.dot(grad)) * dir;
      }
      for (std::size_t j = 0; j < nd; ++j) {
        const double delta = spec.deltas[j];
        for (int t = 0; t <= max_shift; ++t) values[t] = f.value(spec.point + (t * delta) * dir);
        Vec residual;
        if (hessian) {
          const Mat est = hessian_from_values(values, dir, delta, spec.k1, spec.k2, spec.perturbation,
                                              ScalingMode::MomentMatched);
          residual = Eigen::Map<const Vec>(est.data(), width) - control;
        } else {
          residual = gradient_from_values(values, dir, delta, spec.k1, spec.perturbation) - control;
        }
        s.sum[j] += residual;
        s.sumsq[j] += residual.cwiseAbs2();
        s.sq_norm[j] += residual.squaredNorm();
      }
    }
    partial[c] = std::move(s);
  });

  BiasSweepRecord rec;
  rec.kind = spec.kind;
  rec.k1 = spec.k1;
  rec.k2 = hessian ? spec.k2 : spec.k1;
  rec.fixture = f.name;
  rec.deltas = spec.deltas;
  rec.samples = spec.samples;
  const auto n = static_cast<double>(spec.samples);
  for (std::size_t j = 0; j < nd; ++j) {
    Vec sum = Vec::Zero(width), sumsq = Vec::Zero(width);
    double sq = 0.0;
    for (const auto& p : partial) {
      sum += p.sum[j];
      sumsq += p.sumsq[j];
      sq += p.sq_norm[j];
    }
    const Vec mean = sum / n;
    const Vec var = (sumsq / n - mean.cwiseAbs2()).cwiseMax(0.0) * (n / std::max(1.0, n - 1.0));
    rec.mean.push_back(mean.norm());
    rec.mean_stderr.push_back(std::sqrt(var.sum() / n));
    rec.pathwise.push_back(std::sqrt(sq / n));
  }
  rec.slope_mean = loglog_slope(rec.deltas, rec.mean);
  rec.slope_pathwise = loglog_slope(rec.deltas, rec.pathwise);
  return rec;
}

BiasSweepSpec make_bias_spec(const ExperimentConfig& config) {
  const BiasSettings& b = config.bias;
  BiasSweepSpec spec;
  spec.kind = parse_kind(b.kind);
  spec.k1 = b.k1;
  spec.k2 = b.k2.value_or(b.k1);
  const bool two_d = b.fixture == "smooth" || b.fixture == "saddle";
  const int dim = b.point ? static_cast<int>(b.point->size()) : (two_d ? 2 : config.dim);
  spec.fixture = make_objective(b.fixture, dim, config);
  if (b.point) {
    spec.point = *b.point;
  } else if (b.fixture == "smooth") {
    spec.point = Vec(2);
    spec.point << 0.3, 0.7;
  } else {
    spec.point = Vec::Ones(dim);
  }
  spec.perturbation = make_perturbation(config, dim);
  spec.deltas = b.deltas;
  spec.samples = b.samples;
  spec.seed = config.seed;
  spec.threads = config.bench.threads;
  return spec;
}

void write_bias_csv(std::ostream& out, const BiasSweepRecord& r) {
  const char* kind = r.kind == EstimatorKind::Hessian ? "hess" : "grad";
  out << "kind,k1,k2,fixture,samples,delta,bias_mean,bias_mean_stderr,bias_pathwise\n";
  for (std::size_t j = 0; j < r.deltas.size(); ++j) {
    out << kind << ',' << r.k1 << ',' << r.k2 << ',' << r.fixture << ',' << r.samples << ',' << num(r.deltas[j])
        << ',' << num(r.mean[j]) << ',' << num(r.mean_stderr[j]) << ',' << num(r.pathwise[j]) << '\n';
  }
}

VarianceResult hessian_variance(const Objective& objective, const NoiseModel& noise, const Vec& theta,
                                const PerturbationSpec& spec, double delta, int k, std::uint64_t samples,
                                std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("hessian_variance: need >= 2 samples");
  const RandomStream root(seed);
  const RandomStream directions = root.substream(0);
  BudgetedOracle oracle(objective, noise, root.substream(1));
  const auto d = theta.size();
  Mat sum = Mat::Zero(d, d), sumsq = Mat::Zero(d, d);
  for (std::uint64_t i = 0; i < samples; ++i) {
    RandomStream stream = directions.substream(i);
    const Vec dir = sample(spec, stream);
    const Mat est = estimate_hessian(oracle, theta, dir, delta, k, k, spec).value;
    sum += est;
    sumsq += est.cwiseAbs2();
  }
  const auto n = static_cast<double>(samples);
  VarianceResult out;
  out.delta = delta;
  out.mean = sum / n;
  out.total_variance = ((sumsq - sum.cwiseAbs2() / n) / (n - 1.0)).sum();
  return out;
}

ValidationReport validate_config(const ExperimentConfig& c) {
  ValidationReport r;
  auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      r.errors.push_back(e.what());
    }
  };

  const ScheduleReport schedules = validate_schedules(c.schedules);
  r.errors.insert(r.errors.end(), schedules.errors.begin(), schedules.errors.end());
  r.warnings.insert(r.warnings.end(), schedules.warnings.begin(), schedules.warnings.end());

  if (!(c.box_lower < c.box_upper)) {
    r.errors.push_back(fmt::format("inverted box bounds (lower {} >= upper {})", c.box_lower, c.box_upper));
  }
  if (!(c.init_lower <= c.init_upper)) {
    r.errors.push_back(fmt::format("inverted start range (lower {} > upper {})", c.init_lower, c.init_upper));
  }
  if (!(c.eps_pd > 0.0)) r.errors.push_back(fmt::format("eps_pd must be > 0 (got {})", c.eps_pd));
  if (!(c.sigma >= 0.0)) r.errors.push_back(fmt::format("noise sigma must be >= 0 (got {})", c.sigma));
  if (c.family == PerturbationFamily::Uniform && !(c.eta > 0.0)) {
    r.errors.push_back(fmt::format("perturb.eta must be > 0 (got {})", c.eta));
  }
  if (c.max_order < 1) r.errors.push_back("estimator.max_order must be >= 1");
  auto order = [&](int k, const char* name) {
    if (k < 1 || k > c.max_order) {
      r.errors.push_back(fmt::format("{} = {} outside the supported range 1..{}", name, k, c.max_order));
    }
  };
  order(c.k, "estimator.k");
  if (c.k1) order(*c.k1, "estimator.k1");
  if (c.k2) order(*c.k2, "estimator.k2");
  check([&] { make_objective(c); });
  if (c.initial && c.initial->size() != c.dim) r.errors.push_back("init.point does not match dim");

  if (c.budget) {
    NewtonOptions options;
    options.k = std::max(1, c.k);
    options.reuse = c.reuse;
    const std::uint64_t cost =
        c.algorithm == Algorithm::Newton ? newton_iteration_cost(options) : gradient_iteration_cost(options.k);
    if (*c.budget < cost) {
      r.errors.push_back(fmt::format("budget {} cannot afford one iteration ({} evaluations)", *c.budget, cost));
    }
  }

  const BenchSettings& b = c.bench;
  if (b.methods.empty() || b.dims.empty() || b.budgets.empty()) {
    r.errors.push_back("bench: methods, dims and budgets must be non-empty");
  }
  if (b.seeds < 1) r.errors.push_back("bench: seeds must be >= 1");
  for (int d : b.dims) {
    if (d < 1) r.errors.push_back(fmt::format("bench: dim {} must be >= 1", d));
  }
  for (const auto& label : b.methods) {
    try {
      const MethodSpec m = parse_method(label);
      order(m.k, label.c_str());
      NewtonOptions options;
      options.k = m.k;
      options.reuse = c.reuse;
      const std::uint64_t cost =
          m.algorithm == Algorithm::Newton ? newton_iteration_cost(options) : gradient_iteration_cost(m.k);
      for (std::uint64_t budget : b.budgets) {
        if (budget < cost) {
          r.errors.push_back(
              fmt::format("bench: budget {} cannot afford one {} iteration ({} evaluations)", budget, label, cost));
        }
      }
    } catch (const std::exception& e) {
      r.errors.push_back(e.what());
    }
  }

  const BiasSettings& bias = c.bias;
  check([&] { parse_kind(bias.kind); });
  order(bias.k1, "bias.k1");
  if (bias.k2) order(*bias.k2, "bias.k2");
  if (bias.samples < 1) r.errors.push_back("bias.samples must be >= 1");
  if (bias.deltas.size() < 2) r.errors.push_back("bias.deltas needs at least two values");
  for (std::size_t i = 0; i < bias.deltas.size(); ++i) {
    if (!(bias.deltas[i] > 0.0) || (i > 0 && !(bias.deltas[i] < bias.deltas[i - 1]))) {
      r.errors.push_back("bias.deltas must be positive and strictly decreasing");
      break;
    }
  }

  const CrzonSettings& z = c.crzon;
  if (z.epsilon || z.n || z.m || z.b || z.delta) {
    check([&] {
      const CubicConfig cubic = make_cubic_config(c, make_objective(c));
      if (c.budget && *c.budget < cubic.step_cost()) {
        r.errors.push_back(fmt::format("crzon: budget {} cannot afford one step ({} evaluations)", *c.budget,
                                       cubic.step_cost()));
      }
    });
  }
  return r;
}

}  // namespace grdsa
