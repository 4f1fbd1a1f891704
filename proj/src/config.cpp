#include "grdsa/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace grdsa {

namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kSections{"noise",     "perturb", "estimator", "schedule", "newton", "init",
                                      "quadratic", "crzon",   "bench",     "bias"};

std::string strip_comments(std::istream& in) {
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    out << line << '\n';
  }
  return out.str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(", \t"), boost::token_compress_on);
  parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
  return parts;
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size()) throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return v;
}

std::uint64_t to_count(const std::string& key, const std::string& text) {
  if (!text.empty() && text[0] == '-') throw ConfigError(key + ": must be >= 0, got " + text);
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size()) throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

int to_int(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(key + ": out of range");
  }
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::to_lower_copy(text);
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

Vec to_vec(const std::string& key, const std::string& text) {
  const auto parts = split_list(text);
  if (parts.empty()) throw ConfigError(key + ": empty list");
  Vec v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(key, parts[i]);
  return v;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& path) {
    const auto node = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'));
    if (!node) return std::nullopt;
    used_.insert(path);
    return boost::trim_copy(*node);
  }

  void read(const std::string& path, double& out) {
    if (auto v = raw(path)) out = to_double(path, *v);
  }
  void read(const std::string& path, std::optional<double>& out) {
    if (auto v = raw(path)) out = to_double(path, *v);
  }
  void read(const std::string& path, int& out) {
    if (auto v = raw(path)) out = to_int(path, *v);
  }
  void read(const std::string& path, std::optional<int>& out) {
    if (auto v = raw(path)) out = to_int(path, *v);
  }
  void read(const std::string& path, std::uint64_t& out) {
    if (auto v = raw(path)) out = to_count(path, *v);
  }
  void read(const std::string& path, std::optional<std::uint64_t>& out) {
    if (auto v = raw(path)) out = to_count(path, *v);
  }
  void read(const std::string& path, bool& out) {
    if (auto v = raw(path)) out = to_bool(path, *v);
  }
  void read(const std::string& path, std::string& out) {
    if (auto v = raw(path)) out = *v;
  }
  void read(const std::string& path, std::optional<Vec>& out) {
    if (auto v = raw(path)) out = to_vec(path, *v);
  }
  void read(const std::string& path, std::vector<double>& out) {
    if (auto v = raw(path)) {
      const Vec x = to_vec(path, *v);
      out.assign(x.data(), x.data() + x.size());
    }
  }
  void read(const std::string& path, std::vector<int>& out) {
    if (auto v = raw(path)) {
      out.clear();
      for (const auto& p : split_list(*v)) out.push_back(to_int(path, p));
    }
  }
  void read(const std::string& path, std::vector<std::uint64_t>& out) {
    if (auto v = raw(path)) {
      out.clear();
      for (const auto& p : split_list(*v)) out.push_back(to_count(path, p));
    }
  }
  void read(const std::string& path, std::vector<std::string>& out) {
    if (auto v = raw(path)) out = split_list(*v);
  }

  void reject_unknown() const {
    for (const auto& [name, node] : tree_) {
      if (node.empty()) {
        if (kSections.count(name) && node.data().empty()) continue;
        if (!used_.count(name)) throw ConfigError("unknown key '" + name + "'");
        continue;
      }
      if (!kSections.count(name)) throw ConfigError("unknown section [" + name + "]");
      for (const auto& [key, child] : node) {
        const std::string path = name + "." + key;
        if (!used_.count(path)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  std::istringstream cleaned(strip_comments(in));
  pt::ptree tree;
  try {
    pt::read_ini(cleaned, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  ExperimentConfig c;
  Reader r(tree);
  r.read("objective", c.objective);
  r.read("dim", c.dim);
  r.read("budget", c.budget);
  r.read("seed", c.seed);

  r.read("noise.sigma", c.sigma);
  if (auto family = r.raw("perturb.family")) {
    try {
      c.family = parse_family(*family);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("perturb.family: ") + e.what());
    }
  }
  r.read("perturb.eta", c.eta);

  r.read("estimator.k", c.k);
  r.read("estimator.k1", c.k1);
  r.read("estimator.k2", c.k2);
  r.read("estimator.reuse", c.reuse);
  r.read("estimator.paper_literal_scaling", c.paper_literal_scaling);
  r.read("estimator.max_order", c.max_order);

  Schedules& s = c.schedules;
  r.read("schedule.a0", s.a0);
  r.read("schedule.A", s.a_offset);
  r.read("schedule.alpha", s.alpha);
  r.read("schedule.b0", s.b0);
  r.read("schedule.B", s.b_offset);
  r.read("schedule.beta", s.beta);
  r.read("schedule.delta0", s.delta0);
  r.read("schedule.gamma", s.gamma);

  if (auto algorithm = r.raw("newton.algorithm")) {
    if (*algorithm == "newton") {
      c.algorithm = Algorithm::Newton;
    } else if (*algorithm == "gradient" || *algorithm == "gradient_only") {
      c.algorithm = Algorithm::GradientOnly;
    } else {
      throw ConfigError("newton.algorithm: expected newton or gradient, got '" + *algorithm + "'");
    }
  }
  r.read("newton.eps_pd", c.eps_pd);
  r.read("newton.box_lower", c.box_lower);
  r.read("newton.box_upper", c.box_upper);
  r.read("newton.stride", c.stride);
  r.read("init.lower", c.init_lower);
  r.read("init.upper", c.init_upper);
  r.read("init.point", c.initial);

  if (auto a = r.raw("quadratic.a")) {
    const Vec flat = to_vec("quadratic.a", *a);
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
    if (n * n != flat.size()) throw ConfigError("quadratic.a: expected n*n entries, got " + std::to_string(flat.size()));
    Mat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = flat[i * n + j];
    }
    c.quadratic_a = m;
  }
  r.read("quadratic.b", c.quadratic_b);

  CrzonSettings& z = c.crzon;
  r.read("crzon.epsilon", z.epsilon);
  r.read("crzon.prefactor_N", z.prefactors.n);
  r.read("crzon.prefactor_m", z.prefactors.m);
  r.read("crzon.prefactor_b", z.prefactors.b);
  r.read("crzon.delta_prefactor", z.prefactors.delta);
  r.read("crzon.N", z.n);
  r.read("crzon.m", z.m);
  r.read("crzon.b", z.b);
  r.read("crzon.delta", z.delta);
  r.read("crzon.alpha", z.alpha);
  r.read("crzon.L_H", z.hessian_lipschitz);
  r.read("crzon.reuse", z.reuse);
  r.read("crzon.tol", z.tol);

  BenchSettings& b = c.bench;
  r.read("bench.methods", b.methods);
  r.read("bench.dims", b.dims);
  r.read("bench.budgets", b.budgets);
  r.read("bench.seeds", b.seeds);
  r.read("bench.threads", b.threads);
  r.read("bench.out", b.out);
  r.read("bench.summary", b.summary);

  BiasSettings& bias = c.bias;
  r.read("bias.kind", bias.kind);
  r.read("bias.k1", bias.k1);
  r.read("bias.k2", bias.k2);
  r.read("bias.fixture", bias.fixture);
  r.read("bias.point", bias.point);
  r.read("bias.deltas", bias.deltas);
  r.read("bias.samples", bias.samples);
  r.read("bias.out", bias.out);

  r.reject_unknown();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Objective make_objective(const std::string& name, int dim, const ExperimentConfig& config) {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  auto fixed_dim = [&](int expected) {
    if (dim != expected) {
      throw ConfigError("objective '" + name + "' is " + std::to_string(expected) + "-dimensional, dim = " +
                        std::to_string(dim));
    }
  };
  if (name == "rastrigin") return rastrigin(dim);
  if (name == "quartic") return quartic(dim);
  if (name == "saddle") {
    fixed_dim(2);
    return saddle_quartic();
  }
  if (name == "smooth") {
    fixed_dim(2);
    return smooth_exp_sin();
  }
  if (name == "quadratic") {
    const Mat a = config.quadratic_a.value_or(Mat::Identity(dim, dim));
    const Vec b = config.quadratic_b.value_or(Vec::Zero(a.rows()));
    if (a.rows() != dim) throw ConfigError("quadratic.a does not match dim");
    return quadratic(a, b);
  }
  throw ConfigError("unknown objective '" + name + "' (expected rastrigin, quadratic, saddle, quartic or smooth)");
}

Objective make_objective(const ExperimentConfig& config) {
  return make_objective(config.objective, config.dim, config);
}

PerturbationSpec make_perturbation(PerturbationFamily family, double eta, int dim) {
  return family == PerturbationFamily::Gaussian ? PerturbationSpec::gaussian(dim)
                                                : PerturbationSpec::uniform(dim, eta);
}

PerturbationSpec make_perturbation(const ExperimentConfig& config, int dim) {
  return make_perturbation(config.family, config.eta, dim);
}

NoiseModel make_noise(const ExperimentConfig& config) {
  return config.sigma == 0.0 ? NoiseModel::none() : NoiseModel::linear_gaussian(config.sigma);
}

ScalingMode make_scaling(const ExperimentConfig& config) {
  return config.paper_literal_scaling ? ScalingMode::PaperLiteral : ScalingMode::MomentMatched;
}

RunConfig make_run_config(const ExperimentConfig& config, std::uint64_t seed) {
  if (!config.budget) throw ConfigError("budget is required");
  RunConfig run;
  run.algorithm = config.algorithm;
  run.objective = make_objective(config);
  run.noise = make_noise(config);
  run.perturbation = make_perturbation(config, config.dim);
  run.options.k = config.k;
  run.options.reuse = config.reuse;
  run.options.scaling = make_scaling(config);
  run.options.eps_pd = config.eps_pd;
  run.options.schedules = config.schedules;
  run.budget = *config.budget;
  run.seed = seed;
  run.box_lower = config.box_lower;
  run.box_upper = config.box_upper;
  run.init_lower = config.init_lower;
  run.init_upper = config.init_upper;
  run.initial = config.initial;
  run.trajectory_stride = config.stride;
  return run;
}

CubicConfig make_cubic_config(const ExperimentConfig& config, const Objective& objective) {
  const CrzonSettings& z = config.crzon;
  const std::optional<double> lipschitz = z.hessian_lipschitz ? z.hessian_lipschitz : objective.hessian_lipschitz;
  CubicConfig c;
  if (z.epsilon) {
    c = CubicConfig::from_epsilon(*z.epsilon, config.k, lipschitz, z.prefactors);
  } else {
    if (!z.n || !z.m || !z.b || !z.delta) {
      throw ConfigError("crzon: give epsilon, or all of N, m, b and delta");
    }
    c.k = config.k;
    c.hessian_lipschitz = lipschitz;
  }
  if (z.n) c.n = *z.n;
  if (z.m) c.m = *z.m;
  if (z.b) c.b = *z.b;
  if (z.delta) c.delta = *z.delta;
  c.alpha = z.alpha;
  c.reuse = z.reuse;
  c.tol = z.tol;
  c.scaling = make_scaling(config);
  c.validate();
  return c;
}

CrzonRunConfig make_crzon_config(const ExperimentConfig& config, std::uint64_t seed) {
  CrzonRunConfig run;
  run.objective = make_objective(config);
  run.noise = make_noise(config);
  run.perturbation = make_perturbation(config, config.dim);
  run.cubic = make_cubic_config(config, run.objective);
  run.seed = seed;
  run.budget = config.budget;
  run.initial = config.initial;
  run.init_lower = config.init_lower;
  run.init_upper = config.init_upper;
  return run;
}

}  // namespace grdsa
