#include "grdsa/perturb.hpp"

#include <cmath>
#include <stdexcept>

namespace grdsa {

PerturbationSpec::PerturbationSpec(PerturbationFamily family, int dim, double eta)
    : family_(family), dim_(dim), eta_(eta) {
  if (dim < 1) throw std::invalid_argument("perturbation dimension must be >= 1");
  if (family == PerturbationFamily::Uniform && !(eta > 0.0 && std::isfinite(eta))) {
    throw std::invalid_argument("uniform perturbation requires a finite eta > 0");
  }
}

PerturbationSpec PerturbationSpec::gaussian(int dim) { return {PerturbationFamily::Gaussian, dim, 0.0}; }

PerturbationSpec PerturbationSpec::uniform(int dim, double eta) {
  return {PerturbationFamily::Uniform, dim, eta};
}

Moments PerturbationSpec::moments() const {
  if (family_ == PerturbationFamily::Gaussian) return {1.0, 3.0};
  const double e2 = eta_ * eta_;
  return {e2 / 3.0, e2 * e2 / 5.0};
}

PerturbationFamily parse_family(const std::string& name) {
  if (name == "gaussian") return PerturbationFamily::Gaussian;
  if (name == "uniform") return PerturbationFamily::Uniform;
  throw std::invalid_argument("unknown perturbation family '" + name + "' (expected gaussian|uniform)");
}

std::string to_string(PerturbationFamily family) {
  return family == PerturbationFamily::Gaussian ? "gaussian" : "uniform";
}

Vec sample(const PerturbationSpec& spec, RandomStream& stream) {
  Vec out(spec.dim());
  if (spec.family() == PerturbationFamily::Gaussian) {
    for (int i = 0; i < spec.dim(); ++i) out[i] = stream.normal();
  } else {
    for (int i = 0; i < spec.dim(); ++i) out[i] = stream.uniform(-spec.eta(), spec.eta());
  }
  return out;
}

Mat scaling_matrix(const Moments& moments, const Vec& direction) {
  const double mu2 = moments.second;
  const double excess = moments.fourth - mu2 * mu2;
  if (!(mu2 > 0.0) || !(excess > 0.0)) {
    throw std::invalid_argument("scaling matrix requires mu2 > 0 and mu4 > mu2^2");
  }
  Mat m = direction * direction.transpose() / (2.0 * mu2 * mu2);
  for (Eigen::Index i = 0; i < direction.size(); ++i) {
    m(i, i) = (direction[i] * direction[i] - mu2) / excess;
  }
  return m;
}

Mat scaling_matrix(const PerturbationSpec& spec, const Vec& direction, ScalingMode mode) {
  if (direction.size() != spec.dim()) throw std::invalid_argument("scaling matrix: dimension mismatch");
  if (mode == ScalingMode::PaperLiteral) {
    const Eigen::Index d = direction.size();
    return direction * direction.transpose() - Mat::Identity(d, d);
  }
  return scaling_matrix(spec.moments(), direction);
}

double gradient_unbias_factor(const PerturbationSpec& spec) { return 1.0 / spec.moments().second; }

}  // namespace grdsa
