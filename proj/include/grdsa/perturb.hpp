#pragma once

#include <string>

#include "grdsa/rng.hpp"
#include "grdsa/types.hpp"

namespace grdsa {

enum class PerturbationFamily { Gaussian, Uniform };

/// Second and fourth moments of a single perturbation component.
struct Moments {
  double second = 1.0;  // E[D_i^2]
  double fourth = 3.0;  // E[D_i^4]
};

/// Distribution of the perturbation direction: i.i.d. components, either
/// standard Gaussian or uniform on [-eta, eta].
class PerturbationSpec {
 public:
  static PerturbationSpec gaussian(int dim);
  static PerturbationSpec uniform(int dim, double eta);

  PerturbationFamily family() const { return family_; }
  int dim() const { return dim_; }
  double eta() const { return eta_; }
  Moments moments() const;

 private:
  PerturbationSpec(PerturbationFamily family, int dim, double eta);

  PerturbationFamily family_;
  int dim_;
  double eta_;
};

PerturbationFamily parse_family(const std::string& name);
std::string to_string(PerturbationFamily family);

/// How the scalar second difference is turned into a matrix estimate.
///   MomentMatched: M_ii = (D_i^2 - mu2)/(mu4 - mu2^2), M_ij = D_i D_j/(2 mu2^2),
///                  so that E[M (D^T H D)] = H.
///   PaperLiteral:  D D^T - I; for Gaussian D its expectation is 2H.
enum class ScalingMode { MomentMatched, PaperLiteral };

Vec sample(const PerturbationSpec& spec, RandomStream& stream);

Mat scaling_matrix(const Moments& moments, const Vec& direction);
Mat scaling_matrix(const PerturbationSpec& spec, const Vec& direction,
                   ScalingMode mode = ScalingMode::MomentMatched);

/// 1/mu2: makes factor * D D^T unbiased for the identity.
double gradient_unbias_factor(const PerturbationSpec& spec);

}  // namespace grdsa
