#include "grdsa/stencils.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace grdsa {

namespace {

void check_order(int k, int max_order, const char* what) {
  if (k < 1) throw std::invalid_argument(std::string(what) + " must be >= 1");
  if (k > max_order) {
    throw std::invalid_argument(std::string(what) + " = " + std::to_string(k) +
                                " exceeds the supported truncation order " +
                                std::to_string(max_order));
  }
}

Rational harmonic(int k) {
  Rational sum = 0;
  for (int j = 1; j <= k; ++j) sum += Rational(1, j);
  return sum;
}

Rational sign(int exponent) { return (exponent % 2 == 0) ? Rational(1) : Rational(-1); }

}  // namespace

Rational stencil_moment(std::span<const StencilWeight> weights, int q) {
  Rational sum = 0;
  for (const auto& w : weights) sum += w.weight * Rational(ipow(w.shift, q));
  return sum;
}

Rational HessStencil::taylor_coefficient(int q) const { return moment(q) / Rational(factorial(q)); }

Rational coeff(int k, int l) {
  if (k < 1) throw std::invalid_argument("coeff: k must be >= 1");
  if (l < 0 || l > k) throw std::invalid_argument("coeff: l must lie in 0..k");
  if (l == 0) return harmonic(k);
  BigInt falling = 1;
  for (int j = 0; j < l; ++j) falling *= (k - j);
  return Rational(falling, BigInt(l));
}

GradStencil grad_stencil(int k, int max_order) {
  check_order(k, max_order, "k");
  GradStencil out;
  out.k = k;
  out.weights.reserve(k + 1);
  for (int l = 0; l <= k; ++l) {
    // (-1)^(1-l) has the parity of 1+l.
    out.weights.push_back({l, sign(1 + l) * coeff(k, l) / Rational(factorial(l))});
  }
  return out;
}

HessStencil hess_stencil(int k1, int k2, int max_order) {
  check_order(k1, max_order, "k1");
  check_order(k2, max_order, "k2");
  // The double sum factorises: (-1)^(-l-m) = (-1)^(1-l) (-1)^(1-m), so the
  // Hessian stencil is the convolution of the two gradient stencils.
  const GradStencil first = grad_stencil(k1, max_order);
  const GradStencil second = grad_stencil(k2, max_order);
  HessStencil out;
  out.k1 = k1;
  out.k2 = k2;
  out.weights.resize(k1 + k2 + 1);
  for (int s = 0; s <= k1 + k2; ++s) out.weights[s] = {s, Rational(0)};
  for (const auto& a : first.weights) {
    for (const auto& b : second.weights) out.weights[a.shift + b.shift].weight += a.weight * b.weight;
  }
  return out;
}

std::vector<double> to_doubles(std::span<const StencilWeight> weights) {
  std::vector<double> out(weights.size(), 0.0);
  for (const auto& w : weights) out.at(w.shift) = to_double(w.weight);
  return out;
}

namespace {
std::atomic<int> order_cap{kDefaultMaxOrder};
}  // namespace

void set_order_cap(int max_order) {
  if (max_order < 1) throw std::invalid_argument("order cap must be >= 1");
  order_cap.store(max_order);
}

int order_cap_value() { return order_cap.load(); }

const std::vector<double>& grad_weights(int k) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const std::vector<double>>> cache;
  check_order(k, order_cap.load(), "k");
  std::lock_guard lock(mutex);
  auto& slot = cache[k];
  if (!slot) slot = std::make_unique<const std::vector<double>>(to_doubles(grad_stencil(k, k).weights));
  return *slot;
}

const std::vector<double>& hess_weights(int k1, int k2) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<const std::vector<double>>> cache;
  check_order(k1, order_cap.load(), "k1");
  check_order(k2, order_cap.load(), "k2");
  std::lock_guard lock(mutex);
  auto& slot = cache[{k1, k2}];
  if (!slot) {
    slot = std::make_unique<const std::vector<double>>(to_doubles(hess_stencil(k1, k2, std::max(k1, k2)).weights));
  }
  return *slot;
}

bool IdentityReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.pass; });
}

std::size_t IdentityReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const IdentityCheck& c) { return !c.pass; }));
}

IdentityReport verify_identities(int k_max, int max_order) {
  check_order(k_max, max_order, "k_max");
  IdentityReport report;
  report.k_max = k_max;
  auto add = [&](std::string id, int k, int k2, int q, Rational lhs, Rational rhs) {
    const bool pass = (lhs == rhs);
    report.checks.push_back({std::move(id), k, k2, q, std::move(lhs), std::move(rhs), pass});
  };

  for (int k = 1; k <= k_max; ++k) {
    // sum_{j=1}^k (-1)^(j+1) C(k,j)/j = H_k
    Rational lhs1 = 0;
    for (int j = 1; j <= k; ++j) lhs1 += sign(j + 1) * Rational(binomial(k, j), BigInt(j));
    add("weights.harmonic", k, k, 0, lhs1, harmonic(k));

    // sum_{j=1}^k (-1)^(j+1) C(k,j) = 1
    Rational lhs2 = 0;
    for (int j = 1; j <= k; ++j) lhs2 += sign(j + 1) * Rational(binomial(k, j));
    add("weights.unit", k, k, 0, lhs2, Rational(1));

    // sum_{j=0}^k (-1)^(k-j) C(k,j) j^q = 0 for 0 < q < k
    for (int q = 1; q < k; ++q) {
      Rational lhs3 = 0;
      for (int j = 0; j <= k; ++j) lhs3 += sign(k - j) * Rational(binomial(k, j) * ipow(j, q));
      add("weights.vanish", k, k, q, lhs3, Rational(0));
    }

    const HessStencil h = hess_stencil(k, k, max_order);
    add("taylor.constant", k, k, 0, h.taylor_coefficient(0), Rational(0));
    add("taylor.first", k, k, 1, h.taylor_coefficient(1), Rational(0));
    add("taylor.second", k, k, 2, h.taylor_coefficient(2), Rational(1));
    for (int q = 3; q <= k; ++q) add("taylor.higher", k, k, q, h.taylor_coefficient(q), Rational(0));
  }

  // Unequal truncation: vanishing for 3 <= q <= min+1 and the leading residual
  // at q = min+2 equal to (1/(q-1)!) sum_{m=1}^{min} (-1)^(1-m) C(min,m) m^(q-2).
  const int unequal_max = std::min(k_max, 6);
  for (int k1 = 1; k1 <= unequal_max; ++k1) {
    for (int k2 = 1; k2 <= unequal_max; ++k2) {
      if (k1 == k2) continue;
      const HessStencil h = hess_stencil(k1, k2, max_order);
      const int lo = std::min(k1, k2);
      add("unequal.second", k1, k2, 2, h.taylor_coefficient(2), Rational(1));
      for (int q = 3; q <= lo + 1; ++q) add("unequal.vanish", k1, k2, q, h.taylor_coefficient(q), Rational(0));
      const int q = lo + 2;
      Rational leading = 0;
      for (int m = 1; m <= lo; ++m) leading += sign(1 + m) * Rational(binomial(lo, m) * ipow(m, q - 2));
      leading /= Rational(factorial(q - 1));
      add("unequal.leading", k1, k2, q, h.taylor_coefficient(q), leading);
    }
  }
  return report;
}

}  // namespace grdsa
