#include "grdsa/rational.hpp"

#include <stdexcept>

namespace grdsa {

std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

BigInt factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial of a negative integer");
  BigInt out = 1;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

BigInt binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  BigInt out = 1;
  for (int i = 1; i <= r; ++i) {
    out *= n - r + i;
    out /= i;
  }
  return out;
}

BigInt ipow(int base, int exponent) {
  if (exponent < 0) throw std::invalid_argument("negative exponent");
  BigInt out = 1;
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

}  // namespace grdsa
