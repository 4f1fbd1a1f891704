#pragma once

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace grdsa {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational in lowest terms with a positive denominator.
using Rational = boost::multiprecision::cpp_rational;

std::string to_string(const Rational& r);
double to_double(const Rational& r);

BigInt factorial(int n);
BigInt binomial(int n, int r);

/// Integer power of a non-negative integer base, exact.
BigInt ipow(int base, int exponent);

}  // namespace grdsa
