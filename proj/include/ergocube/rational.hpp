#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

namespace ergocube {

/// Arbitrary precision rational. Every measure, probability and conditional
/// expectation in the library is carried in this type.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "p/q", an integer, or a plain decimal such as "0.125" or "-3.5"
/// into an exact rational. Throws std::invalid_argument on malformed text.
Rational parse_rational(std::string_view text);

/// "p/q" (or "p" when the denominator is one).
std::string to_string(const Rational& value);

inline double to_double(const Rational& value) { return value.convert_to<double>(); }

}  // namespace ergocube
