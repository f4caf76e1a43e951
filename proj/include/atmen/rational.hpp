#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "atmen/errors.hpp"

namespace atmen {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// "num/den" with den > 0; integers render as "num/1" so the format is uniform.
inline std::string to_fraction_string(const Rational& q) {
  return numerator(q).str() + "/" + denominator(q).str();
}

inline Rational parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      return Rational(BigInt(text));
    }
    const BigInt num(text.substr(0, slash));
    const BigInt den(text.substr(slash + 1));
    if (den == 0) throw input_error("rational with zero denominator: " + text);
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw input_error("cannot parse rational: " + text);
  }
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace atmen
