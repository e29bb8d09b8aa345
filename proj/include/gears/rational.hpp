#pragma once

#include <cstdint>
#include <string>

#include <boost/rational.hpp>

namespace gears {

/// Exact quantum numbers live on rational lattices; floating point is only
/// used for amplitudes, energies and times.
using Rational = boost::rational<std::int64_t>;

}  // namespace gears

// Boost 1.74's mixed rational/integer operator== recurses forever under C++20
// rewritten-comparison rules; exact non-template overloads take precedence.
namespace boost {
inline bool operator==(const rational<std::int64_t>& a, std::int64_t b) { return a == rational<std::int64_t>(b); }
inline bool operator==(const rational<std::int64_t>& a, int b) { return a == rational<std::int64_t>(b); }
inline bool operator!=(const rational<std::int64_t>& a, std::int64_t b) { return !(a == b); }
inline bool operator!=(const rational<std::int64_t>& a, int b) { return !(a == b); }
}  // namespace boost

namespace gears {

inline double to_double(const Rational& q) { return boost::rational_cast<double>(q); }

inline bool is_integer(const Rational& q) { return q.denominator() == 1; }

inline std::int64_t floor_int(const Rational& q) {
  const auto num = q.numerator();
  const auto den = q.denominator();  // always positive
  return num >= 0 ? num / den : -((-num + den - 1) / den);
}

/// Representative of x modulo period in the half-open window (-period/2, period/2].
inline Rational centered_residue(const Rational& x, const Rational& period) {
  Rational r = x - period * floor_int(x / period);  // [0, period)
  if (r > period / 2) r -= period;
  return r;
}

inline std::string to_string(const Rational& q) {
  if (is_integer(q)) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

}  // namespace gears
