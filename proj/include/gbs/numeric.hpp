#ifndef GBS_NUMERIC_HPP
#define GBS_NUMERIC_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gbs {

// Exponents are arbitrary precision: iterating a map multiplies exponents by
// edge labels, which leaves 64 bits almost immediately.
using Int = boost::multiprecision::cpp_int;

inline Int int_abs(const Int& x) { return x < 0 ? Int(-x) : x; }

// Floor-free remainder in [0, |m|). m != 0.
inline Int mod_nonneg(const Int& x, const Int& m) {
  Int a = int_abs(m);
  Int r = x % a;
  if (r < 0) r += a;
  return r;
}

inline bool divides(const Int& d, const Int& x) {
  if (d == 0) return x == 0;
  return x % d == 0;
}

// Reduced fraction p/q with q > 0. Multiplicative; only the unit test for
// unimodularity (p == q) is consumed by the decision procedures.
struct Rational {
  Int num = 1;
  Int den = 1;

  Rational() = default;
  Rational(Int n, Int d) : num(std::move(n)), den(std::move(d)) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    normalize();
  }

  void normalize() {
    if (den < 0) { num = -num; den = -den; }
    Int g = boost::multiprecision::gcd(int_abs(num), den);
    if (g > 1) { num /= g; den /= g; }
  }

  Rational operator*(const Rational& o) const {
    return Rational(num * o.num, den * o.den);
  }
  Rational operator+(const Rational& o) const {
    return Rational(num * o.den + o.num * den, den * o.den);
  }
  Rational operator*(const Int& k) const { return Rational(num * k, den); }
  bool operator==(const Rational& o) const {
    return num == o.num && den == o.den;
  }
  bool operator<(const Rational& o) const {
    return num * o.den < o.num * den;
  }
  bool is_one() const { return num == 1 && den == 1; }
  std::string str() const { return num.str() + "/" + den.str(); }
};

}  // namespace gbs

#endif  // GBS_NUMERIC_HPP
