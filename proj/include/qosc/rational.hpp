// Exact rational scalar for the whole engine.  Thin value wrapper around
// GMP's mpq_class: eager arithmetic (no expression templates escaping through
// auto), always canonical, serializable as "numerator/denominator" strings.
#pragma once

#include <gmpxx.h>

#include <Eigen/Core>

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace qosc {

class Rational {
 public:
  Rational() : v_(0) {}
  Rational(long n) : v_(static_cast<signed long>(n)) {}  // NOLINT: implicit by design
  Rational(int n) : v_(static_cast<signed long>(n)) {}   // NOLINT: implicit by design
  Rational(long num, long den);
  explicit Rational(const mpq_class& v);
  explicit Rational(const mpz_class& num, const mpz_class& den);

  // Parses "n" or "n/d" in base 10; throws std::invalid_argument on junk or
  // zero denominator.
  static Rational from_string(const std::string& s);

  // Always "numerator/denominator", canonical (den > 0, gcd = 1).
  std::string to_string() const;

  const mpq_class& raw() const { return v_; }
  mpz_class num() const { return v_.get_num(); }
  mpz_class den() const { return v_.get_den(); }

  bool is_zero() const { return sgn(v_) == 0; }
  bool is_one() const { return v_ == 1; }
  int sign() const { return sgn(v_); }

  Rational inverse() const;
  // Integer power, negative exponents allowed (throws on 0^negative).
  Rational pow(long e) const;

  Rational operator-() const { return Rational(mpq_class(-v_)); }
  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

 private:
  mpq_class v_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

// Dense exact-arithmetic types; graded blocks live in these.
using Mat = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Rational, Eigen::Dynamic, 1>;

}  // namespace qosc

namespace Eigen {
template <>
struct NumTraits<qosc::Rational> : GenericNumTraits<qosc::Rational> {
  typedef qosc::Rational Real;
  typedef qosc::Rational NonInteger;
  typedef qosc::Rational Nested;
  typedef qosc::Rational Literal;
  static inline Real epsilon() { return qosc::Rational(0); }
  static inline Real dummy_precision() { return qosc::Rational(0); }
  static inline int digits10() { return 0; }
  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 100,
    MulCost = 100,
  };
};
}  // namespace Eigen
