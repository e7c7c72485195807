#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace lyapcert {

/// Raised on division by zero and on malformed numeric literals.
class ArithmeticError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Arbitrary-precision signed integer.
class BigInt {
public:
  BigInt() = default;
  BigInt(long v) : v_(v) {}
  explicit BigInt(mpz_class v) : v_(std::move(v)) {}

  /// Parses an optionally signed decimal integer.
  static BigInt parse(std::string_view text);

  int sign() const { return sgn(v_); }
  bool is_zero() const { return sign() == 0; }
  const mpz_class& raw() const { return v_; }
  std::string to_string() const { return v_.get_str(); }
  /// Throws ArithmeticError if the value does not fit in a long.
  long to_long() const;

  friend BigInt operator+(const BigInt& a, const BigInt& b) { return BigInt(mpz_class(a.v_ + b.v_)); }
  friend BigInt operator-(const BigInt& a, const BigInt& b) { return BigInt(mpz_class(a.v_ - b.v_)); }
  friend BigInt operator*(const BigInt& a, const BigInt& b) { return BigInt(mpz_class(a.v_ * b.v_)); }
  BigInt operator-() const { return BigInt(mpz_class(-v_)); }

  friend bool operator==(const BigInt& a, const BigInt& b) { return cmp(a.v_, b.v_) == 0; }
  friend std::strong_ordering operator<=>(const BigInt& a, const BigInt& b) {
    return cmp(a.v_, b.v_) <=> 0;
  }

private:
  mpz_class v_;
};

/// Exact rational number, always stored in lowest terms with a positive denominator.
class Rational {
public:
  Rational() = default;
  Rational(long n) : v_(n) {}
  Rational(long n, long d);
  Rational(const BigInt& n, const BigInt& d);
  explicit Rational(mpq_class v);

  /// Accepts `-1/3`, `5`, `223/100` and decimal literals such as `1.115`.
  static Rational parse(std::string_view text);
  /// Exact binary value of a finite double.
  static Rational from_double(double d);
  /// 2^e for any integer e.
  static Rational pow2(long e);

  BigInt num() const { return BigInt(mpz_class(v_.get_num())); }
  BigInt den() const { return BigInt(mpz_class(v_.get_den())); }
  int sign() const { return sgn(v_); }
  bool is_zero() const { return sign() == 0; }
  bool is_integer() const { return v_.get_den() == 1; }
  Rational abs() const { return Rational(mpq_class(::abs(v_))); }
  double to_double() const { return v_.get_d(); }
  std::string to_string() const;
  const mpq_class& raw() const { return v_; }

  friend Rational operator+(const Rational& a, const Rational& b) { return Rational(mpq_class(a.v_ + b.v_)); }
  friend Rational operator-(const Rational& a, const Rational& b) { return Rational(mpq_class(a.v_ - b.v_)); }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(mpq_class(a.v_ * b.v_)); }
  /// Throws ArithmeticError when b is zero.
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const { return Rational(mpq_class(-v_)); }
  Rational& operator+=(const Rational& b) { v_ += b.v_; return *this; }
  Rational& operator-=(const Rational& b) { v_ -= b.v_; return *this; }
  Rational& operator*=(const Rational& b) { v_ *= b.v_; return *this; }
  Rational& operator/=(const Rational& b) { return *this = *this / b; }

  friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) == 0; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return cmp(a.v_, b.v_) <=> 0;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

private:
  mpq_class v_;
};

/// Precision exponent p >= 1, read as the tolerance 2^-p.
class Precision {
public:
  explicit Precision(long p);
  long value() const { return p_; }
  Precision next() const { return Precision(p_ + 1); }
  friend auto operator<=>(const Precision&, const Precision&) = default;

private:
  long p_;
};

enum class ArithOp { add, sub, mul, div };

/// Field operation; nullopt signals division by zero.
std::optional<Rational> rat_arith(const Rational& a, const Rational& b, ArithOp op);

/// Nearest k / 2^p to a; exact ties go toward zero. |result - a| <= 2^-(p+1).
Rational rat_round_dyadic(const Rational& a, Precision p);
/// Same rounding for a double, applied to its exact binary value.
Rational rat_round_dyadic(double a, Precision p);

/// Smallest integer c with 2^c >= r. Requires r > 0.
long ceil_log2(const Rational& r);
/// Largest integer c with 2^c <= r. Requires r > 0.
long floor_log2(const Rational& r);

} // namespace lyapcert
