#include "lyapcert/exactnum.hpp"

#include <cctype>
#include <cmath>
#include <string>

namespace lyapcert {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

mpz_class parse_unsigned(std::string_view s) {
  if (!all_digits(s)) throw ArithmeticError("malformed integer literal '" + std::string(s) + "'");
  return mpz_class(std::string(s), 10);
}

} // namespace

BigInt BigInt::parse(std::string_view text) {
  bool neg = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    neg = text.front() == '-';
    text.remove_prefix(1);
  }
  mpz_class v = parse_unsigned(text);
  return BigInt(neg ? mpz_class(-v) : v);
}

long BigInt::to_long() const {
  if (!v_.fits_slong_p()) throw ArithmeticError("integer " + to_string() + " does not fit in a machine word");
  return v_.get_si();
}

Rational::Rational(long n, long d) {
  if (d == 0) throw ArithmeticError("zero denominator");
  v_ = mpq_class(n, 1);
  v_ /= d;
  v_.canonicalize();
}

Rational::Rational(const BigInt& n, const BigInt& d) {
  if (d.is_zero()) throw ArithmeticError("zero denominator");
  v_ = mpq_class(n.raw(), d.raw());
  v_.canonicalize();
}

Rational::Rational(mpq_class v) : v_(std::move(v)) { v_.canonicalize(); }

Rational Rational::parse(std::string_view text) {
  std::string_view body = text;
  bool neg = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    neg = body.front() == '-';
    body.remove_prefix(1);
  }
  Rational r;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    mpz_class n = parse_unsigned(body.substr(0, slash));
    mpz_class d = parse_unsigned(body.substr(slash + 1));
    if (d == 0) throw ArithmeticError("zero denominator in '" + std::string(text) + "'");
    r = Rational(mpq_class(n, d));
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    std::string_view ip = body.substr(0, dot);
    std::string_view fp = body.substr(dot + 1);
    if (ip.empty() && fp.empty()) throw ArithmeticError("malformed decimal literal '" + std::string(text) + "'");
    mpz_class n = ip.empty() ? mpz_class(0) : parse_unsigned(ip);
    mpz_class scale = 1;
    if (!fp.empty()) {
      mpz_class f = parse_unsigned(fp);
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, fp.size());
      n = n * scale + f;
    }
    r = Rational(mpq_class(n, scale));
  } else {
    r = Rational(mpq_class(parse_unsigned(body)));
  }
  return neg ? -r : r;
}

Rational Rational::from_double(double d) {
  if (!std::isfinite(d)) throw ArithmeticError("non-finite double");
  return Rational(mpq_class(d));
}

Rational Rational::pow2(long e) {
  mpz_class p = 1;
  mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(e < 0 ? -e : e));
  return e >= 0 ? Rational(mpq_class(p)) : Rational(mpq_class(mpz_class(1), p));
}

std::string Rational::to_string() const {
  if (is_integer()) return v_.get_num().get_str();
  return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.is_zero()) throw ArithmeticError("division by zero");
  return Rational(mpq_class(a.v_ / b.v_));
}

Precision::Precision(long p) : p_(p) {
  if (p < 1) throw std::invalid_argument("precision exponent must be >= 1, got " + std::to_string(p));
}

std::optional<Rational> rat_arith(const Rational& a, const Rational& b, ArithOp op) {
  switch (op) {
  case ArithOp::add: return a + b;
  case ArithOp::sub: return a - b;
  case ArithOp::mul: return a * b;
  case ArithOp::div:
    if (b.is_zero()) return std::nullopt;
    return a / b;
  }
  return std::nullopt;
}

Rational rat_round_dyadic(const Rational& a, Precision p) {
  // scaled = a * 2^p = n / d; pick k = round(n / d), ties toward zero.
  mpz_class n = a.raw().get_num();
  const mpz_class& d = a.raw().get_den();
  mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<mp_bitcnt_t>(p.value()));
  bool neg = n < 0;
  mpz_class mag = neg ? mpz_class(-n) : n;
  mpz_class q, r;
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), mag.get_mpz_t(), d.get_mpz_t());
  if (2 * r > d) q += 1;
  if (neg) q = -q;
  mpz_class den = 1;
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(p.value()));
  return Rational(mpq_class(q, den));
}

Rational rat_round_dyadic(double a, Precision p) {
  return rat_round_dyadic(Rational::from_double(a), p);
}

long floor_log2(const Rational& r) {
  if (r.sign() <= 0) throw ArithmeticError("log2 of non-positive rational");
  const mpz_class& n = r.raw().get_num();
  const mpz_class& d = r.raw().get_den();
  long c = static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2)) - static_cast<long>(mpz_sizeinbase(d.get_mpz_t(), 2));
  // c is within one of the answer; settle it exactly.
  while (Rational::pow2(c) > r) --c;
  while (Rational::pow2(c + 1) <= r) ++c;
  return c;
}

long ceil_log2(const Rational& r) {
  long c = floor_log2(r);
  return Rational::pow2(c) == r ? c : c + 1;
}

} // namespace lyapcert
