#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lyapcert/exactnum.hpp"

namespace lyapcert {

/// Raised when operands live in polynomial rings of different dimension.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Exponent vector x^alpha; its length is the ambient variable count.
class Monomial {
public:
  Monomial() = default;
  explicit Monomial(std::size_t nvars) : e_(nvars, 0) {}
  explicit Monomial(std::vector<int> exps);

  static Monomial unit(std::size_t nvars, std::size_t var, int power = 1);

  std::size_t nvars() const { return e_.size(); }
  int operator[](std::size_t i) const { return e_[i]; }
  const std::vector<int>& exponents() const { return e_; }
  int degree() const;
  /// True when every exponent is even.
  bool is_even() const;

  /// Sum of exponent vectors; throws std::overflow_error past INT_MAX.
  friend Monomial operator*(const Monomial& a, const Monomial& b);
  friend bool operator==(const Monomial&, const Monomial&) = default;

private:
  std::vector<int> e_;
};

/// Graded lexicographic order: by total degree, then lexicographically with x1 most significant.
struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

struct DegreeInfo {
  /// nullopt for the zero polynomial.
  std::optional<int> total_degree;
  bool is_homogeneous = true;
  std::vector<Monomial> support;
};

/// Sparse multivariate polynomial with exact rational coefficients.
/// Zero coefficients are never stored.
class Polynomial {
public:
  using TermMap = std::map<Monomial, Rational, GrlexLess>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars);

  static Polynomial constant(std::size_t nvars, const Rational& c);
  static Polynomial variable(std::size_t nvars, std::size_t var);
  static Polynomial term(const Monomial& m, const Rational& c);

  std::size_t nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  Rational coeff(const Monomial& m) const;
  void add_term(const Monomial& m, const Rational& c);

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& b);
  Polynomial& operator-=(const Polynomial& b);
  Polynomial& operator*=(const Rational& c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
  friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }
  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  Polynomial pow(unsigned e) const;
  Rational eval(std::span<const Rational> point) const;
  double eval(std::span<const double> point) const;
  Polynomial derivative(std::size_t var) const;
  DegreeInfo degree_info() const;
  /// Smallest total degree among the terms; nullopt for zero.
  std::optional<int> min_degree() const;
  /// Largest total degree; -1 for zero.
  int degree() const;

private:
  std::size_t nvars_ = 0;
  TermMap terms_;
};

using PolyVector = std::vector<Polynomial>;

enum class PolyOp { add, sub, mul };

/// Throws DimensionError on mismatched variable counts.
Polynomial poly_arith(const Polynomial& a, const Polynomial& b, PolyOp op);
Rational poly_eval(const Polynomial& p, std::span<const Rational> point);
PolyVector poly_gradient(const Polynomial& p);
/// Composition p(images[0], ..., images[n-1]); the result lives in the images' ring.
Polynomial poly_substitute(const Polynomial& p, const PolyVector& images);
DegreeInfo poly_degree_info(const Polynomial& p);
/// Dot product of two equal-length polynomial vectors.
Polynomial dot(const PolyVector& a, const PolyVector& b);

/// Parse failure with a zero-based character offset into the input.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// Default variable names x1, ..., xn.
std::vector<std::string> default_var_names(std::size_t nvars);

Polynomial poly_parse(std::string_view text, const std::vector<std::string>& vars);
/// Canonical text: terms in descending graded-lex order, e.g. `223/100*x1^4 - x2`.
std::string poly_print(const Polynomial& p, const std::vector<std::string>& vars);
std::string poly_print(const Polynomial& p);
std::string monomial_print(const Monomial& m, const std::vector<std::string>& vars);

} // namespace lyapcert
