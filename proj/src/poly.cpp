#include "lyapcert/poly.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <sstream>

namespace lyapcert {

namespace {

void require_same_ring(const Polynomial& a, const Polynomial& b) {
  if (a.nvars() != b.nvars())
    throw DimensionError("polynomials over " + std::to_string(a.nvars()) + " and " + std::to_string(b.nvars()) +
                         " variables");
}

} // namespace

Monomial::Monomial(std::vector<int> exps) : e_(std::move(exps)) {
  for (int e : e_)
    if (e < 0) throw std::invalid_argument("negative exponent");
}

Monomial Monomial::unit(std::size_t nvars, std::size_t var, int power) {
  Monomial m(nvars);
  m.e_.at(var) = power;
  return m;
}

int Monomial::degree() const {
  long d = 0;
  for (int e : e_) d += e;
  if (d > INT_MAX) throw std::overflow_error("monomial degree overflow");
  return static_cast<int>(d);
}

bool Monomial::is_even() const {
  return std::all_of(e_.begin(), e_.end(), [](int e) { return e % 2 == 0; });
}

Monomial operator*(const Monomial& a, const Monomial& b) {
  if (a.nvars() != b.nvars()) throw DimensionError("monomials of different length");
  Monomial r(a.nvars());
  for (std::size_t i = 0; i < a.nvars(); ++i) {
    if (a.e_[i] > INT_MAX - b.e_[i]) throw std::overflow_error("exponent overflow");
    r.e_[i] = a.e_[i] + b.e_[i];
  }
  return r;
}

bool GrlexLess::operator()(const Monomial& a, const Monomial& b) const {
  int da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  return a.exponents() < b.exponents();
}

Polynomial::Polynomial(std::size_t nvars) : nvars_(nvars) {}

Polynomial Polynomial::constant(std::size_t nvars, const Rational& c) {
  Polynomial p(nvars);
  p.add_term(Monomial(nvars), c);
  return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t var) {
  if (var >= nvars) throw DimensionError("variable index out of range");
  return term(Monomial::unit(nvars, var), Rational(1));
}

Polynomial Polynomial::term(const Monomial& m, const Rational& c) {
  Polynomial p(m.nvars());
  p.add_term(m, c);
  return p;
}

Rational Polynomial::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
  if (m.nvars() != nvars_) throw DimensionError("monomial length does not match polynomial ring");
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

Polynomial Polynomial::operator-() const {
  Polynomial r(*this);
  for (auto& [m, c] : r.terms_) c = -c;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& b) {
  require_same_ring(*this, b);
  for (const auto& [m, c] : b.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& b) {
  require_same_ring(*this, b);
  for (const auto& [m, c] : b.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  require_same_ring(a, b);
  Polynomial r(a.nvars());
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
  return r;
}

Polynomial Polynomial::pow(unsigned e) const {
  Polynomial result = constant(nvars_, Rational(1));
  Polynomial base = *this;
  while (e > 0) {
    if (e & 1u) result = result * base;
    e >>= 1u;
    if (e > 0) base = base * base;
  }
  return result;
}

Rational Polynomial::eval(std::span<const Rational> point) const {
  if (point.size() != nvars_)
    throw DimensionError("point of dimension " + std::to_string(point.size()) + " for polynomial in " +
                         std::to_string(nvars_) + " variables");
  mpq_class acc = 0, t;
  for (const auto& [m, c] : terms_) {
    t = c.raw();
    for (std::size_t i = 0; i < nvars_; ++i)
      for (int k = 0; k < m[i]; ++k) t *= point[i].raw();
    acc += t;
  }
  return Rational(acc);
}

double Polynomial::eval(std::span<const double> point) const {
  if (point.size() != nvars_) throw DimensionError("point dimension mismatch");
  double acc = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c.to_double();
    for (std::size_t i = 0; i < nvars_; ++i) t *= std::pow(point[i], m[i]);
    acc += t;
  }
  return acc;
}

Polynomial Polynomial::derivative(std::size_t var) const {
  if (var >= nvars_) throw DimensionError("variable index out of range");
  Polynomial r(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[var] == 0) continue;
    std::vector<int> e = m.exponents();
    long k = e[var]--;
    r.add_term(Monomial(std::move(e)), c * Rational(k));
  }
  return r;
}

DegreeInfo Polynomial::degree_info() const {
  DegreeInfo info;
  for (const auto& [m, c] : terms_) {
    int d = m.degree();
    if (!info.total_degree || d > *info.total_degree) info.total_degree = d;
    info.support.push_back(m);
  }
  if (!info.support.empty()) {
    int d0 = info.support.front().degree();
    info.is_homogeneous = std::all_of(info.support.begin(), info.support.end(),
                                      [&](const Monomial& m) { return m.degree() == d0; });
  }
  return info;
}

std::optional<int> Polynomial::min_degree() const {
  if (terms_.empty()) return std::nullopt;
  return terms_.begin()->first.degree();
}

int Polynomial::degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }

Polynomial poly_arith(const Polynomial& a, const Polynomial& b, PolyOp op) {
  switch (op) {
  case PolyOp::add: return a + b;
  case PolyOp::sub: return a - b;
  case PolyOp::mul: return a * b;
  }
  throw std::invalid_argument("unknown polynomial operation");
}

Rational poly_eval(const Polynomial& p, std::span<const Rational> point) { return p.eval(point); }

PolyVector poly_gradient(const Polynomial& p) {
  PolyVector g;
  g.reserve(p.nvars());
  for (std::size_t i = 0; i < p.nvars(); ++i) g.push_back(p.derivative(i));
  return g;
}

Polynomial poly_substitute(const Polynomial& p, const PolyVector& images) {
  if (images.size() != p.nvars())
    throw DimensionError("substitution needs " + std::to_string(p.nvars()) + " images, got " +
                         std::to_string(images.size()));
  if (images.empty()) return p;
  std::size_t m = images.front().nvars();
  for (const auto& g : images)
    if (g.nvars() != m) throw DimensionError("substitution images live in different rings");

  // Cache powers of each image; degrees here are small.
  std::vector<std::vector<Polynomial>> powers(images.size());
  auto power = [&](std::size_t i, int e) -> const Polynomial& {
    auto& cache = powers[i];
    if (cache.empty()) cache.push_back(Polynomial::constant(m, Rational(1)));
    while (static_cast<int>(cache.size()) <= e) cache.push_back(cache.back() * images[i]);
    return cache[e];
  };

  Polynomial r(m);
  for (const auto& [mono, c] : p.terms()) {
    Polynomial t = Polynomial::constant(m, c);
    for (std::size_t i = 0; i < p.nvars(); ++i)
      if (mono[i] > 0) t = t * power(i, mono[i]);
    r += t;
  }
  return r;
}

DegreeInfo poly_degree_info(const Polynomial& p) { return p.degree_info(); }

Polynomial dot(const PolyVector& a, const PolyVector& b) {
  if (a.size() != b.size() || a.empty()) throw DimensionError("dot product of mismatched vectors");
  Polynomial r(a.front().nvars());
  for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
  return r;
}

std::vector<std::string> default_var_names(std::size_t nvars) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < nvars; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

std::string monomial_print(const Monomial& m, const std::vector<std::string>& vars) {
  std::string out;
  for (std::size_t i = 0; i < m.nvars(); ++i) {
    if (m[i] == 0) continue;
    if (!out.empty()) out += '*';
    out += vars.at(i);
    if (m[i] > 1) out += '^' + std::to_string(m[i]);
  }
  return out.empty() ? "1" : out;
}

std::string poly_print(const Polynomial& p, const std::vector<std::string>& vars) {
  if (vars.size() != p.nvars()) throw DimensionError("variable name list does not match polynomial ring");
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [m, c] = *it;
    Rational mag = c.abs();
    if (first) {
      if (c.sign() < 0) out += '-';
    } else {
      out += c.sign() < 0 ? " - " : " + ";
    }
    first = false;
    bool is_const = m.degree() == 0;
    if (is_const) {
      out += mag.to_string();
    } else if (mag == Rational(1)) {
      out += monomial_print(m, vars);
    } else {
      out += mag.to_string() + '*' + monomial_print(m, vars);
    }
  }
  return out;
}

std::string poly_print(const Polynomial& p) { return poly_print(p, default_var_names(p.nvars())); }

} // namespace lyapcert
