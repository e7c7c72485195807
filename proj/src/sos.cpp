#include "lyapcert/sos.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace lyapcert {

namespace {

void exponents_of_degree(std::size_t nvars, int degree, std::vector<Monomial>& out) {
  std::vector<int> e(nvars, 0);
  // Lexicographically descending: the first coordinate takes the largest share first.
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == nvars) {
      e[i] = left;
      out.emplace_back(e);
      return;
    }
    for (int v = left; v >= 0; --v) {
      e[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, degree);
}

} // namespace

std::optional<std::size_t> MonomialBasis::index_of(const Monomial& m) const {
  auto it = std::find(monomials.begin(), monomials.end(), m);
  if (it == monomials.end()) return std::nullopt;
  return static_cast<std::size_t>(it - monomials.begin());
}

Polynomial MonomialBasis::square_sum() const {
  Polynomial p(nvars);
  for (const auto& m : monomials) p.add_term(m * m, Rational(1));
  return p;
}

MonomialBasis basis_for(std::size_t nvars, int degree, BasisKind kind) {
  if (degree < 0) throw std::invalid_argument("basis degree must be nonnegative");
  if (nvars == 0) throw std::invalid_argument("basis needs at least one variable");
  MonomialBasis b;
  b.nvars = nvars;
  b.kind = kind;
  switch (kind) {
  case BasisKind::full_degree_le_d:
    for (int d = 0; d <= degree; ++d) exponents_of_degree(nvars, d, b.monomials);
    break;
  case BasisKind::homogeneous_degree_k:
    exponents_of_degree(nvars, degree, b.monomials);
    break;
  case BasisKind::pruned:
    throw std::invalid_argument("pruned bases come from prune_basis, not basis_for");
  }
  return b;
}

Polynomial WeightedSosCertificate::assemble(std::size_t nvars) const {
  if (weights.size() != squares.size()) throw std::invalid_argument("certificate weight/square count mismatch");
  Polynomial p(nvars);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (squares[i].nvars() != nvars) throw DimensionError("certificate square in the wrong ring");
    if (weights[i].is_zero()) continue;
    p += weights[i] * (squares[i] * squares[i]);
  }
  return p;
}

void WeightedSosCertificate::append(const WeightedSosCertificate& other) {
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
  squares.insert(squares.end(), other.squares.begin(), other.squares.end());
}

WeightedSosCertificate WeightedSosCertificate::pruned() const {
  WeightedSosCertificate c;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].is_zero() || squares[i].is_zero()) continue;
    c.weights.push_back(weights[i]);
    c.squares.push_back(squares[i]);
  }
  return c;
}

WeightedSosCertificate WeightedSosCertificate::scaled(const Rational& c) const {
  WeightedSosCertificate r = *this;
  for (auto& w : r.weights) w *= c;
  return r;
}

InexpressibleMonomial::InexpressibleMonomial(Monomial m)
    : std::runtime_error("monomial " + monomial_print(m, default_var_names(m.nvars())) +
                         " is not a product of two basis monomials"),
      m_(std::move(m)) {}

std::vector<GramConstraint> gram_constraints(const Polynomial& g, const MonomialBasis& basis) {
  if (g.nvars() != basis.nvars) throw DimensionError("polynomial and basis live in different rings");
  std::map<Monomial, GramConstraint, GrlexLess> by_mono;
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i; j < basis.size(); ++j) {
      Monomial m = basis.monomials[i] * basis.monomials[j];
      auto& c = by_mono[m];
      c.monomial = m;
      c.entries.emplace_back(i, j);
    }
  for (const auto& [m, coef] : g.terms()) {
    auto it = by_mono.find(m);
    if (it == by_mono.end()) throw InexpressibleMonomial(m);
    it->second.rhs = coef;
  }
  std::vector<GramConstraint> out;
  out.reserve(by_mono.size());
  for (auto& [m, c] : by_mono) out.push_back(std::move(c));
  return out;
}

SdpProblem gram_sdp(const std::vector<GramConstraint>& cons, std::size_t dim, const Rational& scale) {
  SdpProblem p;
  p.blocks = {static_cast<int>(dim)};
  for (const auto& c : cons) {
    SdpConstraint sc;
    for (const auto& [i, j] : c.entries)
      sc.lhs.entries.push_back({0, static_cast<int>(i), static_cast<int>(j), 1.0});
    sc.rhs = (c.rhs / scale).to_double();
    p.constraints.push_back(std::move(sc));
  }
  return p;
}

WeightedSosCertificate extract_squares(const SymMatrixF& g, const MonomialBasis& basis, Precision delta_c) {
  if (g.dim() != basis.size()) throw DimensionError("Gram matrix and basis sizes differ");
  auto res = ldl_decompose(g);
  if (auto* bad = std::get_if<NotPsd>(&res))
    throw NotPsdError("Gram matrix is not PSD: pivot " + std::to_string(bad->pivot_index) + " is " +
                      std::to_string(bad->pivot));
  const auto& f = std::get<LdlFactor>(res);
  WeightedSosCertificate cert;
  const std::size_t n = basis.size();
  for (std::size_t j = 0; j < n; ++j) {
    cert.weights.push_back(rat_round_dyadic(f.D[j], delta_c));
    Polynomial s = Polynomial::term(basis.monomials[j], Rational(1));
    for (std::size_t i = j + 1; i < n; ++i) s.add_term(basis.monomials[i], rat_round_dyadic(f.L(i, j), delta_c));
    cert.squares.push_back(std::move(s));
  }
  return cert;
}

VerifyResult verify_certificate(const Polynomial& g, const WeightedSosCertificate& cert) {
  VerifyResult r;
  if (cert.weights.size() != cert.squares.size()) throw std::invalid_argument("certificate weight/square count mismatch");
  for (std::size_t i = 0; i < cert.weights.size(); ++i)
    if (cert.weights[i].sign() < 0) {
      r.negative_weight = i;
      break;
    }
  r.residual = cert.assemble(g.nvars()) - g;
  r.exact = r.residual.is_zero() && !r.negative_weight;
  return r;
}

namespace {

// Alternating split: beta' and beta'' share the floor half, odd units go to beta', beta'', beta', ...
std::pair<Monomial, Monomial> split_exponent(const Monomial& beta) {
  std::vector<int> a(beta.nvars()), b(beta.nvars());
  bool to_first = true;
  for (std::size_t i = 0; i < beta.nvars(); ++i) {
    a[i] = b[i] = beta[i] / 2;
    if (beta[i] % 2 != 0) {
      (to_first ? a : b)[i] += 1;
      to_first = !to_first;
    }
  }
  return {Monomial(a), Monomial(b)};
}

} // namespace

std::variant<WeightedSosCertificate, AbsorptionFailure> absorb(const Polynomial& u, const Rational& eps,
                                                               const MonomialBasis& basis) {
  if (u.nvars() != basis.nvars) throw DimensionError("remainder and basis live in different rings");
  const std::size_t n = basis.size();
  std::vector<Rational> budget(n, eps);
  WeightedSosCertificate cert;

  for (const auto& [beta, coef] : u.terms()) {
    if (beta.is_even()) {
      std::vector<int> half(beta.nvars());
      for (std::size_t i = 0; i < beta.nvars(); ++i) half[i] = beta[i] / 2;
      if (auto idx = basis.index_of(Monomial(half))) {
        budget[*idx] += coef;
        continue;
      }
    }
    std::optional<std::size_t> ia, ib;
    auto [b1, b2] = split_exponent(beta);
    if (!(b1 == b2)) {
      ia = basis.index_of(b1);
      ib = basis.index_of(b2);
    }
    if (!ia || !ib) {
      ia.reset();
      ib.reset();
      for (std::size_t i = 0; i < n && !ia; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (basis.monomials[i] * basis.monomials[j] == beta) {
            ia = i;
            ib = j;
            break;
          }
    }
    if (!ia || !ib) return AbsorptionFailure{beta, Rational(0), "remainder term cannot be routed through the basis"};
    Rational half_mag = coef.abs() * Rational(1, 2);
    Polynomial s = Polynomial::term(basis.monomials[*ia], Rational(1));
    s.add_term(basis.monomials[*ib], Rational(coef.sign()));
    cert.weights.push_back(half_mag);
    cert.squares.push_back(std::move(s));
    budget[*ia] -= half_mag;
    budget[*ib] -= half_mag;
  }

  for (std::size_t i = 0; i < n; ++i)
    if (budget[i].sign() < 0)
      return AbsorptionFailure{basis.monomials[i] * basis.monomials[i], budget[i], "perturbation budget exhausted"};
  for (std::size_t i = 0; i < n; ++i) {
    if (budget[i].is_zero()) continue;
    cert.weights.push_back(budget[i]);
    cert.squares.push_back(Polynomial::term(basis.monomials[i], Rational(1)));
  }
  return cert;
}

MonomialBasis prune_basis(const Polynomial& g, MonomialBasis basis) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const Monomial sq = basis.monomials[k] * basis.monomials[k];
      if (!g.coeff(sq).is_zero()) continue;
      bool other = false;
      for (std::size_t i = 0; i < basis.size() && !other; ++i)
        for (std::size_t j = i + 1; j < basis.size(); ++j)
          if (basis.monomials[i] * basis.monomials[j] == sq) {
            other = true;
            break;
          }
      if (other) continue;
      basis.monomials.erase(basis.monomials.begin() + static_cast<std::ptrdiff_t>(k));
      basis.kind = BasisKind::pruned;
      changed = true;
      break;
    }
  }
  return basis;
}

Polynomial diagonal_form(std::size_t nvars, int k) {
  return basis_for(nvars, k, BasisKind::homogeneous_degree_k).square_sum();
}

std::optional<Polynomial> pure_power_anchor(const Polynomial& g) {
  const std::size_t n = g.nvars();
  std::vector<int> best(n, 0);
  for (const auto& [m, c] : g.terms()) {
    if (c.sign() <= 0 || m.degree() == 0 || !m.is_even()) continue;
    std::size_t nonzero = 0, var = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (m[i] != 0) {
        ++nonzero;
        var = i;
      }
    if (nonzero != 1) continue;
    if (best[var] == 0 || m[var] < best[var]) best[var] = m[var];
  }
  Polynomial anchor(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (best[i] == 0) return std::nullopt;
    anchor.add_term(Monomial::unit(n, i, best[i]), Rational(1));
  }
  return anchor;
}

} // namespace lyapcert
