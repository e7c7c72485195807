#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lyapcert/exactnum.hpp"
#include "lyapcert/poly.hpp"
#include "lyapcert/sdp.hpp"

namespace lyapcert {

enum class BasisKind {
  full_degree_le_d,       // every monomial of degree <= d
  homogeneous_degree_k,   // every monomial of degree exactly k
  pruned,                 // subset kept after removing forced-zero Gram diagonals
};

/// Ordered monomial vector v(x): ascending degree, lexicographically descending within a degree
/// (1, x1, x2, x1^2, x1*x2, x2^2, ...).
struct MonomialBasis {
  std::size_t nvars = 0;
  std::vector<Monomial> monomials;
  BasisKind kind = BasisKind::full_degree_le_d;

  std::size_t size() const { return monomials.size(); }
  std::optional<std::size_t> index_of(const Monomial& m) const;
  /// Sum over the basis of x^(2 alpha).
  Polynomial square_sum() const;
};

MonomialBasis basis_for(std::size_t nvars, int degree, BasisKind kind);

/// g = sum_i c_i s_i^2 with rational c_i >= 0.
struct WeightedSosCertificate {
  std::vector<Rational> weights;
  PolyVector squares;

  std::size_t size() const { return weights.size(); }
  Polynomial assemble(std::size_t nvars) const;
  void append(const WeightedSosCertificate& other);
  /// Drops entries whose weight or square is zero.
  WeightedSosCertificate pruned() const;
  WeightedSosCertificate scaled(const Rational& c) const;
};

/// One coefficient-matching equation: sum over entries (i <= j) of (i == j ? G_ii : 2 G_ij) = rhs.
struct GramConstraint {
  Monomial monomial;
  std::vector<std::pair<std::size_t, std::size_t>> entries;
  Rational rhs;
};

class InexpressibleMonomial : public std::runtime_error {
public:
  explicit InexpressibleMonomial(Monomial m);
  const Monomial& monomial() const { return m_; }

private:
  Monomial m_;
};

/// Throws InexpressibleMonomial when g has a term outside basis * basis.
std::vector<GramConstraint> gram_constraints(const Polynomial& g, const MonomialBasis& basis);

/// Single-block SDP whose equalities are the given Gram constraints.
SdpProblem gram_sdp(const std::vector<GramConstraint>& cons, std::size_t dim, const Rational& scale = Rational(1));

class NotPsdError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// LDL^T of G, rounded dyadically at delta_c: weights are the pivots, squares are the columns of L
/// paired with the basis. Throws NotPsdError.
WeightedSosCertificate extract_squares(const SymMatrixF& g, const MonomialBasis& basis, Precision delta_c);

struct VerifyResult {
  bool exact = false;
  /// sum c_i s_i^2 - g
  Polynomial residual;
  std::optional<std::size_t> negative_weight;
  bool ok() const { return exact; }
};

VerifyResult verify_certificate(const Polynomial& g, const WeightedSosCertificate& cert);

struct AbsorptionFailure {
  Monomial monomial;  // the x^(2 alpha) budget that went negative, or an unroutable term
  Rational budget;
  std::string reason;
};

/// Certificate for u + eps * sum_{alpha in basis} x^(2 alpha): odd remainder terms are split as
/// x^b = 1/2 ((x^b' + s x^b'')^2 - x^(2b') - x^(2b'')) and charged to the eps budgets.
std::variant<WeightedSosCertificate, AbsorptionFailure> absorb(const Polynomial& u, const Rational& eps,
                                                               const MonomialBasis& basis);

struct IntsosParams {
  Rational eps{1, 16};
  Precision delta{30};
  Precision delta_c{30};
  int max_rounds = 8;

  /// eps = 2^-4 * min(1, min |coefficient|), delta = delta_c = 30, eight rounds.
  static IntsosParams defaults_for(const Polynomial& g);
};

struct IntsosFailure {
  std::string reason;
  int rounds = 0;
};

/// Removes basis monomials whose Gram diagonal is forced to zero by g's support.
MonomialBasis prune_basis(const Polynomial& g, MonomialBasis basis);

/// Exact weighted SOS decomposition by perturbation and absorption. The returned certificate
/// always verifies exactly against g. Throws std::invalid_argument for odd-degree input.
std::variant<WeightedSosCertificate, IntsosFailure> intsos(const Polynomial& g, const IntsosParams& params);

/// sum over |alpha| = k of x^(2 alpha)
Polynomial diagonal_form(std::size_t nvars, int k);

/// sum_i x_i^(2 e_i) where e_i is the smallest e with x_i^(2e) carrying a positive coefficient in g;
/// nullopt when some variable has no such pure power.
std::optional<Polynomial> pure_power_anchor(const Polynomial& g);

} // namespace lyapcert
