#include "lyapcert/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace lyapcert {

namespace {

constexpr double kStrictTol = 1e-6;
constexpr double kFaceRatio = 1e-5;

bool is_one(const Polynomial& q) { return q == Polynomial::constant(q.nvars(), Rational(1)); }

Rational value_at_origin(const Polynomial& p) { return p.coeff(Monomial(p.nvars())); }

Rational power_of_two_shift(double x) {
  const Rational floor_shift = Rational::pow2(-20);
  if (!(x > 0.0)) return floor_shift;
  Rational r = Rational::from_double(x / 100.0);
  if (r.is_zero()) return floor_shift;
  return std::max(floor_shift, Rational::pow2(floor_log2(r)));
}

IntsosParams intsos_params_for(const SynthParams& params, const Polynomial& g) {
  return params.intsos ? *params.intsos : IntsosParams::defaults_for(g);
}

// A polynomial whose support is the union of the supports of ps (all coefficients 1).
Polynomial support_union(const PolyVector& ps, std::size_t nvars) {
  std::set<Monomial, GrlexLess> mons;
  for (const auto& p : ps)
    for (const auto& [m, c] : p.terms()) mons.insert(m);
  Polynomial u(nvars);
  for (const auto& m : mons) u.add_term(m, Rational(1));
  return u;
}

double min_diag(const SymMatrixF& g) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.dim(); ++i) m = std::min(m, g(i, i));
  return g.dim() == 0 ? 0.0 : m;
}

bool termwise_sos(const Polynomial& p) {
  for (const auto& [m, c] : p.terms())
    if (c.sign() < 0 || !m.is_even()) return false;
  return true;
}

} // namespace

PolySystem PolySystem::polynomial(SystemMode mode, PolyVector numerators) {
  PolySystem s;
  s.nvars = numerators.empty() ? 0 : numerators.front().nvars();
  s.mode = mode;
  for (std::size_t i = 0; i < numerators.size(); ++i) s.denominators.push_back(Polynomial::constant(s.nvars, Rational(1)));
  s.numerators = std::move(numerators);
  return s;
}

void PolySystem::validate() const {
  if (nvars == 0) throw std::invalid_argument("system has no variables");
  if (numerators.size() != nvars || denominators.size() != nvars)
    throw std::invalid_argument("system needs one right-hand side per variable");
  for (std::size_t i = 0; i < nvars; ++i) {
    if (numerators[i].nvars() != nvars || denominators[i].nvars() != nvars)
      throw DimensionError("right-hand side " + std::to_string(i + 1) + " lives in the wrong ring");
    if (!value_at_origin(numerators[i]).is_zero())
      throw std::invalid_argument("right-hand side " + std::to_string(i + 1) + " does not vanish at the origin");
    if (value_at_origin(denominators[i]).sign() <= 0)
      throw std::invalid_argument("denominator " + std::to_string(i + 1) + " is not positive at the origin");
  }
}

PolyVector PolySystem::distinct_denominators() const {
  PolyVector out;
  for (const auto& q : denominators)
    if (!is_one(q) && std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
  return out;
}

Decrease decrease_polynomial(const PolySystem& sys, const Polynomial& V) {
  sys.validate();
  if (V.nvars() != sys.nvars) throw DimensionError("V and the system live in different rings");
  const std::size_t n = sys.nvars;
  const PolyVector qs = sys.distinct_denominators();
  auto group_of = [&](std::size_t i) -> std::optional<std::size_t> {
    if (is_one(sys.denominators[i])) return std::nullopt;
    return static_cast<std::size_t>(std::find(qs.begin(), qs.end(), sys.denominators[i]) - qs.begin());
  };

  Decrease out{Polynomial(n), Polynomial::constant(n, Rational(1))};
  if (sys.mode == SystemMode::continuous) {
    for (const auto& q : qs) out.multiplier = out.multiplier * q;
    for (std::size_t i = 0; i < n; ++i) {
      Polynomial term = V.derivative(i) * sys.numerators[i];
      if (term.is_zero()) continue;
      auto gi = group_of(i);
      for (std::size_t j = 0; j < qs.size(); ++j)
        if (!gi || *gi != j) term = term * qs[j];
      out.decrease -= term;
    }
    return out;
  }

  // Discrete: clear every q^E with E the even degree bound of V.
  int E = std::max(V.degree(), 0);
  if (E % 2 != 0) ++E;
  for (const auto& q : qs) out.multiplier = out.multiplier * q.pow(static_cast<unsigned>(E));
  std::vector<PolyVector> num_pow(n), q_pow(qs.size());
  for (std::size_t i = 0; i < n; ++i) {
    num_pow[i].push_back(Polynomial::constant(n, Rational(1)));
    for (int e = 1; e <= E; ++e) num_pow[i].push_back(num_pow[i].back() * sys.numerators[i]);
  }
  for (std::size_t j = 0; j < qs.size(); ++j) {
    q_pow[j].push_back(Polynomial::constant(n, Rational(1)));
    for (int e = 1; e <= E; ++e) q_pow[j].push_back(q_pow[j].back() * qs[j]);
  }
  Polynomial composed(n);
  for (const auto& [alpha, c] : V.terms()) {
    Polynomial t = Polynomial::constant(n, c);
    std::vector<int> used(qs.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] == 0) continue;
      t = t * num_pow[i][alpha[i]];
      if (auto gi = group_of(i)) used[*gi] += alpha[i];
    }
    for (std::size_t j = 0; j < qs.size(); ++j) t = t * q_pow[j][E - used[j]];
    composed += t;
  }
  out.decrease = out.multiplier * V - composed;
  return out;
}

LyapunovSdp setup_sdp_k(const PolySystem& sys, int k) {
  if (k < 1) throw std::invalid_argument("half degree k must be at least 1");
  sys.validate();
  const std::size_t n = sys.nvars;
  MonomialBasis vmons = basis_for(n, 2 * k, BasisKind::homogeneous_degree_k);
  PolyVector decs;
  int deg = -1;
  bool homogeneous = true;
  for (const auto& g : vmons.monomials) {
    decs.push_back(decrease_polynomial(sys, Polynomial::term(g, Rational(1))).decrease);
    deg = std::max(deg, decs.back().degree());
  }
  if (deg < 0) throw ParityError("the decrease vanishes identically at k = " + std::to_string(k));
  if (deg % 2 != 0)
    throw ParityError("cleared decrease has odd degree " + std::to_string(deg) + " at k = " + std::to_string(k));
  for (const auto& d : decs) {
    if (d.is_zero()) continue;
    auto info = d.degree_info();
    homogeneous = homogeneous && info.is_homogeneous && info.total_degree == deg;
  }
  return setup_sdp_k(sys, k,
                     basis_for(n, deg / 2, homogeneous ? BasisKind::homogeneous_degree_k : BasisKind::full_degree_le_d));
}

LyapunovSdp setup_sdp_k(const PolySystem& sys, int k, const MonomialBasis& basis_D) {
  if (k < 1) throw std::invalid_argument("half degree k must be at least 1");
  sys.validate();
  const std::size_t n = sys.nvars;
  if (basis_D.nvars != n) throw DimensionError("decrease basis lives in the wrong ring");
  if (basis_D.size() == 0) throw std::invalid_argument("decrease basis is empty");

  LyapunovSdp L;
  L.k = k;
  L.basis_V = basis_for(n, k, BasisKind::homogeneous_degree_k);
  L.basis_D = basis_D;
  L.v_monomials = basis_for(n, 2 * k, BasisKind::homogeneous_degree_k).monomials;
  for (const auto& g : L.v_monomials) {
    auto d = decrease_polynomial(sys, Polynomial::term(g, Rational(1)));
    L.decrease_of.push_back(std::move(d.decrease));
    L.multiplier = std::move(d.multiplier);
  }
  for (const auto& d : L.decrease_of)
    if (!d.is_zero() && d.degree() % 2 != 0)
      throw ParityError("cleared decrease has odd degree " + std::to_string(d.degree()));

  SdpProblem& P = L.problem;
  P.blocks = {static_cast<int>(L.basis_V.size()), static_cast<int>(basis_D.size())};
  P.free_vars = static_cast<int>(L.v_monomials.size());

  // V's Gram expansion: each degree-2k monomial gamma ties G1 to v_gamma.
  for (const auto& gc : gram_constraints(Polynomial(n), L.basis_V)) {
    SdpConstraint c;
    for (const auto& [i, j] : gc.entries) c.lhs.entries.push_back({0, static_cast<int>(i), static_cast<int>(j), 1.0});
    auto it = std::find(L.v_monomials.begin(), L.v_monomials.end(), gc.monomial);
    c.lhs.free_terms.push_back({static_cast<int>(it - L.v_monomials.begin()), -1.0});
    P.constraints.push_back(std::move(c));
  }

  // Decrease Gram expansion: sum_gamma v_gamma D_gamma = w^T G2 w.
  std::map<Monomial, SdpConstraint, GrlexLess> rows;
  for (const auto& gc : gram_constraints(Polynomial(n), basis_D)) {
    auto& c = rows[gc.monomial];
    for (const auto& [i, j] : gc.entries) c.lhs.entries.push_back({1, static_cast<int>(i), static_cast<int>(j), 1.0});
  }
  for (std::size_t g = 0; g < L.v_monomials.size(); ++g)
    for (const auto& [m, coef] : L.decrease_of[g].terms())
      rows[m].lhs.free_terms.push_back({static_cast<int>(g), -coef.to_double()});
  for (auto& [m, c] : rows) P.constraints.push_back(std::move(c));

  SdpConstraint trace;
  for (std::size_t i = 0; i < L.basis_V.size(); ++i)
    trace.lhs.entries.push_back({0, static_cast<int>(i), static_cast<int>(i), 1.0});
  trace.rhs = static_cast<double>(L.basis_V.size());
  P.constraints.push_back(std::move(trace));
  return L;
}

std::string NoCertificateFound::message() const {
  std::ostringstream os;
  os << "no certificate found";
  for (const auto& s : stages) os << "\n  " << s;
  return os.str();
}

std::string to_string(VerdictKind k) {
  switch (k) {
  case VerdictKind::asymptotically_stable: return "AsymptoticallyStable";
  case VerdictKind::stable: return "Stable";
  case VerdictKind::invalid: return "Invalid";
  }
  return "Invalid";
}

std::string check_denominator_positive(const Polynomial& q) {
  const Rational q0 = value_at_origin(q);
  if (q0.sign() <= 0) return "denominator " + poly_print(q) + " is not positive at the origin";
  const Polynomial rest = q - Polynomial::constant(q.nvars(), q0);
  if (termwise_sos(rest)) return {};
  const Polynomial target = q - Polynomial::constant(q.nvars(), q0 * Rational(1, 2));
  if (target.degree() % 2 != 0) return "denominator " + poly_print(q) + " has odd degree";
  auto r = intsos(target, IntsosParams::defaults_for(target));
  if (std::holds_alternative<WeightedSosCertificate>(r)) return {};
  return "cannot certify denominator " + poly_print(q) + " positive: " + std::get<IntsosFailure>(r).reason;
}

namespace {

Verdict invalid(std::string reason, std::optional<Polynomial> residual = std::nullopt) {
  return Verdict{VerdictKind::invalid, std::move(reason), std::move(residual)};
}

} // namespace

Verdict check_lyapunov(const PolySystem& sys, const LyapunovCertificate& cert, const Rational& strict_shift) {
  try {
    sys.validate();
  } catch (const std::exception& e) {
    return invalid(std::string("malformed system: ") + e.what());
  }
  const std::size_t n = sys.nvars;
  const int k = cert.half_degree;
  if (k < 1) return invalid("half degree must be at least 1");
  if (cert.V.nvars() != n || cert.decrease_poly.nvars() != n || cert.multiplier.nvars() != n)
    return invalid("certificate polynomials live in the wrong ring");
  for (const auto* c : {&cert.cert_V, &cert.cert_decrease}) {
    if (c->weights.size() != c->squares.size()) return invalid("certificate weight/square count mismatch");
    for (const auto& s : c->squares)
      if (s.nvars() != n) return invalid("certificate square lives in the wrong ring");
  }
  auto info = cert.V.degree_info();
  if (cert.V.is_zero() || !info.is_homogeneous || info.total_degree != 2 * k)
    return invalid("V is not a nonzero form of degree " + std::to_string(2 * k));
  if (strict_shift.sign() <= 0) return invalid("V shift must be positive to certify positive definiteness");
  if (cert.mu_D.sign() < 0) return invalid("decrease shift is negative");

  const Decrease d = decrease_polynomial(sys, cert.V);
  if (!(d.multiplier == cert.multiplier))
    return invalid("multiplier does not match the system", cert.multiplier - d.multiplier);
  if (!(d.decrease == cert.decrease_poly))
    return invalid("decrease polynomial does not match the system", cert.decrease_poly - d.decrease);

  for (const auto& q : sys.distinct_denominators())
    if (auto why = check_denominator_positive(q); !why.empty()) return invalid(why);

  const Polynomial v_target = cert.V - strict_shift * diagonal_form(n, k);
  auto vr = verify_certificate(v_target, cert.cert_V);
  if (vr.negative_weight)
    return invalid("cert_V has a negative weight at index " + std::to_string(*vr.negative_weight), vr.residual);
  if (!vr.exact) return invalid("cert_V does not reassemble V - muV * sum x^(2 alpha)", vr.residual);

  Polynomial d_target = cert.decrease_poly;
  if (cert.mu_D.sign() > 0) {
    auto anchor = pure_power_anchor(cert.decrease_poly);
    if (!anchor) return invalid("decrease has no pure-power anchor for a positive shift");
    d_target -= cert.mu_D * *anchor;
  }
  auto dr = verify_certificate(d_target, cert.cert_decrease);
  if (dr.negative_weight)
    return invalid("cert_decrease has a negative weight at index " + std::to_string(*dr.negative_weight),
                   dr.residual);
  if (!dr.exact) return invalid("cert_decrease does not reassemble the shifted decrease", dr.residual);

  if (cert.strictness == Strictness::positive_definite && cert.mu_D.is_zero())
    return invalid("strictness claims a positive definite decrease but muD = 0");
  if (cert.mu_D.sign() > 0) return Verdict{VerdictKind::asymptotically_stable, "decrease is positive definite", {}};
  return Verdict{VerdictKind::stable, "decrease is nonnegative", {}};
}

Verdict check_lyapunov(const PolySystem& sys, const LyapunovCertificate& cert) {
  return check_lyapunov(sys, cert, cert.mu_V);
}

namespace {

struct Numeric {
  std::vector<double> v;
  double min_diag_V = 0.0;
  double min_diag_D = 0.0;
};

// Rounds the numeric V at increasing precisions and certifies both conditions exactly.
std::variant<LyapunovCertificate, std::string> certify(const PolySystem& sys, const LyapunovSdp& L, const Numeric& num,
                                                       const SynthParams& params) {
  const std::size_t n = sys.nvars;
  double vmax = 0.0;
  for (double x : num.v) vmax = std::max(vmax, std::abs(x));
  if (!(vmax > 0.0)) return std::string("solver returned V = 0");

  std::vector<long> precisions = {4, 8, 12, 16, 20, 24};
  const long dc = params.intsos ? params.intsos->delta_c.value() : 30;
  if (dc > precisions.back()) precisions.push_back(dc);

  const Rational mu_V = params.strict_shift ? *params.strict_shift : power_of_two_shift(num.min_diag_V / vmax);
  const Rational mu_D0 = params.strict_shift ? *params.strict_shift : power_of_two_shift(num.min_diag_D / vmax);
  const Polynomial diag = diagonal_form(n, L.k);

  std::string last = "no rounding attempted";
  std::vector<Polynomial> seen;
  for (long p : precisions) {
    Polynomial V(n);
    for (std::size_t i = 0; i < num.v.size(); ++i)
      V.add_term(L.v_monomials[i], rat_round_dyadic(num.v[i] / vmax, Precision(p)));
    if (V.is_zero() || std::find(seen.begin(), seen.end(), V) != seen.end()) continue;
    seen.push_back(V);

    const Decrease d = decrease_polynomial(sys, V);
    const Polynomial v_target = V - mu_V * diag;
    if (v_target.degree() != 2 * L.k && !v_target.is_zero()) continue;
    auto cv = intsos(v_target, intsos_params_for(params, v_target));
    if (auto* f = std::get_if<IntsosFailure>(&cv)) {
      last = "V at precision " + std::to_string(p) + ": " + f->reason;
      continue;
    }

    std::vector<Rational> shifts;
    auto anchor = pure_power_anchor(d.decrease);
    if (anchor && !d.decrease.is_zero()) {
      shifts.push_back(mu_D0);
      if (!params.strict_shift) shifts.push_back(mu_D0 * Rational(1, 16));
    }
    shifts.push_back(Rational(0));
    for (const auto& mu_D : shifts) {
      Polynomial target = d.decrease;
      if (mu_D.sign() > 0) target -= mu_D * *anchor;
      WeightedSosCertificate cd;
      if (!target.is_zero()) {
        if (target.degree() % 2 != 0) {
          last = "decrease has odd degree";
          continue;
        }
        auto r = intsos(target, intsos_params_for(params, target));
        if (auto* f = std::get_if<IntsosFailure>(&r)) {
          last = "decrease at precision " + std::to_string(p) + ": " + f->reason;
          continue;
        }
        cd = std::get<WeightedSosCertificate>(r);
      }
      LyapunovCertificate cert;
      cert.V = V;
      cert.half_degree = L.k;
      cert.decrease_poly = d.decrease;
      cert.multiplier = d.multiplier;
      cert.cert_V = std::get<WeightedSosCertificate>(cv);
      cert.cert_decrease = std::move(cd);
      cert.mu_V = mu_V;
      cert.mu_D = mu_D;
      cert.strictness = mu_D.sign() > 0 ? Strictness::positive_definite : Strictness::nonnegative;
      Verdict verdict = check_lyapunov(sys, cert);
      if (verdict.valid()) return cert;
      last = "final check: " + verdict.reason;
    }
  }
  return last;
}

} // namespace

std::variant<LyapunovCertificate, NoCertificateFound> exact_lyapunov(const PolySystem& sys, const SynthParams& params) {
  sys.validate();
  if (params.k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  NoCertificateFound nf;
  for (int k = 1; k <= params.k_max; ++k) {
    const std::string tag = "k = " + std::to_string(k) + ": ";
    LyapunovSdp L;
    try {
      L = setup_sdp_k(sys, k);
    } catch (const ParityError& e) {
      nf.stages.push_back(tag + e.what());
      continue;
    }
    const Polynomial support = support_union(L.decrease_of, sys.nvars);
    MonomialBasis basis_D = prune_basis(support, L.basis_D);

    std::optional<SdpSolution> sol;
    std::string failure;
    for (std::size_t round = 0; round <= L.basis_D.size(); ++round) {
      if (basis_D.size() == 0) {
        failure = "decrease basis became empty";
        break;
      }
      L = setup_sdp_k(sys, k, basis_D);
      SdpResult res = sdp_solve(L.problem, params.sdp_tol);
      if (!res.ok()) {
        failure = "SDP " + std::string(res.status == SdpStatus::infeasible ? "infeasible" : "failed") + ": " +
                  res.message;
        break;
      }
      if (res.solution->slack > kStrictTol) {
        sol = std::move(res.solution);
        break;
      }
      // Drop decrease monomials whose Gram diagonal is numerically zero and re-solve on the face.
      const SymMatrixF& G2 = res.solution->blocks[1];
      double maxdiag = 0.0;
      for (std::size_t i = 0; i < G2.dim(); ++i) maxdiag = std::max(maxdiag, G2(i, i));
      MonomialBasis reduced = basis_D;
      reduced.monomials.clear();
      reduced.kind = BasisKind::pruned;
      for (std::size_t i = 0; i < G2.dim(); ++i)
        if (G2(i, i) > kFaceRatio * maxdiag) reduced.monomials.push_back(basis_D.monomials[i]);
      if (reduced.size() == basis_D.size()) {
        failure = "not strictly feasible (slack " + std::to_string(res.solution->slack) + ")";
        break;
      }
      basis_D = prune_basis(support, reduced);
    }
    if (!sol) {
      nf.stages.push_back(tag + (failure.empty() ? "facial reduction did not terminate" : failure));
      continue;
    }

    Numeric num;
    num.v = sol->free_values;
    num.min_diag_V = min_diag(sol->blocks[0]);
    num.min_diag_D = min_diag(sol->blocks[1]);
    auto r = certify(sys, L, num, params);
    if (auto* cert = std::get_if<LyapunovCertificate>(&r)) return std::move(*cert);
    nf.stages.push_back(tag + std::get<std::string>(r));
  }
  return nf;
}

} // namespace lyapcert
