#include "lyapcert/sos.hpp"

#include <algorithm>
#include <cmath>

namespace lyapcert {

namespace {

constexpr double kStrictTol = 1e-6;
constexpr double kProbeTol = 1e-9;
constexpr double kFaceRatio = 1e-6;

Rational max_abs_coeff(const Polynomial& g) {
  Rational m(0);
  for (const auto& [mono, c] : g.terms()) m = std::max(m, c.abs());
  return m;
}

// Power of two nearest the largest coefficient; the Gram SDP is posed for g / scale.
Rational coefficient_scale(const Polynomial& g) {
  Rational m = max_abs_coeff(g);
  if (m.is_zero()) return Rational(1);
  return Rational::pow2(floor_log2(m));
}

struct Probe {
  MonomialBasis basis;
  double slack = 0.0;
};

// Solves the max-slack Gram program for g and drops basis monomials whose Gram diagonal is
// numerically zero, until the face is strictly feasible or nothing more can be dropped.
std::variant<Probe, IntsosFailure> probe_face(const Polynomial& g, MonomialBasis basis, const Rational& scale) {
  for (int iter = 0;; ++iter) {
    std::vector<GramConstraint> cons;
    try {
      cons = gram_constraints(g, basis);
    } catch (const InexpressibleMonomial& e) {
      return IntsosFailure{e.what(), 0};
    }
    SdpResult res = sdp_solve(gram_sdp(cons, basis.size(), scale), kProbeTol);
    if (res.status == SdpStatus::infeasible) return IntsosFailure{"Gram program is infeasible: " + res.message, 0};
    if (!res.ok()) return IntsosFailure{"Gram program failed: " + res.message, 0};
    const SymMatrixF& G = res.solution->blocks[0];
    double maxdiag = 0.0;
    for (std::size_t i = 0; i < G.dim(); ++i) maxdiag = std::max(maxdiag, G(i, i));
    const double slack = res.solution->slack;
    if (slack > kStrictTol * std::max(1.0, maxdiag) || iter >= static_cast<int>(basis.size()))
      return Probe{basis, slack};
    MonomialBasis reduced = basis;
    reduced.monomials.clear();
    reduced.kind = BasisKind::pruned;
    for (std::size_t i = 0; i < G.dim(); ++i)
      if (G(i, i) > kFaceRatio * maxdiag) reduced.monomials.push_back(basis.monomials[i]);
    if (reduced.size() == basis.size() || reduced.size() == 0) return Probe{basis, slack};
    basis = prune_basis(g, reduced);
  }
}

} // namespace

IntsosParams IntsosParams::defaults_for(const Polynomial& g) {
  IntsosParams p;
  Rational m(1);
  for (const auto& [mono, c] : g.terms()) m = std::min(m, c.abs());
  p.eps = Rational(1, 16) * m;
  return p;
}

std::variant<WeightedSosCertificate, IntsosFailure> intsos(const Polynomial& g, const IntsosParams& params) {
  if (params.eps.sign() <= 0) throw std::invalid_argument("intsos: eps must be positive");
  if (params.max_rounds < 1) throw std::invalid_argument("intsos: max_rounds must be at least 1");
  if (g.is_zero()) return WeightedSosCertificate{};
  const int deg = g.degree();
  if (deg % 2 != 0) throw std::invalid_argument("intsos: polynomial has odd degree " + std::to_string(deg));
  const std::size_t n = g.nvars();
  if (deg == 0) {
    Rational c = g.coeff(Monomial(std::vector<int>(n, 0)));
    if (c.sign() < 0) return IntsosFailure{"negative constant", 0};
    return WeightedSosCertificate{{c}, {Polynomial::constant(n, Rational(1))}};
  }

  const bool homogeneous = g.degree_info().is_homogeneous;
  MonomialBasis basis = basis_for(n, deg / 2, homogeneous ? BasisKind::homogeneous_degree_k : BasisKind::full_degree_le_d);
  basis = prune_basis(g, basis);
  const Rational scale = coefficient_scale(g);

  auto probed = probe_face(g, basis, scale);
  if (auto* f = std::get_if<IntsosFailure>(&probed)) return *f;
  const Probe& probe = std::get<Probe>(probed);
  basis = probe.basis;

  // The perturbation may not eat more than half of the measured interior margin.
  Rational eps = params.eps;
  if (probe.slack > 0.0) {
    Rational cap = Rational::from_double(probe.slack / 2.0) * scale;
    if (cap.sign() > 0) eps = std::min(eps, Rational::pow2(floor_log2(cap)));
  }
  Precision delta = params.delta;
  Precision delta_c = params.delta_c;
  const Polynomial perturbation = basis.square_sum();

  std::string last = "no rounds attempted";
  for (int round = 1; round <= params.max_rounds; ++round) {
    const Polynomial g_eps = g - eps * perturbation;
    std::vector<GramConstraint> cons = gram_constraints(g_eps, basis);
    const double tol = std::max(std::ldexp(1.0, -static_cast<int>(std::min<long>(delta.value(), 60))), 1e-12);
    SdpResult res = sdp_solve(gram_sdp(cons, basis.size(), scale), tol);
    if (res.ok()) {
      try {
        WeightedSosCertificate cert = extract_squares(res.solution->blocks[0], basis, delta_c);
        for (auto& w : cert.weights) w *= scale;
        const Polynomial u = g_eps - cert.assemble(n);
        auto absorbed = absorb(u, eps, basis);
        if (auto* ok = std::get_if<WeightedSosCertificate>(&absorbed)) {
          cert.append(*ok);
          cert = cert.pruned();
          if (!verify_certificate(g, cert).ok())
            throw std::logic_error("intsos: assembled certificate failed exact verification");
          return cert;
        }
        const auto& af = std::get<AbsorptionFailure>(absorbed);
        last = af.reason + " at " + monomial_print(af.monomial, default_var_names(n));
      } catch (const NotPsdError& e) {
        last = e.what();
      }
    } else {
      last = "Gram program: " + res.message;
    }
    eps *= Rational(1, 2);
    delta = delta.next();
    delta_c = delta_c.next();
  }
  return IntsosFailure{"no exact certificate after " + std::to_string(params.max_rounds) + " rounds (" + last + ")",
                       params.max_rounds};
}

} // namespace lyapcert
