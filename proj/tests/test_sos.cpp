#include <chrono>
#include <random>

#include "doctest.h"
#include "lyapcert/sos.hpp"

using namespace lyapcert;

namespace {

Polynomial P(const std::string& s, std::size_t n = 2) { return poly_parse(s, default_var_names(n)); }

Monomial M(std::vector<int> e) { return Monomial(std::move(e)); }

const WeightedSosCertificate& cert_of(const std::variant<WeightedSosCertificate, IntsosFailure>& r) {
  if (auto* f = std::get_if<IntsosFailure>(&r)) FAIL("intsos failed: " << f->reason);
  return std::get<WeightedSosCertificate>(r);
}

SymMatrixF sym2(double a, double b, double c) {
  SymMatrixF g(2);
  g.set(0, 0, a);
  g.set(0, 1, b);
  g.set(1, 1, c);
  return g;
}

} // namespace

TEST_CASE("basis_for orders by degree, then lexicographically descending") {
  auto b = basis_for(2, 2, BasisKind::full_degree_le_d);
  REQUIRE(b.size() == 6);
  CHECK(b.monomials == std::vector<Monomial>{M({0, 0}), M({1, 0}), M({0, 1}), M({2, 0}), M({1, 1}), M({0, 2})});
  auto h = basis_for(2, 1, BasisKind::homogeneous_degree_k);
  CHECK(h.monomials == std::vector<Monomial>{M({1, 0}), M({0, 1})});
  auto u = basis_for(1, 3, BasisKind::full_degree_le_d);
  CHECK(u.monomials == std::vector<Monomial>{M({0}), M({1}), M({2}), M({3})});
}

TEST_CASE("basis cardinalities are binomial") {
  auto binom = [](int a, int b) {
    long r = 1;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return static_cast<std::size_t>(r);
  };
  for (int n = 1; n <= 4; ++n)
    for (int d = 0; d <= 4; ++d) {
      CHECK(basis_for(n, d, BasisKind::full_degree_le_d).size() == binom(n + d, n));
      if (d > 0) CHECK(basis_for(n, d, BasisKind::homogeneous_degree_k).size() == binom(n + d - 1, d));
    }
}

TEST_CASE("gram_constraints matches coefficients") {
  auto b = basis_for(2, 1, BasisKind::homogeneous_degree_k);
  auto c = gram_constraints(P("x1^2 + x2^2"), b);
  REQUIRE(c.size() == 3);
  // Ascending grlex: x2^2, x1*x2, x1^2.
  CHECK(c[0].monomial == M({0, 2}));
  CHECK(c[0].entries == std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}});
  CHECK(c[0].rhs == Rational(1));
  CHECK(c[1].monomial == M({1, 1}));
  CHECK(c[1].entries == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
  CHECK(c[1].rhs == Rational(0));
  CHECK(c[2].rhs == Rational(1));

  auto c2 = gram_constraints(P("(x1 + x2)^2"), b);
  CHECK(c2[1].rhs == Rational(2));

  try {
    gram_constraints(P("x1^3"), b);
    FAIL("expected InexpressibleMonomial");
  } catch (const InexpressibleMonomial& e) {
    CHECK(e.monomial() == M({3, 0}));
    CHECK(std::string(e.what()).find("x1^3") != std::string::npos);
  }
}

TEST_CASE("gram_sdp counts off-diagonal entries twice") {
  auto b = basis_for(2, 1, BasisKind::homogeneous_degree_k);
  auto prob = gram_sdp(gram_constraints(P("(x1 + x2)^2"), b), b.size());
  auto r = sdp_solve(prob, 1e-9);
  REQUIRE(r.ok());
  const auto& G = r.solution->blocks[0];
  CHECK(G(0, 0) == doctest::Approx(1).epsilon(1e-6));
  CHECK(G(0, 1) == doctest::Approx(1).epsilon(1e-6));
  CHECK(G(1, 1) == doctest::Approx(1).epsilon(1e-6));
}

TEST_CASE("extract_squares examples") {
  auto b = basis_for(2, 1, BasisKind::homogeneous_degree_k);
  auto rank1 = extract_squares(sym2(1, 1, 1), b, Precision(30));
  REQUIRE(rank1.size() == 2);
  CHECK(rank1.weights[0] == Rational(1));
  CHECK(rank1.weights[1] == Rational(0));
  CHECK(rank1.squares[0] == P("x1 + x2"));

  auto id = extract_squares(sym2(1, 0, 1), b, Precision(30));
  CHECK(id.weights == std::vector<Rational>{Rational(1), Rational(1)});
  CHECK(id.squares == PolyVector{P("x1"), P("x2")});

  auto ex = extract_squares(sym2(2, 1, 2), b, Precision(30));
  CHECK(ex.weights == std::vector<Rational>{Rational(2), Rational(3, 2)});
  CHECK(ex.squares == PolyVector{P("x1 + 1/2*x2"), P("x2")});
  CHECK(verify_certificate(P("2*x1^2 + 2*x1*x2 + 2*x2^2"), ex).ok());

  CHECK_THROWS_AS(extract_squares(sym2(1, 2, 1), b, Precision(30)), NotPsdError);
}

TEST_CASE("verify_certificate examples") {
  Polynomial g = P("4*x1^4 + 4*x1^3*x2 - 7*x1^2*x2^2 - 2*x1*x2^3 + 10*x2^4");
  WeightedSosCertificate c{{Rational(1), Rational(1)}, {P("2*x1*x2 + x2^2"), P("2*x1^2 + x1*x2 - 3*x2^2")}};
  CHECK(verify_certificate(g, c).ok());

  WeightedSosCertificate sq{{Rational(1)}, {P("x1")}};
  CHECK(verify_certificate(P("x1^2"), sq).ok());
  auto mm = verify_certificate(P("x1^2 + 1"), sq);
  CHECK_FALSE(mm.ok());
  CHECK(mm.residual == P("-1"));

  WeightedSosCertificate neg{{Rational(-1), Rational(2)}, {P("x1"), P("x1")}};
  auto nr = verify_certificate(P("x1^2"), neg);
  CHECK_FALSE(nr.ok());
  CHECK(nr.negative_weight == std::optional<std::size_t>(0));
}

TEST_CASE("absorb examples") {
  auto b = basis_for(2, 1, BasisKind::homogeneous_degree_k);

  auto pure = absorb(Polynomial(2), Rational(1), b);
  REQUIRE(std::holds_alternative<WeightedSosCertificate>(pure));
  const auto& pc = std::get<WeightedSosCertificate>(pure);
  CHECK(pc.weights == std::vector<Rational>{Rational(1), Rational(1)});
  CHECK(pc.squares == PolyVector{P("x1"), P("x2")});

  Polynomial u = P("1/8*x1*x2");
  auto mixed = absorb(u, Rational(1, 2), b);
  REQUIRE(std::holds_alternative<WeightedSosCertificate>(mixed));
  const auto& mc = std::get<WeightedSosCertificate>(mixed);
  REQUIRE(mc.size() == 3);
  CHECK(mc.weights[0] == Rational(1, 16));
  CHECK(mc.squares[0] == P("x1 + x2"));
  CHECK(mc.weights[1] == Rational(7, 16));
  CHECK(mc.weights[2] == Rational(7, 16));
  CHECK(verify_certificate(u + Rational(1, 2) * b.square_sum(), mc).ok());

  auto fail = absorb(P("-2*x1*x2"), Rational(1, 2), b);
  REQUIRE(std::holds_alternative<AbsorptionFailure>(fail));
  CHECK(std::get<AbsorptionFailure>(fail).monomial == M({2, 0}));
  CHECK(std::get<AbsorptionFailure>(fail).budget == Rational(-1, 2));
}

TEST_CASE("absorb routes negative odd terms with a minus sign") {
  auto b = basis_for(2, 2, BasisKind::full_degree_le_d);
  Polynomial u = P("-1/4*x1*x2^2 + 1/8*x1 - 1/16*x1^2");
  auto r = absorb(u, Rational(1, 2), b);
  REQUIRE(std::holds_alternative<WeightedSosCertificate>(r));
  CHECK(verify_certificate(u + Rational(1, 2) * b.square_sum(), std::get<WeightedSosCertificate>(r)).ok());
}

TEST_CASE("prune_basis drops forced-zero diagonals") {
  auto b = basis_for(2, 2, BasisKind::full_degree_le_d);
  auto p = prune_basis(P("2*x1^4 + 2*x2^2"), b);
  CHECK(p.kind == BasisKind::pruned);
  CHECK(p.monomials == std::vector<Monomial>{M({0, 1}), M({2, 0})});
  auto same = prune_basis(P("x1^2 + x2^2"), basis_for(2, 1, BasisKind::homogeneous_degree_k));
  CHECK(same.kind == BasisKind::homogeneous_degree_k);
  CHECK(same.size() == 2);
}

TEST_CASE("intsos examples") {
  auto c1 = cert_of(intsos(P("x1^2 + x2^2"), IntsosParams{}));
  CHECK(verify_certificate(P("x1^2 + x2^2"), c1).ok());

  Polynomial g = P("2*x1^4 + 2*x2^2");
  auto c2 = cert_of(intsos(g, IntsosParams::defaults_for(g)));
  CHECK(verify_certificate(g, c2).ok());

  Polynomial ex = P("223/100*x1^4 + 223/100*x2^2");
  CHECK(verify_certificate(ex, cert_of(intsos(ex, IntsosParams::defaults_for(ex)))).ok());

  CHECK_THROWS_AS(intsos(P("x1"), IntsosParams{}), std::invalid_argument);
  CHECK(cert_of(intsos(Polynomial(2), IntsosParams{})).size() == 0);
  CHECK(verify_certificate(P("3"), cert_of(intsos(P("3"), IntsosParams{}))).ok());
}

TEST_CASE("intsos on boundary and dense inputs") {
  // Vanishes at (1, 1): every Gram matrix is singular along v(1, 1), which no monomial face removes.
  Polynomial g = P("(x1 - x2)^2 + (x1^2 - x2)^2");
  CHECK(std::holds_alternative<IntsosFailure>(intsos(g, IntsosParams::defaults_for(g))));
  Polynomial dense = P("4*x1^4 + 4*x1^3*x2 - 7*x1^2*x2^2 - 2*x1*x2^3 + 10*x2^4");
  auto c = cert_of(intsos(dense, IntsosParams::defaults_for(dense)));
  CHECK(verify_certificate(dense, c).ok());
}

TEST_CASE("intsos rejects polynomials outside the SOS cone") {
  auto r = intsos(P("x1^2 - x2^2"), IntsosParams{});
  CHECK(std::holds_alternative<IntsosFailure>(r));
  auto motzkin_shift = intsos(P("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1"), IntsosParams{});
  CHECK(std::holds_alternative<IntsosFailure>(motzkin_shift));
  CHECK(std::holds_alternative<IntsosFailure>(intsos(P("-1"), IntsosParams{})));
}

TEST_CASE("homogeneous inputs yield homogeneous squares") {
  for (const char* s : {"x1^2 + x1*x2 + x2^2", "x1^4 + x2^4 + x1^2*x2^2 - x1^3*x2",
                        "4*x1^4 + 4*x1^3*x2 - 7*x1^2*x2^2 - 2*x1*x2^3 + 10*x2^4"}) {
    Polynomial g = P(s);
    auto c = cert_of(intsos(g, IntsosParams::defaults_for(g)));
    CHECK(verify_certificate(g, c).ok());
    const int k = g.degree() / 2;
    for (const auto& sq : c.squares) {
      auto info = sq.degree_info();
      CHECK(info.is_homogeneous);
      CHECK(info.total_degree == std::optional<int>(k));
    }
  }
}

TEST_CASE("intsos round-trips 50 random interior-shifted certificates") {
  std::mt19937_64 rng(20240517);
  auto start = std::chrono::steady_clock::now();
  int successes = 0;
  for (int t = 0; t < 50; ++t) {
    std::size_t n = 1 + rng() % 3;
    int d = 1 + static_cast<int>(rng() % 3);
    bool homog = rng() % 2 == 0;
    auto basis = basis_for(n, d, homog ? BasisKind::homogeneous_degree_k : BasisKind::full_degree_le_d);
    WeightedSosCertificate c;
    std::size_t r = 1 + rng() % 3;
    for (std::size_t i = 0; i < r; ++i) {
      Polynomial s(n);
      for (const auto& m : basis.monomials)
        if (rng() % 2 == 0) s.add_term(m, Rational(static_cast<long>(rng() % 7) - 3, 1 + static_cast<long>(rng() % 4)));
      c.weights.push_back(Rational(1 + static_cast<long>(rng() % 5), 1 + static_cast<long>(rng() % 3)));
      c.squares.push_back(s);
    }
    Polynomial g = c.assemble(n) + Rational(1, 4) * basis.square_sum();
    auto res = intsos(g, IntsosParams::defaults_for(g));
    CAPTURE(poly_print(g));
    if (auto* f = std::get_if<IntsosFailure>(&res)) FAIL(f->reason);
    const auto& cert = std::get<WeightedSosCertificate>(res);
    CHECK(verify_certificate(g, cert).ok());
    for (const auto& w : cert.weights) CHECK(w.sign() >= 0);
    ++successes;
  }
  CHECK(successes == 50);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 120.0);
}

TEST_CASE("pure_power_anchor and diagonal_form") {
  CHECK(diagonal_form(2, 1) == P("x1^2 + x2^2"));
  CHECK(diagonal_form(2, 2) == P("x1^4 + x1^2*x2^2 + x2^4"));
  CHECK(pure_power_anchor(P("2*x1^4 + 2*x2^2")) == std::optional<Polynomial>(P("x1^4 + x2^2")));
  CHECK(pure_power_anchor(P("x1^2*x2^2 + x2^2")) == std::nullopt);
}
