// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include <chrono>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "lyapcert/certfile.hpp"
#include "lyapcert/kernel.hpp"

using namespace lyapcert;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Polynomial P(const std::string& s, std::size_t n = 2) { return poly_parse(s, default_var_names(n)); }

Outcome require(bool cond, const std::string& detail) { return {cond, detail}; }

Outcome example1_identity() {
  auto sys = PolySystem::polynomial(SystemMode::continuous, {P("-x1^3 + x2"), P("-x1 - x2")});
  auto d = decrease_polynomial(sys, P("223/200*x1^2 + 223/200*x2^2"));
  const Polynomial expected = P("223/100*x1^4 + 223/100*x2^2");
  return require(d.decrease == expected && d.multiplier == P("1"), "decrease = " + poly_print(d.decrease));
}

Outcome example3_identity() {
  auto sf = read_system_file(LYAPCERT_FIXTURES "/example3.sys");
  auto Q = [&](const std::string& s) { return poly_parse(s, sf.vars); };
  auto d = decrease_polynomial(sf.system, Q("x^2 + y^2"));
  const Polynomial expected =
      Q("x^6*y^4 + x^4*y^6 + 2*x^6*y^2 + 4*x^4*y^4 + 2*x^2*y^6 + 5*x^4*y^2 + 5*x^2*y^4 + 4*x^2*y^2");
  const Polynomial mult = Q("(1 + x^2)^2*(1 + y^2)^2");
  return require(d.decrease == expected && d.multiplier == mult,
                 "decrease = " + poly_print(d.decrease, sf.vars) + ", multiplier = " + poly_print(d.multiplier, sf.vars));
}

Outcome worked_sos() {
  const Polynomial g = P("4*x1^4 + 4*x1^3*x2 - 7*x1^2*x2^2 - 2*x1*x2^3 + 10*x2^4");
  WeightedSosCertificate c{{Rational(1), Rational(1)}, {P("2*x1*x2 + x2^2"), P("2*x1^2 + x1*x2 - 3*x2^2")}};
  auto r = verify_certificate(g, c);
  return require(r.ok(), r.ok() ? "ExactMatch" : "residual " + poly_print(r.residual));
}

Outcome end_to_end() {
  std::ostringstream msg;
  bool ok = true;
  for (const auto& [name, want_as] : {std::pair{"example1", true}, std::pair{"example2", false}}) {
    auto sf = read_system_file(std::string(LYAPCERT_FIXTURES) + "/" + name + ".sys");
    const auto t0 = std::chrono::steady_clock::now();
    auto r = exact_lyapunov(sf.system, SynthParams{});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (auto* nf = std::get_if<NoCertificateFound>(&r)) {
      msg << name << ": " << nf->message() << "; ";
      ok = false;
      continue;
    }
    // Check the certificate as read back from its text form.
    std::stringstream text;
    write_certificate(text, CertificateFile{sf.vars, sf.system.mode, std::get<LyapunovCertificate>(r)});
    const auto cf = parse_certificate(text);
    const Verdict v = check_lyapunov(sf.system, cf.cert);
    const bool good = cf.cert.half_degree == 1 && secs < 60.0 &&
                      (want_as ? v.kind == VerdictKind::asymptotically_stable : v.valid());
    ok = ok && good;
    msg << name << ": 2k = " << 2 * cf.cert.half_degree << ", " << to_string(v.kind) << ", " << secs << " s; ";
  }
  return {ok, msg.str()};
}

Outcome intsos_round_trip() {
  std::mt19937_64 rng(20240517);
  int ok = 0;
  std::string first_failure;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng() % 3;
    const int d = 1 + static_cast<int>(rng() % 3);
    const bool homog = rng() % 2 == 0;
    auto basis = basis_for(n, d, homog ? BasisKind::homogeneous_degree_k : BasisKind::full_degree_le_d);
    WeightedSosCertificate c;
    const std::size_t r = 1 + rng() % 3;
    for (std::size_t i = 0; i < r; ++i) {
      Polynomial s(n);
      for (const auto& m : basis.monomials)
        if (rng() % 2 == 0) s.add_term(m, Rational(static_cast<long>(rng() % 7) - 3, 1 + static_cast<long>(rng() % 4)));
      c.weights.push_back(Rational(1 + static_cast<long>(rng() % 5), 1 + static_cast<long>(rng() % 3)));
      c.squares.push_back(s);
    }
    const Polynomial g = c.assemble(n) + Rational(1, 4) * basis.square_sum();
    auto res = intsos(g, IntsosParams::defaults_for(g));
    if (auto* f = std::get_if<IntsosFailure>(&res)) {
      if (first_failure.empty()) first_failure = poly_print(g) + ": " + f->reason;
      continue;
    }
    if (verify_certificate(g, std::get<WeightedSosCertificate>(res)).ok()) ++ok;
    else if (first_failure.empty()) first_failure = poly_print(g) + ": verification failed";
  }
  return require(ok == 50, std::to_string(ok) + "/50 ExactMatch" + (first_failure.empty() ? "" : "; " + first_failure));
}

Outcome tamper_rejection() {
  std::mt19937_64 rng(99);
  int rejected = 0, total = 0;
  for (const char* name : {"example1", "example2"}) {
    auto sf = read_system_file(std::string(LYAPCERT_FIXTURES) + "/" + name + ".sys");
    auto r = exact_lyapunov(sf.system, SynthParams{});
    if (!std::holds_alternative<LyapunovCertificate>(r)) return {false, std::string(name) + ": synthesis failed"};
    const auto cert = std::get<LyapunovCertificate>(r);
    if (!check_lyapunov(sf.system, cert).valid()) return {false, std::string(name) + ": untampered certificate invalid"};
    for (int t = 0; t < 50; ++t, ++total) {
      LyapunovCertificate bad = cert;
      const int exp10 = 1 + static_cast<int>(rng() % 6);
      Rational delta(1);
      for (int i = 0; i < exp10; ++i) delta *= Rational(1, 10);
      if (rng() % 2) delta = -delta;
      auto bump = [&](Polynomial& p) {
        auto it = p.terms().begin();
        std::advance(it, static_cast<long>(rng() % p.terms().size()));
        p.add_term(it->first, delta);
      };
      switch (t % 5) {
      case 0: bump(bad.V); break;
      case 1: bump(bad.decrease_poly); break;
      case 2: bad.cert_V.weights[rng() % bad.cert_V.size()] += delta; break;
      case 3: bad.cert_decrease.weights[rng() % bad.cert_decrease.size()] += delta; break;
      case 4: bump(bad.cert_decrease.squares[rng() % bad.cert_decrease.size()]); break;
      }
      const Verdict v = check_lyapunov(sf.system, bad);
      if (!v.valid() && v.residual && !v.residual->is_zero()) ++rejected;
    }
  }
  return require(rejected == total, std::to_string(rejected) + "/" + std::to_string(total) + " rejected with a residual");
}

Outcome continuity_grid() {
  UniformCont f;
  f.h = [](const Rational& a, std::uint64_t) { return a * a; };
  f.alpha = [](PrecIndex) { return std::uint64_t{0}; };
  f.omega = [](PrecIndex p) { return p + 3; };
  f.lo = Rational(0);
  f.hi = Rational(2);
  std::size_t samples = 0;
  for (PrecIndex p = 1; p <= 8; ++p) {
    auto r = check_continuity_grid(f, p, 8);
    samples += r.samples;
    if (!r.pass) return {false, r.describe()};
  }
  return {true, std::to_string(samples) + " grid pairs, zero failures"};
}

Outcome witness_soundness() {
  auto sys = PolySystem::polynomial(SystemMode::continuous, {P("-x1^3 + x2"), P("-x1 - x2")});
  auto r = exact_lyapunov(sys, SynthParams{});
  if (!std::holds_alternative<LyapunovCertificate>(r)) return {false, "synthesis failed"};
  const auto& cert = std::get<LyapunovCertificate>(r);
  Witness w = eta_from_certificate(cert.V, cert.cert_V, cert.mu_V, 2, cert.half_degree);
  bool slope2 = true;
  for (PrecIndex p = 1; p < 64; ++p) slope2 = slope2 && w.eta(p + 1) - w.eta(p) == 2;
  const PrecIndex c = w.eta(1) - 2;
  const auto plan = default_plan(2);
  auto rep = check_pos_def_rat_wit(poly_to_contmv(cert.V, RatVec(2, Rational(0)), Rational(1)), w, plan);
  std::string detail = "eta(p) = 2p + " + std::to_string(c) + ", plan " + std::to_string(plan.points.size()) + " points";
  for (const auto& cl : rep.clauses)
    if (!cl.pass) detail += "; " + cl.describe();
  return require(slope2 && plan.points.size() >= 10000 && rep.pass(), detail);
}

double max_constraint_residual(const SdpProblem& p, const SdpSolution& s) {
  double worst = 0.0;
  for (const auto& c : p.constraints)
    worst = std::max(worst, std::abs(SdpProblem::evaluate(c.lhs, s.blocks, s.free_values) - c.rhs));
  return worst;
}

Outcome sdp_oracle() {
  std::mt19937_64 rng(7);
  const std::vector<std::pair<std::size_t, int>> shapes = {{1, 3}, {1, 9}, {2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}};
  double worst_res = 0.0, worst_eig = std::numeric_limits<double>::infinity();
  int solved = 0;
  for (int t = 0; t < 20; ++t) {
    const auto [n, d] = shapes[rng() % shapes.size()];
    auto basis = basis_for(n, d, BasisKind::full_degree_le_d);
    Polynomial g(n);
    for (int i = 0; i < 3; ++i) {
      Polynomial s(n);
      for (const auto& m : basis.monomials)
        if (rng() % 2 == 0) s.add_term(m, Rational(static_cast<long>(rng() % 9) - 4, 1 + static_cast<long>(rng() % 3)));
      g += s * s;
    }
    g += Rational(1, 8) * basis.square_sum();
    const SdpProblem prob = gram_sdp(gram_constraints(g, basis), basis.size());
    auto r = sdp_solve(prob, 1e-9);
    if (!r.ok()) return {false, "random instance " + std::to_string(t) + ": " + r.message};
    ++solved;
    worst_res = std::max(worst_res, max_constraint_residual(prob, *r.solution));
    worst_eig = std::min(worst_eig, min_eig_estimate(r.solution->blocks[0]));
  }

  // X = I/2 maximizes the slack under trace(X) = 1.
  SdpProblem trace_one;
  trace_one.blocks = {2};
  trace_one.constraints.push_back(SdpConstraint{LinearFunctional{{{0, 0, 0, 1.0}, {0, 1, 1, 1.0}}, {}}, 1.0});
  auto a = sdp_solve(trace_one, 1e-9);
  bool hand = a.ok();
  if (hand) {
    const auto& x = a.solution->blocks[0];
    hand = std::abs(a.solution->slack - 0.5) <= 1e-6 && std::abs(x(0, 0) - 0.5) <= 1e-6 &&
           std::abs(x(0, 1)) <= 1e-6 && std::abs(x(1, 1) - 0.5) <= 1e-6;
  }
  // (x1 + x2)^2 has the all-ones Gram matrix.
  SdpProblem ones;
  ones.blocks = {2};
  for (auto [i, j, rhs] : {std::tuple{0, 0, 1.0}, std::tuple{0, 1, 2.0}, std::tuple{1, 1, 1.0}})
    ones.constraints.push_back(SdpConstraint{LinearFunctional{{{0, i, j, 1.0}}, {}}, rhs});
  auto b = sdp_solve(ones, 1e-9);
  if (hand && b.ok()) {
    const auto& x = b.solution->blocks[0];
    hand = std::abs(x(0, 0) - 1) <= 1e-6 && std::abs(x(0, 1) - 1) <= 1e-6 && std::abs(x(1, 1) - 1) <= 1e-6;
  } else {
    hand = false;
  }

  std::ostringstream msg;
  msg << solved << "/20 solved, max residual " << worst_res << ", min eig " << worst_eig << ", hand instances "
      << (hand ? "match" : "MISMATCH");
  return {worst_res <= 1e-7 && worst_eig >= -1e-7 && hand, msg.str()};
}

} // namespace

int main() {
  const std::vector<std::tuple<std::string, double, std::function<Outcome()>>> criteria = {
      {"1 example1 decrease identity", 1.0, example1_identity},
      {"2 example3 decrease identity", 1.0, example3_identity},
      {"3 worked SOS certificate", 0.1, worked_sos},
      {"4 end-to-end synthesis and check", 120.0, end_to_end},
      {"5 intsos round trip (50)", 120.0, intsos_round_trip},
      {"6 tamper rejection (100)", 30.0, tamper_rejection},
      {"7 continuity grid of x^2 on [0, 2]", 30.0, continuity_grid},
      {"8 witness growth and soundness", 30.0, witness_soundness},
      {"9 SDP oracle equivalence", 60.0, sdp_oracle},
  };
  int failures = 0;
  for (const auto& [name, budget, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget) {
      o.pass = false;
      o.detail += "; over the " + std::to_string(budget) + " s budget";
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  [" << secs << " s]  " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
