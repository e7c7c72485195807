#include <sstream>

#include "doctest.h"
#include "lyapcert/certfile.hpp"

using namespace lyapcert;

namespace {

SystemFile parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_system(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse_text(text);
  } catch (const FormatError& e) {
    return e.line();
  }
  FAIL("no FormatError for:\n" << text);
  return 0;
}

} // namespace

TEST_CASE("system fixtures parse to the expected fields") {
  auto f1 = read_system_file(LYAPCERT_FIXTURES "/example1.sys");
  CHECK(f1.vars == std::vector<std::string>{"x1", "x2"});
  CHECK(f1.system.mode == SystemMode::continuous);
  CHECK(f1.system.numerators[0] == poly_parse("-x1^3 + x2", f1.vars));
  CHECK(f1.system.denominators[1] == poly_parse("1", f1.vars));

  auto f2 = read_system_file(LYAPCERT_FIXTURES "/example2.sys");
  CHECK(f2.system.nvars == 3);
  CHECK(f2.system.denominators[2] == poly_parse("x3^2 + 1", f2.vars));
  CHECK(f2.system.numerators[2] == poly_parse("-x3*(x3^2 + 1) - 3*x3*x1 + 3*x1^2*x3*(x3^2 + 1)", f2.vars));

  auto f3 = read_system_file(LYAPCERT_FIXTURES "/example3.sys");
  CHECK(f3.system.mode == SystemMode::discrete);
  CHECK(f3.system.numerators[0] == poly_parse("y", f3.vars));
  CHECK(f3.system.denominators[0] == poly_parse("1 + x^2", f3.vars));
}

TEST_CASE("a slash inside a polynomial is a rational coefficient, not a fraction") {
  auto f = parse_text("vars: x\nmode: continuous\nx' = -1/2*x - 1/3*x^3\n");
  CHECK(f.system.numerators[0] == poly_parse("-1/2*x - 1/3*x^3", f.vars));
  CHECK(f.system.denominators[0] == poly_parse("1", f.vars));
}

TEST_CASE("system format errors carry line numbers") {
  CHECK(error_line("vars: x\nmode: continuous\nx' = x +* 1\n") == 3);
  CHECK(error_line("vars: x\nmode: sideways\n") == 2);
  CHECK(error_line("vars: x\nmode: discrete\nx' = -x\n") == 3);
  CHECK(error_line("vars: x\nmode: continuous\ny' = -x\n") == 3);
  CHECK(error_line("vars: x\nmode: continuous\nx' = -x\nx' = -x\n") == 4);
  CHECK(error_line("vars: x x\n") == 1);
  CHECK(error_line("x' = -x\n") == 1);
  CHECK(error_line("vars: x\nmode: continuous\nx' = (-x) / (0)\n") == 3);
  // Structural failures are not tied to a line.
  CHECK(error_line("vars: x y\nmode: continuous\nx' = -x\n") == 0);
  CHECK(error_line("vars: x\nmode: continuous\nx' = 1 - x\n") == 0);
  CHECK(error_line("vars: x\nmode: continuous\nx' = (-x) / (x)\n") == 0);
  CHECK_THROWS_AS(read_system_file(LYAPCERT_FIXTURES "/missing.sys"), FormatError);
  CHECK_THROWS_AS(read_system_file(LYAPCERT_FIXTURES "/bad_syntax.sys"), FormatError);
}

TEST_CASE("certificate serialization round-trips exactly") {
  auto sf = read_system_file(LYAPCERT_FIXTURES "/example1.sys");
  auto r = exact_lyapunov(sf.system, SynthParams{});
  REQUIRE(std::holds_alternative<LyapunovCertificate>(r));
  CertificateFile cf{sf.vars, sf.system.mode, std::get<LyapunovCertificate>(r)};

  std::stringstream ss;
  write_certificate(ss, cf);
  auto back = parse_certificate(ss);
  CHECK(back.vars == cf.vars);
  CHECK(back.mode == cf.mode);
  const auto& a = cf.cert;
  const auto& b = back.cert;
  CHECK(b.V == a.V);
  CHECK(b.half_degree == a.half_degree);
  CHECK(b.multiplier == a.multiplier);
  CHECK(b.decrease_poly == a.decrease_poly);
  CHECK(b.strictness == a.strictness);
  CHECK(b.mu_V == a.mu_V);
  CHECK(b.mu_D == a.mu_D);
  CHECK(b.cert_V.weights == a.cert_V.weights);
  CHECK(b.cert_V.squares == a.cert_V.squares);
  CHECK(b.cert_decrease.weights == a.cert_decrease.weights);
  CHECK(b.cert_decrease.squares == a.cert_decrease.squares);
  CHECK(check_lyapunov(sf.system, b).kind == VerdictKind::asymptotically_stable);

  std::stringstream again;
  write_certificate(again, back);
  std::stringstream first;
  write_certificate(first, cf);
  CHECK(again.str() == first.str());
}

TEST_CASE("malformed certificates are rejected") {
  const std::string good =
      "lyapcert-v1\nnvars: 1\nvars: x\nmode: continuous\nhalf_degree: 1\nstrictness: positive_definite\n"
      "shifts: muV=1/2 muD=1\nV: x^2\nmultiplier: 1\ndecrease: 2*x^2\ncert_V:\nc = 1/2 ; s = x\n"
      "cert_decrease:\nc = 1 ; s = x\nend\n";
  {
    std::istringstream in(good);
    auto f = parse_certificate(in);
    CHECK(f.cert.cert_V.weights == std::vector<Rational>{Rational(1, 2)});
    CHECK(f.cert.mu_V == Rational(1, 2));
  }
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      parse_certificate(in);
    } catch (const FormatError& e) {
      return e.line();
    }
    return 999;
  };
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  CHECK(line_of(replace("lyapcert-v1", "lyapcert-v0")) == 1);
  CHECK(line_of(replace("nvars: 1", "nvars: two")) == 2);
  CHECK(line_of(replace("mode: continuous", "mode: hybrid")) == 4);
  CHECK(line_of(replace("muV=1/2", "muV=1/0")) == 7);
  CHECK(line_of(replace("V: x^2", "V: x^^2")) == 8);
  CHECK(line_of(replace("c = 1/2 ; s = x", "c = 1/2 s = x")) == 12);
  CHECK(line_of(replace("end\n", "")) != 999);
  CHECK(line_of(replace("cert_decrease:\nc = 1 ; s = x\n", "")) != 999);
}
