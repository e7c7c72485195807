#include "lyapcert/certfile.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace lyapcert {

namespace {

constexpr const char* kMagic = "lyapcert-v1";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool starts_with(const std::string& s, std::string_view prefix) { return s.compare(0, prefix.size(), prefix) == 0; }

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

Polynomial parse_at(const std::string& text, const std::vector<std::string>& vars, std::size_t line) {
  try {
    return poly_parse(text, vars);
  } catch (const ParseError& e) {
    throw FormatError(e.what(), line);
  }
}

// Splits "(num) / (den)" at a top-level '/' that directly follows ')'.
std::optional<std::pair<std::string, std::string>> split_fraction(const std::string& rhs) {
  int depth = 0;
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    const char c = rhs[i];
    if (c == '(') ++depth;
    else if (c == ')') --depth;
    else if (c == '/' && depth == 0) {
      const std::string before = trim(std::string_view(rhs).substr(0, i));
      if (!before.empty() && before.back() == ')') return std::pair{before, trim(std::string_view(rhs).substr(i + 1))};
    }
  }
  return std::nullopt;
}

SystemMode parse_mode(const std::string& s, std::size_t line) {
  if (s == "continuous") return SystemMode::continuous;
  if (s == "discrete") return SystemMode::discrete;
  throw FormatError("unknown mode '" + s + "' (expected continuous or discrete)", line);
}

Strictness parse_strictness(const std::string& s, std::size_t line) {
  if (s == "positive_definite") return Strictness::positive_definite;
  if (s == "nonnegative") return Strictness::nonnegative;
  throw FormatError("unknown strictness '" + s + "'", line);
}

Rational parse_rational_at(const std::string& s, std::size_t line) {
  try {
    return Rational::parse(s);
  } catch (const std::exception& e) {
    throw FormatError("bad rational '" + s + "': " + e.what(), line);
  }
}

} // namespace

FormatError::FormatError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

std::string to_string(SystemMode m) { return m == SystemMode::continuous ? "continuous" : "discrete"; }

std::string to_string(Strictness s) { return s == Strictness::positive_definite ? "positive_definite" : "nonnegative"; }

SystemFile parse_system(std::istream& in) {
  SystemFile f;
  std::optional<SystemMode> mode;
  struct Eq {
    std::string rhs;
    std::size_t line;
  };
  std::vector<std::optional<Eq>> eqs;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (starts_with(line, "vars:")) {
      if (!f.vars.empty()) throw FormatError("duplicate vars line", lineno);
      f.vars = split_ws(line.substr(5));
      if (f.vars.empty()) throw FormatError("vars line names no variables", lineno);
      std::set<std::string> uniq(f.vars.begin(), f.vars.end());
      if (uniq.size() != f.vars.size()) throw FormatError("duplicate variable name", lineno);
      eqs.assign(f.vars.size(), std::nullopt);
      continue;
    }
    if (starts_with(line, "mode:")) {
      if (mode) throw FormatError("duplicate mode line", lineno);
      mode = parse_mode(trim(line.substr(5)), lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("expected 'vars:', 'mode:' or an equation", lineno);
    if (f.vars.empty() || !mode) throw FormatError("equation before the vars and mode lines", lineno);
    std::string lhs = trim(std::string_view(line).substr(0, eq));
    const char marker = mode == SystemMode::continuous ? '\'' : '+';
    if (lhs.empty() || lhs.back() != marker)
      throw FormatError(std::string("left-hand side must be <var>") + marker + " in " + to_string(*mode) + " mode",
                        lineno);
    lhs = trim(std::string_view(lhs).substr(0, lhs.size() - 1));
    auto it = std::find(f.vars.begin(), f.vars.end(), lhs);
    if (it == f.vars.end()) throw FormatError("equation for undeclared variable '" + lhs + "'", lineno);
    auto& slot = eqs[static_cast<std::size_t>(it - f.vars.begin())];
    if (slot) throw FormatError("second equation for '" + lhs + "'", lineno);
    slot = Eq{trim(std::string_view(line).substr(eq + 1)), lineno};
  }
  if (f.vars.empty()) throw FormatError("missing vars line", 0);
  if (!mode) throw FormatError("missing mode line", 0);

  const std::size_t n = f.vars.size();
  f.system.nvars = n;
  f.system.mode = *mode;
  for (std::size_t i = 0; i < n; ++i) {
    if (!eqs[i]) throw FormatError("no equation for '" + f.vars[i] + "'", 0);
    const auto& [rhs, line] = *eqs[i];
    if (auto frac = split_fraction(rhs)) {
      f.system.numerators.push_back(parse_at(frac->first, f.vars, line));
      Polynomial q = parse_at(frac->second, f.vars, line);
      if (q.is_zero()) throw FormatError("denominator is zero", line);
      f.system.denominators.push_back(std::move(q));
    } else {
      f.system.numerators.push_back(parse_at(rhs, f.vars, line));
      f.system.denominators.push_back(Polynomial::constant(n, Rational(1)));
    }
  }
  try {
    f.system.validate();
  } catch (const std::logic_error& e) {
    throw FormatError(e.what(), 0);
  }
  return f;
}

SystemFile read_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path, 0);
  return parse_system(in);
}

void write_certificate(std::ostream& out, const CertificateFile& file) {
  const auto& c = file.cert;
  const auto& v = file.vars;
  out << kMagic << "\n";
  out << "nvars: " << v.size() << "\n";
  out << "vars:";
  for (const auto& name : v) out << " " << name;
  out << "\n";
  out << "mode: " << to_string(file.mode) << "\n";
  out << "half_degree: " << c.half_degree << "\n";
  out << "strictness: " << to_string(c.strictness) << "\n";
  out << "shifts: muV=" << c.mu_V << " muD=" << c.mu_D << "\n";
  out << "V: " << poly_print(c.V, v) << "\n";
  out << "multiplier: " << poly_print(c.multiplier, v) << "\n";
  out << "decrease: " << poly_print(c.decrease_poly, v) << "\n";
  auto section = [&](const char* name, const WeightedSosCertificate& w) {
    out << name << ":\n";
    for (std::size_t i = 0; i < w.size(); ++i) out << "c = " << w.weights[i] << " ; s = " << poly_print(w.squares[i], v) << "\n";
  };
  section("cert_V", c.cert_V);
  section("cert_decrease", c.cert_decrease);
  out << "end\n";
}

CertificateFile parse_certificate(std::istream& in) {
  CertificateFile f;
  std::string raw;
  std::size_t lineno = 0;
  auto next = [&](std::string& line) {
    while (std::getline(in, raw)) {
      ++lineno;
      line = trim(raw);
      if (!line.empty() && line[0] != '#') return true;
    }
    return false;
  };
  auto field = [&](const char* key) {
    std::string line;
    if (!next(line)) throw FormatError(std::string("missing '") + key + ":' line", lineno);
    const std::string prefix = std::string(key) + ":";
    if (!starts_with(line, prefix)) throw FormatError(std::string("expected '") + key + ":'", lineno);
    return trim(std::string_view(line).substr(prefix.size()));
  };

  std::string line;
  if (!next(line) || line != kMagic) throw FormatError(std::string("missing '") + kMagic + "' header", lineno);
  const std::string nv = field("nvars");
  std::size_t nvars = 0;
  try {
    std::size_t used = 0;
    const long v = std::stol(nv, &used);
    if (used != nv.size() || v < 1) throw std::invalid_argument(nv);
    nvars = static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw FormatError("bad nvars '" + nv + "'", lineno);
  }
  f.vars = split_ws(field("vars"));
  if (f.vars.size() != nvars) throw FormatError("vars line does not name nvars variables", lineno);
  const std::string mode_text = field("mode");
  f.mode = parse_mode(mode_text, lineno);
  const std::string hd = field("half_degree");
  try {
    std::size_t used = 0;
    f.cert.half_degree = std::stoi(hd, &used);
    if (used != hd.size()) throw std::invalid_argument(hd);
  } catch (const std::exception&) {
    throw FormatError("bad half_degree '" + hd + "'", lineno);
  }
  const std::string strictness_text = field("strictness");
  f.cert.strictness = parse_strictness(strictness_text, lineno);
  {
    const auto words = split_ws(field("shifts"));
    if (words.size() != 2 || !starts_with(words[0], "muV=") || !starts_with(words[1], "muD="))
      throw FormatError("expected 'shifts: muV=<q> muD=<q>'", lineno);
    f.cert.mu_V = parse_rational_at(words[0].substr(4), lineno);
    f.cert.mu_D = parse_rational_at(words[1].substr(4), lineno);
  }
  auto poly_field = [&](const char* key) {
    const std::string text = field(key);
    return parse_at(text, f.vars, lineno);
  };
  f.cert.V = poly_field("V");
  f.cert.multiplier = poly_field("multiplier");
  f.cert.decrease_poly = poly_field("decrease");

  if (!next(line) || line != "cert_V:") throw FormatError("expected 'cert_V:'", lineno);
  WeightedSosCertificate* target = &f.cert.cert_V;
  bool ended = false;
  while (next(line)) {
    if (line == "cert_decrease:") {
      if (target == &f.cert.cert_decrease) throw FormatError("duplicate cert_decrease section", lineno);
      target = &f.cert.cert_decrease;
      continue;
    }
    if (line == "end") {
      ended = true;
      break;
    }
    if (!starts_with(line, "c =")) throw FormatError("expected 'c = <q> ; s = <poly>'", lineno);
    const auto semi = line.find(';');
    if (semi == std::string::npos) throw FormatError("missing ';' between weight and square", lineno);
    const std::string rest = trim(std::string_view(line).substr(semi + 1));
    if (!starts_with(rest, "s =")) throw FormatError("expected 's = <poly>'", lineno);
    target->weights.push_back(parse_rational_at(trim(std::string_view(line).substr(3, semi - 3)), lineno));
    target->squares.push_back(parse_at(trim(std::string_view(rest).substr(3)), f.vars, lineno));
  }
  if (target != &f.cert.cert_decrease) throw FormatError("missing cert_decrease section", lineno);
  if (!ended) throw FormatError("missing 'end' line", lineno);
  return f;
}

CertificateFile read_certificate_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path, 0);
  return parse_certificate(in);
}

void write_certificate_file(const std::string& path, const CertificateFile& file) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path, 0);
  write_certificate(out, file);
  if (!out) throw FormatError("write to " + path + " failed", 0);
}

} // namespace lyapcert
