#include "lyapcert/kernel.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <random>
#include <sstream>

namespace lyapcert {

namespace {

Rational two_pow_neg(PrecIndex p) { return Rational::pow2(-p); }

std::string vec_to_string(const RatVec& e) {
  std::string s = "(";
  for (std::size_t i = 0; i < e.size(); ++i) s += (i ? ", " : "") + e[i].to_string();
  return s + ")";
}

// Caches approximants of a real whose approx is expensive to evaluate.
CReal memoized(CReal x) {
  auto cache = std::make_shared<std::map<std::uint64_t, Rational>>();
  auto inner = x.approx;
  x.approx = [cache, inner](std::uint64_t n) {
    auto it = cache->find(n);
    if (it != cache->end()) return it->second;
    Rational v = inner(n);
    cache->emplace(n, v);
    return v;
  };
  return x;
}

std::vector<std::uint64_t> domain_probe_indices(const std::function<std::uint64_t(PrecIndex)>& modulus) {
  std::vector<std::uint64_t> idx;
  for (std::uint64_t n = 0; n <= 32; ++n) idx.push_back(n);
  for (PrecIndex p = 1; p <= 12; ++p) idx.push_back(modulus(p));
  return idx;
}

void compositions(int parts, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int v = total; v >= 0; --v) {
    cur.push_back(v);
    compositions(parts - 1, total - v, cur, out);
    cur.pop_back();
  }
}

double binom(double a, double b) {
  double r = 1.0;
  for (int i = 1; i <= static_cast<int>(b); ++i) r = r * (a - b + i) / i;
  return r;
}

} // namespace

Rational norm1(const RatVec& e) {
  Rational s(0);
  for (const auto& x : e) s += x.abs();
  return s;
}

bool ContMV::contains(const RatVec& e) const {
  if (e.size() != center.size()) return false;
  Rational s(0);
  for (std::size_t i = 0; i < e.size(); ++i) s += (e[i] - center[i]).abs();
  return s <= radius;
}

CReal creal_from_rational(const Rational& a) {
  return CReal{[a](std::uint64_t) { return a; }, [](PrecIndex) { return std::uint64_t{0}; }};
}

std::string CauchyReport::describe() const {
  if (pass) return "pass (" + std::to_string(trials) + " pairs)";
  return "fail: |a_" + std::to_string(n) + " - a_" + std::to_string(m) + "| = |" + an.to_string() + " - " +
         am.to_string() + "|";
}

CauchyReport cauchy_sample_check(const CReal& x, PrecIndex p, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("cauchy_sample_check needs at least one trial");
  CauchyReport r;
  const std::uint64_t M = x.modulus(p);
  const Rational bound = two_pow_neg(p);
  std::mt19937_64 rng(seed);
  auto offset = [&]() -> std::uint64_t {
    const unsigned bits = static_cast<unsigned>(rng() % 20);
    return bits == 0 ? 0 : rng() % (std::uint64_t{1} << bits);
  };
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t n = M + (t == 0 ? 0 : offset());
    const std::uint64_t m = M + offset();
    Rational an = x.approx(n), am = x.approx(m);
    ++r.trials;
    if ((an - am).abs() > bound) {
      r.pass = false;
      r.n = n;
      r.m = m;
      r.an = an;
      r.am = am;
      return r;
    }
  }
  return r;
}

bool real_nneg_at(const CReal& x, PrecIndex p) { return Rational(0) <= x.approx(x.modulus(p)) + two_pow_neg(p); }

bool real_pos_at(const CReal& x, PrecIndex p) { return two_pow_neg(p) <= x.approx(x.modulus(p + 1)); }

CReal apply_cont(const UniformCont& f, const CReal& x) {
  auto in_domain = [f](const Rational& a) { return f.lo <= a && a <= f.hi; };
  for (std::uint64_t n : domain_probe_indices(x.modulus)) {
    Rational a = x.approx(n);
    if (!in_domain(a))
      throw DomainError("approximant a_" + std::to_string(n) + " = " + a.to_string() + " lies outside [" +
                        f.lo.to_string() + ", " + f.hi.to_string() + "]");
  }
  CReal y;
  y.approx = [f, x, in_domain](std::uint64_t n) {
    Rational a = x.approx(n);
    if (!in_domain(a)) throw DomainError("approximant a_" + std::to_string(n) + " leaves the domain");
    return f.h(a, n);
  };
  y.modulus = [f, x](PrecIndex p) {
    const PrecIndex q = std::max<PrecIndex>(1, f.omega(p + 1) - 1);
    return std::max(f.alpha(p + 2), x.modulus(q));
  };
  return y;
}

CReal apply_cont(const ContMV& f, const RealVector& x) {
  if (x.size() != f.center.size()) throw DimensionError("argument and ball dimensions differ");
  auto point = [x](std::uint64_t n) {
    RatVec e;
    e.reserve(x.size());
    for (const auto& xi : x) e.push_back(xi.approx(n));
    return e;
  };
  std::vector<std::uint64_t> probe;
  for (std::uint64_t n = 0; n <= 32; ++n) probe.push_back(n);
  for (const auto& xi : x)
    for (PrecIndex p = 1; p <= 12; ++p) probe.push_back(xi.modulus(p));
  for (std::uint64_t n : probe) {
    RatVec e = point(n);
    if (!f.contains(e)) throw DomainError("approximant at index " + std::to_string(n) + " " + vec_to_string(e) +
                                          " lies outside the ball");
  }
  CReal y;
  y.approx = [f, point](std::uint64_t n) {
    RatVec e = point(n);
    if (!f.contains(e)) throw DomainError("approximant at index " + std::to_string(n) + " leaves the ball");
    return f.h(e, n);
  };
  y.modulus = [f, x](PrecIndex p) {
    const PrecIndex q = std::max<PrecIndex>(1, f.omega(p + 1) - 1);
    std::uint64_t m = f.alpha(p + 2);
    for (const auto& xi : x) m = std::max(m, xi.modulus(q));
    return m;
  };
  return y;
}

Rational gradient_bound(const Polynomial& g, const RatVec& center, const Rational& radius) {
  if (center.size() != g.nvars()) throw DimensionError("ball center and polynomial dimensions differ");
  const Rational B = norm1(center) + radius;
  Rational L(0);
  for (const auto& [m, c] : g.terms()) {
    const int deg = m.degree();
    if (deg == 0) continue;
    Rational pw(1);
    for (int i = 0; i < deg - 1; ++i) pw *= B;
    for (std::size_t i = 0; i < g.nvars(); ++i)
      if (m[i] > 0) L += c.abs() * Rational(m[i]) * pw;
  }
  return L;
}

ContMV poly_to_contmv(const Polynomial& g, const RatVec& center, const Rational& radius) {
  if (radius.sign() <= 0) throw std::invalid_argument("ball radius must be positive");
  const Rational L = std::max(gradient_bound(g, center, radius), Rational(1));
  const PrecIndex shift = 1 + ceil_log2(L);
  ContMV f;
  f.h = [g](const RatVec& e, std::uint64_t) { return g.eval(e); };
  f.alpha = [](PrecIndex) { return std::uint64_t{0}; };
  f.omega = [shift](PrecIndex p) { return p + shift; };
  f.center = center;
  f.radius = radius;
  return f;
}

SamplingPlan default_plan(std::size_t nvars, std::uint64_t seed, int resolution_bits, std::size_t target,
                          const Rational& radius) {
  if (nvars == 0) throw std::invalid_argument("sampling plan needs at least one variable");
  if (resolution_bits < 1) throw std::invalid_argument("plan resolution must be at least 1 bit");
  SamplingPlan plan;
  for (PrecIndex p = 1; p <= 8; ++p) plan.precisions.push_back(p);

  // Coarsen the simplex grid until a shell has at most ~2000 compositions.
  int bits = resolution_bits;
  while (bits > 1 && binom(static_cast<double>((1 << bits) + nvars - 1), static_cast<double>(nvars - 1)) > 2000.0)
    --bits;
  const int N = 1 << bits;
  std::vector<std::vector<int>> comps;
  std::vector<int> cur;
  compositions(static_cast<int>(nvars), N, cur, comps);

  std::vector<RatVec> unit;  // points with |e|_1 = 1
  for (const auto& c : comps) {
    std::vector<std::size_t> nz;
    for (std::size_t i = 0; i < nvars; ++i)
      if (c[i] != 0) nz.push_back(i);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nz.size()); ++mask) {
      RatVec e(nvars, Rational(0));
      for (std::size_t j = 0; j < nz.size(); ++j) {
        Rational v(c[nz[j]], N);
        e[nz[j]] = (mask >> j) & 1 ? -v : v;
      }
      unit.push_back(std::move(e));
    }
  }
  const std::size_t stride = std::max<std::size_t>(1, unit.size() / 1500);
  for (PrecIndex j = 0; j <= 8; ++j) {
    const Rational r = two_pow_neg(j);
    if (r > radius) continue;
    for (std::size_t i = 0; i < unit.size(); i += stride) {
      RatVec e = unit[i];
      for (auto& x : e) x *= r;
      plan.points.push_back(std::move(e));
    }
  }

  std::mt19937_64 rng(seed);
  const long b = 10;
  std::size_t random_points = 0;
  while (plan.points.size() < target || random_points < 1000) {
    long j = static_cast<long>(rng() % 11);
    RatVec e(nvars);
    bool zero = true;
    for (auto& x : e) {
      long k = static_cast<long>(rng() % (2 * (1 << b) + 1)) - (1 << b);
      zero = zero && k == 0;
      x = Rational(k) * Rational::pow2(-(b + j));
    }
    if (zero) continue;
    while (norm1(e) > radius)
      for (auto& x : e) x *= Rational(1, 2);
    plan.points.push_back(std::move(e));
    ++random_points;
  }
  return plan;
}

std::string ClauseResult::describe() const {
  std::ostringstream os;
  os << name << ": " << (pass ? "pass" : "FAIL") << " (" << samples << " samples)";
  if (!pass) {
    if (point) os << " at e = " << vec_to_string(*point);
    if (precision) os << ", p = " << *precision;
    if (value) os << ", value " << value->to_string();
    if (!detail.empty()) os << ": " << detail;
  } else if (!detail.empty()) {
    os << " " << detail;
  }
  return os.str();
}

bool KernelReport::pass() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.pass; });
}

KernelReport check_nonneg(const ContMV& g, const SamplingPlan& plan) {
  ClauseResult c;
  c.name = "nonneg";
  for (const auto& e : plan.points) {
    if (!g.contains(e)) continue;
    std::map<std::uint64_t, Rational> vals;
    auto h = [&](std::uint64_t n) {
      auto it = vals.find(n);
      if (it == vals.end()) it = vals.emplace(n, g.h(e, n)).first;
      return it->second;
    };
    ++c.samples;
    for (PrecIndex p : plan.precisions) {
      const std::uint64_t n0 = g.alpha(p);
      for (std::uint64_t n : {n0, n0 + 1, n0 + 16}) {
        Rational v = h(n);
        if (v < -two_pow_neg(p)) {
          c.pass = false;
          c.point = e;
          c.precision = p;
          c.value = v;
          c.detail = "value below -2^-p";
          return KernelReport{{c}};
        }
      }
    }
  }
  return KernelReport{{c}};
}

KernelReport check_pos_def_rat_wit(const ContMV& g, const Witness& w, const SamplingPlan& plan) {
  KernelReport rep;
  const std::size_t n = g.center.size();

  ClauseResult c1;
  c1.name = "clause 1 (center in ball)";
  c1.samples = 1;
  c1.pass = norm1(g.center) <= g.radius;
  if (!c1.pass) c1.detail = "|c|_1 = " + norm1(g.center).to_string() + " exceeds R = " + g.radius.to_string();
  rep.clauses.push_back(c1);

  ClauseResult c2;
  c2.name = "clause 2 (g(0) = 0)";
  const RatVec zero(n, Rational(0));
  for (PrecIndex p : plan.precisions) {
    ++c2.samples;
    Rational v = g.h(zero, g.alpha(p));
    if (!v.is_zero()) {
      c2.pass = false;
      c2.point = zero;
      c2.precision = p;
      c2.value = v;
      break;
    }
  }
  rep.clauses.push_back(c2);

  ClauseResult c3;
  c3.name = "clause 3 (0 #_p e implies 0 <_eta(p) g(e))";
  for (const auto& e : plan.points) {
    if (!g.contains(e)) continue;
    const Rational ne = norm1(e);
    if (ne.is_zero()) continue;
    RealVector ev;
    for (const auto& x : e) ev.push_back(creal_from_rational(x));
    CReal y = memoized(apply_cont(g, ev));
    ++c3.samples;
    for (PrecIndex p : plan.precisions) {
      if (two_pow_neg(p) > ne) continue;
      const PrecIndex q = w.eta(p);
      if (!real_pos_at(y, q)) {
        c3.pass = false;
        c3.point = e;
        c3.precision = p;
        c3.value = y.approx(y.modulus(q + 1));
        c3.detail = "value below 2^-eta(p) with eta(p) = " + std::to_string(q);
        rep.clauses.push_back(c3);
        return rep;
      }
    }
  }
  rep.clauses.push_back(c3);
  return rep;
}

ClauseResult check_continuity_grid(const UniformCont& f, PrecIndex p, int step_bits) {
  ClauseResult c;
  c.name = "continuity p = " + std::to_string(p);
  const Rational step = two_pow_neg(step_bits);
  std::vector<Rational> grid;
  for (Rational a = f.lo; a <= f.hi; a += step) grid.push_back(a);
  const std::uint64_t n = f.alpha(p);
  std::vector<Rational> vals;
  for (const auto& a : grid) vals.push_back(f.h(a, n));
  const Rational dist = Rational::pow2(-f.omega(p) + 1);
  const Rational bound = two_pow_neg(p);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i; j < grid.size() && grid[j] - grid[i] <= dist; ++j) {
      ++c.samples;
      Rational diff = (vals[i] - vals[j]).abs();
      if (diff > bound) {
        c.pass = false;
        c.point = RatVec{grid[i], grid[j]};
        c.precision = p;
        c.value = diff;
        return c;
      }
    }
  return c;
}

bool monotone_on(const std::function<long(PrecIndex)>& f, PrecIndex upto) {
  for (PrecIndex p = 1; p < upto; ++p)
    if (f(p) > f(p + 1)) return false;
  return true;
}

Witness eta_from_certificate(const Polynomial& g, const WeightedSosCertificate& cert, const Polynomial& anchor,
                             const Rational& mu) {
  if (mu.sign() <= 0) throw std::invalid_argument("witness derivation needs a positive shift mu");
  const std::size_t n = g.nvars();
  if (anchor.nvars() != n) throw DimensionError("anchor lives in the wrong ring");
  long E = 0;
  const int deg = anchor.degree();
  if (deg >= 2 && deg % 2 == 0 && anchor == diagonal_form(n, deg / 2)) {
    E = deg / 2;
  } else {
    std::vector<int> seen(n, 0);
    for (const auto& [m, c] : anchor.terms()) {
      std::size_t nz = 0, var = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (m[i] != 0) {
          ++nz;
          var = i;
        }
      if (c != Rational(1) || nz != 1 || m[var] % 2 != 0 || seen[var] != 0)
        throw std::invalid_argument("anchor is neither a diagonal form nor a sum of pure even powers");
      seen[var] = m[var];
      E = std::max<long>(E, m[var] / 2);
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw std::invalid_argument("anchor misses a variable");
  }
  auto vr = verify_certificate(g - mu * anchor, cert);
  if (!vr.ok()) throw CertificateMismatch("certificate does not reassemble g - mu * anchor");
  const long log_n = ceil_log2(Rational(static_cast<long>(n)));
  const long log_mu = ceil_log2(Rational(1) / mu);
  return Witness{[E, log_n, log_mu](PrecIndex p) { return std::max<PrecIndex>(1, 2 * E * (p + log_n) + log_mu + 1); }};
}

Witness eta_from_certificate(const Polynomial& g, const WeightedSosCertificate& cert, const Rational& mu,
                             std::size_t nvars, int k) {
  if (g.nvars() != nvars) throw DimensionError("polynomial and nvars disagree");
  if (k < 1) throw std::invalid_argument("half degree must be at least 1");
  return eta_from_certificate(g, cert, diagonal_form(nvars, k), mu);
}

} // namespace lyapcert
