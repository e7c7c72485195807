#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lyapcert/exactnum.hpp"
#include "lyapcert/poly.hpp"
#include "lyapcert/sos.hpp"

namespace lyapcert {

using RatVec = std::vector<Rational>;
/// Precision index p >= 1, read as 2^-p.
using PrecIndex = long;

/// Regular Cauchy sequence of rationals with a monotone modulus: for n, m >= modulus(p),
/// |approx(n) - approx(m)| <= 2^-p.
struct CReal {
  std::function<Rational(std::uint64_t)> approx;
  std::function<std::uint64_t(PrecIndex)> modulus;
};

using RealVector = std::vector<CReal>;

/// Uniformly continuous function on [lo, hi]: h(a, n) approximates f(a) with convergence
/// modulus alpha; |a - b| <= 2^(-omega(p) + 1) implies |h(a, n) - h(b, n)| <= 2^-p.
struct UniformCont {
  std::function<Rational(const Rational&, std::uint64_t)> h;
  std::function<std::uint64_t(PrecIndex)> alpha;
  std::function<PrecIndex(PrecIndex)> omega;
  Rational lo, hi;
};

/// Multivariate analogue on the 1-norm ball { e : |e - center|_1 <= radius }.
struct ContMV {
  std::function<Rational(const RatVec&, std::uint64_t)> h;
  std::function<std::uint64_t(PrecIndex)> alpha;
  std::function<PrecIndex(PrecIndex)> omega;
  RatVec center;
  Rational radius;

  bool contains(const RatVec& e) const;
};

struct Witness {
  std::function<PrecIndex(PrecIndex)> eta;
};

class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

Rational norm1(const RatVec& e);

CReal creal_from_rational(const Rational& a);

struct CauchyReport {
  bool pass = true;
  int trials = 0;
  std::uint64_t n = 0, m = 0;
  Rational an, am;
  std::string describe() const;
};

/// Samples index pairs n, m >= modulus(p) and checks |a_n - a_m| <= 2^-p exactly.
CauchyReport cauchy_sample_check(const CReal& x, PrecIndex p, int trials, std::uint64_t seed = 1);

/// 0 <= a_{M(p)} + 2^-p
bool real_nneg_at(const CReal& x, PrecIndex p);
/// 2^-p <= a_{M(p+1)}
bool real_pos_at(const CReal& x, PrecIndex p);

/// Approximants h(a_n, n), modulus max(alpha(p + 2), M(omega(p + 1) - 1)). Throws DomainError when a
/// sampled approximant of x leaves the domain; later evaluations outside the domain throw as well.
CReal apply_cont(const UniformCont& f, const CReal& x);
CReal apply_cont(const ContMV& f, const RealVector& x);

/// Polynomial as a continuous function on a ball: alpha = 0, omega(p) = p + 1 + ceil log2 L with L
/// a bound on the 1-norm of the gradient over the ball (at least 1).
ContMV poly_to_contmv(const Polynomial& g, const RatVec& center, const Rational& radius);
/// The Lipschitz bound L used by poly_to_contmv, before clamping.
Rational gradient_bound(const Polynomial& g, const RatVec& center, const Rational& radius);

struct SamplingPlan {
  std::vector<RatVec> points;
  std::vector<PrecIndex> precisions;
};

/// Dyadic grid points on the 1-norm shells of radius 2^-p and 2^(-p+1), p = 1..8, at resolution
/// 2^-resolution_bits (coarsened in higher dimensions), topped up with seeded random dyadic points
/// inside the ball until `target` points; precisions 1..8.
SamplingPlan default_plan(std::size_t nvars, std::uint64_t seed = 1, int resolution_bits = 6,
                          std::size_t target = 10000, const Rational& radius = Rational(1));

struct ClauseResult {
  std::string name;
  bool pass = true;
  std::size_t samples = 0;
  std::optional<RatVec> point;
  std::optional<PrecIndex> precision;
  std::optional<Rational> value;
  std::string detail;
  std::string describe() const;
};

struct KernelReport {
  std::vector<ClauseResult> clauses;
  bool pass() const;
};

/// -2^-p <= h(e, n) for every plan point e in the ball, every plan precision p and n >= alpha(p).
KernelReport check_nonneg(const ContMV& g, const SamplingPlan& plan);

/// Clause 1: |center|_1 <= radius. Clause 2: g(0) = 0. Clause 3: every plan point e with
/// 2^-p <= |e|_1 satisfies real_pos_at(g(e), eta(p)).
KernelReport check_pos_def_rat_wit(const ContMV& g, const Witness& w, const SamplingPlan& plan);

/// Continuity clause over the dyadic grid of [lo, hi] with step 2^-step_bits: every grid pair with
/// |a - b| <= 2^(-omega(p) + 1) has |h(a, n) - h(b, n)| <= 2^-p, n = alpha(p).
ClauseResult check_continuity_grid(const UniformCont& f, PrecIndex p, int step_bits);

/// p <= q implies f(p) <= f(q) for p, q in 1..upto.
bool monotone_on(const std::function<long(PrecIndex)>& f, PrecIndex upto);

class CertificateMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// cert must certify g - mu * anchor, where anchor is sum_{|alpha| = k} x^(2 alpha) (E = k) or
/// sum_i x_i^(2 e_i) (E = max e_i). eta(p) = 2E (p + ceil log2 n) + ceil log2(1/mu) + 1, at least 1.
/// Throws std::invalid_argument for mu <= 0 or a malformed anchor, CertificateMismatch when cert fails.
Witness eta_from_certificate(const Polynomial& g, const WeightedSosCertificate& cert, const Polynomial& anchor,
                             const Rational& mu);
/// Diagonal anchor of half degree k.
Witness eta_from_certificate(const Polynomial& g, const WeightedSosCertificate& cert, const Rational& mu,
                             std::size_t nvars, int k);

} // namespace lyapcert
