#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lyapcert/exactnum.hpp"
#include "lyapcert/poly.hpp"
#include "lyapcert/sdp.hpp"
#include "lyapcert/sos.hpp"

namespace lyapcert {

enum class SystemMode { continuous, discrete };

/// x' = p(x) / q(x) componentwise (continuous), or x+ = p(x) / q(x) (discrete).
struct PolySystem {
  std::size_t nvars = 0;
  SystemMode mode = SystemMode::continuous;
  PolyVector numerators;
  PolyVector denominators;

  /// Polynomial right-hand side: all denominators 1.
  static PolySystem polynomial(SystemMode mode, PolyVector numerators);

  /// Throws std::invalid_argument unless sizes agree, every numerator vanishes at the origin and
  /// every denominator is positive at the origin.
  void validate() const;
  /// Distinct denominators other than the constant 1, in first-appearance order.
  PolyVector distinct_denominators() const;
};

enum class Strictness { nonnegative, positive_definite };

struct LyapunovCertificate {
  Polynomial V;
  int half_degree = 1;
  /// Cleared -grad V . f (continuous) or cleared V - V o f (discrete).
  Polynomial decrease_poly;
  Polynomial multiplier;
  /// Certifies V - mu_V * sum_{|alpha| = k} x^(2 alpha).
  WeightedSosCertificate cert_V;
  /// Certifies decrease_poly - mu_D * pure_power_anchor(decrease_poly), or decrease_poly when mu_D = 0.
  WeightedSosCertificate cert_decrease;
  Strictness strictness = Strictness::nonnegative;
  Rational mu_V{0};
  Rational mu_D{0};
};

struct SynthParams {
  int k_max = 3;
  double sdp_tol = 1e-8;
  /// nullopt: IntsosParams::defaults_for each polynomial.
  std::optional<IntsosParams> intsos;
  /// nullopt: 1/100 of the smallest numeric Gram diagonal, as a power of two no smaller than 2^-20.
  std::optional<Rational> strict_shift;
};

struct Decrease {
  Polynomial decrease;
  Polynomial multiplier;
};

Decrease decrease_polynomial(const PolySystem& sys, const Polynomial& V);

class ParityError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// (SDP_k): block 0 is G1 over w_k, block 1 is G2 over the decrease basis; free variable i is the
/// coefficient of V at v_monomials[i]. The last constraint normalizes trace(G1) = |w_k|.
struct LyapunovSdp {
  SdpProblem problem;
  int k = 1;
  MonomialBasis basis_V;
  MonomialBasis basis_D;
  std::vector<Monomial> v_monomials;
  /// Decrease of each x^gamma in v_monomials.
  PolyVector decrease_of;
  Polynomial multiplier;
};

/// Throws ParityError when the cleared decrease has odd degree.
LyapunovSdp setup_sdp_k(const PolySystem& sys, int k);
/// Same, with an explicit basis for the decrease Gram block.
LyapunovSdp setup_sdp_k(const PolySystem& sys, int k, const MonomialBasis& basis_D);

struct NoCertificateFound {
  /// One line per attempted k describing the stage that failed.
  std::vector<std::string> stages;
  std::string message() const;
};

std::variant<LyapunovCertificate, NoCertificateFound> exact_lyapunov(const PolySystem& sys, const SynthParams& params);

enum class VerdictKind { asymptotically_stable, stable, invalid };

struct Verdict {
  VerdictKind kind = VerdictKind::invalid;
  std::string reason;
  /// Exact residual of the identity that failed, when one did.
  std::optional<Polynomial> residual;
  bool valid() const { return kind != VerdictKind::invalid; }
};

std::string to_string(VerdictKind k);

/// Uses the shifts stored in the certificate.
Verdict check_lyapunov(const PolySystem& sys, const LyapunovCertificate& cert);
/// Checks cert_V against V - strict_shift * sum_{|alpha| = k} x^(2 alpha) instead of the stored mu_V.
Verdict check_lyapunov(const PolySystem& sys, const LyapunovCertificate& cert, const Rational& strict_shift);

/// q(0) > 0 and q - q(0) is SOS (termwise or via intsos on q - q(0)/2). Empty string on success.
std::string check_denominator_positive(const Polynomial& q);

} // namespace lyapcert
