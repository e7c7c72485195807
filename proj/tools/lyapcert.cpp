#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lyapcert/certfile.hpp"
#include "lyapcert/kernel.hpp"

using namespace lyapcert;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kSynthFailed = 2;
constexpr int kInputError = 3;

struct Options {
  std::string system_path, cert_path, out_path, dump_prefix;
  int kmax = 3;
  std::string eps, strict_shift;
  long delta = 0, delta_c = 0;
  std::uint64_t seed = 1;
  int plan_resolution = 6;
};

void print_verdict(const Verdict& v, const std::vector<std::string>& vars) {
  std::cout << "verdict: " << to_string(v.kind) << "\n";
  if (!v.reason.empty()) std::cout << "reason: " << v.reason << "\n";
  if (v.residual) std::cout << "residual: " << poly_print(*v.residual, vars) << "\n";
}

void dump_sdpa(const PolySystem& sys, const std::string& prefix, int kmax) {
  for (int k = 1; k <= kmax; ++k) {
    try {
      auto s = setup_sdp_k(sys, k);
      const std::string path = prefix + "_k" + std::to_string(k) + ".dat-s";
      std::ofstream out(path);
      if (!out) throw FormatError("cannot write " + path, 0);
      write_sdpa(s.problem, out);
      std::cout << "wrote " << path << "\n";
    } catch (const ParityError& e) {
      std::cout << "k = " << k << ": " << e.what() << "\n";
    }
  }
}

int cmd_synth(const Options& o) {
  const auto sf = read_system_file(o.system_path);
  if (!o.dump_prefix.empty()) dump_sdpa(sf.system, o.dump_prefix, o.kmax);

  SynthParams params;
  params.k_max = o.kmax;
  if (!o.eps.empty() || o.delta > 0 || o.delta_c > 0) {
    IntsosParams ip;
    if (!o.eps.empty()) ip.eps = Rational::parse(o.eps);
    if (o.delta > 0) ip.delta = Precision(o.delta);
    if (o.delta_c > 0) ip.delta_c = Precision(o.delta_c);
    params.intsos = ip;
  }
  if (!o.strict_shift.empty()) params.strict_shift = Rational::parse(o.strict_shift);

  auto r = exact_lyapunov(sf.system, params);
  if (auto* nf = std::get_if<NoCertificateFound>(&r)) {
    std::cout << "no certificate found up to degree " << 2 * o.kmax << "\n" << nf->message() << "\n";
    return kSynthFailed;
  }
  const auto& cert = std::get<LyapunovCertificate>(r);
  const Verdict v = check_lyapunov(sf.system, cert);
  write_certificate_file(o.out_path, CertificateFile{sf.vars, sf.system.mode, cert});
  std::cout << "degree: " << 2 * cert.half_degree << "\n";
  std::cout << "V: " << poly_print(cert.V, sf.vars) << "\n";
  std::cout << "squares: " << cert.cert_V.size() << " (V), " << cert.cert_decrease.size() << " (decrease)\n";
  std::cout << "shifts: muV=" << cert.mu_V << " muD=" << cert.mu_D << "\n";
  print_verdict(v, sf.vars);
  std::cout << "wrote " << o.out_path << "\n";
  return v.valid() ? kOk : kVerifyFailed;
}

std::pair<SystemFile, CertificateFile> load_pair(const Options& o) {
  auto sf = read_system_file(o.system_path);
  auto cf = read_certificate_file(o.cert_path);
  if (cf.vars != sf.vars) throw FormatError("certificate variables differ from the system's", 0);
  if (cf.mode != sf.system.mode) throw FormatError("certificate mode differs from the system's", 0);
  return {std::move(sf), std::move(cf)};
}

int cmd_check(const Options& o) {
  const auto [sf, cf] = load_pair(o);
  const Verdict v = check_lyapunov(sf.system, cf.cert);
  print_verdict(v, sf.vars);
  return v.valid() ? kOk : kVerifyFailed;
}

bool print_report(const std::string& label, const KernelReport& r) {
  for (const auto& c : r.clauses) std::cout << label << " " << c.describe() << "\n";
  return r.pass();
}

void print_eta(const std::string& label, const Witness& w, const SamplingPlan& plan) {
  std::cout << label << " eta:";
  for (PrecIndex p : plan.precisions) std::cout << " " << p << "->" << w.eta(p);
  std::cout << "\n";
}

int cmd_kernel(const Options& o) {
  const auto [sf, cf] = load_pair(o);
  const auto& cert = cf.cert;
  const std::size_t n = sf.system.nvars;
  if (cert.mu_V.sign() <= 0) {
    std::cout << "error: witness derivation impossible (V has no positive muV shift certificate)\n";
    return kVerifyFailed;
  }
  const Verdict v = check_lyapunov(sf.system, cert);
  if (!v.valid()) {
    std::cout << "certificate does not pass check\n";
    print_verdict(v, sf.vars);
    return kVerifyFailed;
  }
  const SamplingPlan plan = default_plan(n, o.seed, o.plan_resolution);
  std::cout << "plan: " << plan.points.size() << " points, precisions " << plan.precisions.front() << ".."
            << plan.precisions.back() << ", seed " << o.seed << "\n";
  const RatVec origin(n, Rational(0));
  bool ok = true;

  try {
    Witness w = eta_from_certificate(cert.V, cert.cert_V, cert.mu_V, n, cert.half_degree);
    print_eta("V", w, plan);
    ok = print_report("V", check_pos_def_rat_wit(poly_to_contmv(cert.V, origin, Rational(1)), w, plan));
  } catch (const std::invalid_argument& e) {
    std::cout << "V: error: witness derivation impossible (" << e.what() << ")\n";
    ok = false;
  }

  const ContMV d = poly_to_contmv(cert.decrease_poly, origin, Rational(1));
  if (cert.mu_D.sign() > 0) {
    auto anchor = pure_power_anchor(cert.decrease_poly);
    try {
      if (!anchor) throw std::invalid_argument("decrease has no pure-power anchor");
      Witness w = eta_from_certificate(cert.decrease_poly, cert.cert_decrease, *anchor, cert.mu_D);
      print_eta("decrease", w, plan);
      ok = print_report("decrease", check_pos_def_rat_wit(d, w, plan)) && ok;
    } catch (const std::invalid_argument& e) {
      std::cout << "decrease: error: witness derivation impossible (" << e.what() << ")\n";
      ok = false;
    }
  } else {
    ok = print_report("decrease", check_nonneg(d, plan)) && ok;
  }
  std::cout << "kernel: " << (ok ? "pass" : "FAIL") << "\n";
  return ok ? kOk : kVerifyFailed;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact SOS Lyapunov certificates for polynomial and rational systems"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "synthesize and verify a certificate");
  synth->add_option("system", o.system_path, "system file")->required();
  synth->add_option("-o,--output", o.out_path, "certificate output path")->required();
  synth->add_option("--kmax", o.kmax, "largest half degree tried")->check(CLI::PositiveNumber);
  synth->add_option("--eps", o.eps, "initial intsos shift (rational)");
  synth->add_option("--delta", o.delta, "initial SDP precision exponent")->check(CLI::PositiveNumber);
  synth->add_option("--delta-c", o.delta_c, "initial rounding precision exponent")->check(CLI::PositiveNumber);
  synth->add_option("--strict-shift", o.strict_shift, "fixed strictness shift mu (rational)");
  synth->add_option("--dump-sdpa", o.dump_prefix, "write each degree's SDP in SDPA format to PREFIX_k<k>.dat-s");

  auto* check = app.add_subcommand("check", "verify a certificate exactly");
  check->add_option("system", o.system_path, "system file")->required();
  check->add_option("certificate", o.cert_path, "certificate file")->required();

  auto* kernel = app.add_subcommand("kernel", "run the constructive sampling checks on a certificate");
  kernel->add_option("system", o.system_path, "system file")->required();
  kernel->add_option("certificate", o.cert_path, "certificate file")->required();
  kernel->add_option("--seed", o.seed, "sampling seed");
  kernel->add_option("--plan-resolution", o.plan_resolution, "grid resolution bits")->check(CLI::Range(1, 16));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*check) return cmd_check(o);
    return cmd_kernel(o);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}
