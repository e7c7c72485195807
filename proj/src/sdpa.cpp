#include <iomanip>
#include <map>
#include <tuple>

#include "lyapcert/sdp.hpp"

namespace lyapcert {

// SDPA dual form: max <F0, Y> s.t. <Fi, Y> = ci, Y PSD. Our constraints become the Fi,
// their right-hand sides the ci, and the objective (minimized) enters as -F0.
void write_sdpa(const SdpProblem& prob, std::ostream& os) {
  prob.validate();
  const int nsdp = static_cast<int>(prob.blocks.size());
  const bool has_lp = prob.free_vars > 0;
  os << "* lyapcert SDP dump\n";
  os << prob.constraints.size() << "\n";
  os << nsdp + (has_lp ? 1 : 0) << "\n";
  for (int d : prob.blocks) os << d << ' ';
  if (has_lp) os << -2 * prob.free_vars;
  os << "\n";
  os << std::setprecision(17);
  for (const auto& c : prob.constraints) os << c.rhs << ' ';
  os << "\n";

  auto emit = [&](std::size_t matno, const LinearFunctional& f, double sign) {
    std::map<std::tuple<int, int, int>, double> acc;
    for (const auto& e : f.entries) {
      int r = std::min(e.row, e.col), c = std::max(e.row, e.col);
      acc[{e.block + 1, r + 1, c + 1}] += sign * e.value;
    }
    for (const auto& [k, v] : f.free_terms) {
      acc[{nsdp + 1, 2 * k + 1, 2 * k + 1}] += sign * v;
      acc[{nsdp + 1, 2 * k + 2, 2 * k + 2}] -= sign * v;
    }
    for (const auto& [key, v] : acc) {
      if (v == 0.0) continue;
      auto [b, r, c] = key;
      os << matno << ' ' << b << ' ' << r << ' ' << c << ' ' << v << "\n";
    }
  };
  emit(0, prob.objective, -1.0);
  for (std::size_t i = 0; i < prob.constraints.size(); ++i) emit(i + 1, prob.constraints[i].lhs, 1.0);
}

} // namespace lyapcert
