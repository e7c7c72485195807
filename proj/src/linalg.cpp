#include <algorithm>
#include <cmath>
#include <limits>

#include "lyapcert/sdp.hpp"

namespace lyapcert {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// True when every LDL pivot of (G - shift I) is strictly positive.
bool positive_definite_shifted(const Eigen::MatrixXd& g, double shift) {
  const Eigen::Index n = g.rows();
  Eigen::MatrixXd a = g;
  a.diagonal().array() -= shift;
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    if (!(d > 0.0)) return false;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double l = a(i, j) / d;
      for (Eigen::Index k = j + 1; k <= i; ++k) a(i, k) -= l * a(k, j);
    }
  }
  return true;
}

} // namespace

std::variant<LdlFactor, NotPsd> ldl_decompose(const SymMatrixF& g) {
  const std::size_t n = g.dim();
  const double threshold = 10.0 * kEps * g.max_abs();
  Eigen::MatrixXd a = g.dense();
  LdlFactor f;
  f.L = Eigen::MatrixXd::Identity(n, n);
  f.D.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= f.L(j, k) * f.L(j, k) * f.D[k];
    if (d < -threshold) return NotPsd{j, d};
    if (d <= threshold) {
      f.D[j] = 0.0;
      continue;  // column j of L stays zero below the diagonal
    }
    f.D[j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= f.L(i, k) * f.L(j, k) * f.D[k];
      f.L(i, j) = s / d;
    }
  }
  return f;
}

double min_eig_estimate(const SymMatrixF& g) {
  const std::size_t n = g.dim();
  if (n == 0) return 0.0;
  Eigen::MatrixXd a = g.dense();
  // Gershgorin interval brackets the spectrum.
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double r = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
    lo = std::min(lo, a(i, i) - r);
    hi = std::max(hi, a(i, i) + r);
  }
  const double scale = std::max(1.0, g.max_abs());
  lo -= 1e-12 * scale;
  const double width = 1e-11 * scale;
  while (hi - lo > width) {
    double mid = 0.5 * (lo + hi);
    if (positive_definite_shifted(a, mid)) lo = mid; else hi = mid;
  }
  return lo;
}

} // namespace lyapcert
