#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace lyapcert {

/// Dense symmetric matrix of doubles; only the upper triangle is stored.
class SymMatrixF {
public:
  SymMatrixF() = default;
  explicit SymMatrixF(std::size_t dim) : dim_(dim), data_(dim * (dim + 1) / 2, 0.0) {}

  static SymMatrixF identity(std::size_t dim);
  /// Symmetrizes by averaging with the transpose.
  static SymMatrixF from_dense(const Eigen::MatrixXd& m);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }
  void set(std::size_t i, std::size_t j, double v) { data_[index(i, j)] = v; }
  Eigen::MatrixXd dense() const;
  double max_abs() const;

private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return j * (j + 1) / 2 + i;
  }
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Coefficient of a symmetric constraint matrix: A(row, col) = A(col, row) = value.
/// The functional is the trace inner product, so an off-diagonal entry contributes 2 * value * X(row, col).
struct SdpEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct LinearFunctional {
  std::vector<SdpEntry> entries;
  std::vector<std::pair<int, double>> free_terms;
  bool empty() const { return entries.empty() && free_terms.empty(); }
};

struct SdpConstraint {
  LinearFunctional lhs;
  double rhs = 0.0;
};

/// Equality-constrained problem over positive semidefinite blocks plus free scalars.
struct SdpProblem {
  std::vector<int> blocks;
  int free_vars = 0;
  std::vector<SdpConstraint> constraints;
  /// Minimized when nonempty; otherwise the solver maximizes a uniform eigenvalue slack.
  LinearFunctional objective;

  /// Throws std::invalid_argument on out-of-range indices or an empty constraint list.
  void validate() const;
  /// Value of a functional at (blocks, free).
  static double evaluate(const LinearFunctional& f, const std::vector<SymMatrixF>& blocks,
                         const std::vector<double>& free);
};

struct SdpSolution {
  std::vector<SymMatrixF> blocks;
  std::vector<double> free_values;
  double max_residual = 0.0;
  std::vector<double> min_eig_lower;
  /// Uniform slack: every block minus slack * I is PSD (when maximizing the slack).
  double slack = 0.0;
  int iterations = 0;
};

enum class SdpStatus { solved, infeasible, numerical_failure };

struct SdpResult {
  SdpStatus status = SdpStatus::numerical_failure;
  std::optional<SdpSolution> solution;
  std::string message;
  bool ok() const { return status == SdpStatus::solved; }
};

struct SdpOptions {
  int max_iterations = 200;
  double step_fraction = 0.98;
};

/// Primal-dual interior point (Nesterov-Todd scaling, Mehrotra predictor-corrector).
/// Deterministic: no randomness, fixed initial point.
SdpResult sdp_solve(const SdpProblem& prob, double tol, const SdpOptions& opts = {});

struct LdlFactor {
  Eigen::MatrixXd L;  // unit lower triangular
  std::vector<double> D;
};

struct NotPsd {
  std::size_t pivot_index = 0;
  double pivot = 0.0;
};

/// G = L diag(D) L^T without pivoting. Pivots within 10 * eps * max|G| of zero are clamped to zero
/// and the matching column of L below the diagonal is zeroed; more negative pivots yield NotPsd.
std::variant<LdlFactor, NotPsd> ldl_decompose(const SymMatrixF& g);

/// Lower bound on the smallest eigenvalue, by bisection on the inertia of G - s I.
double min_eig_estimate(const SymMatrixF& g);

/// Sparse SDPA (.dat-s) dump for cross-checking with external solvers.
/// Free variables are split into a nonnegative pair inside a trailing LP block.
void write_sdpa(const SdpProblem& prob, std::ostream& os);

} // namespace lyapcert
