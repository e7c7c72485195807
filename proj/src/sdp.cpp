#include "lyapcert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lyapcert {

using Eigen::MatrixXd;
using Eigen::VectorXd;

SymMatrixF SymMatrixF::identity(std::size_t dim) {
  SymMatrixF m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrixF SymMatrixF::from_dense(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymMatrixF needs a square matrix");
  SymMatrixF s(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i) s.set(i, j, 0.5 * (m(i, j) + m(j, i)));
  return s;
}

MatrixXd SymMatrixF::dense() const {
  MatrixXd m(dim_, dim_);
  for (std::size_t j = 0; j < dim_; ++j)
    for (std::size_t i = 0; i <= j; ++i) m(i, j) = m(j, i) = (*this)(i, j);
  return m;
}

double SymMatrixF::max_abs() const {
  double r = 0.0;
  for (double v : data_) r = std::max(r, std::abs(v));
  return r;
}

void SdpProblem::validate() const {
  if (constraints.empty()) throw std::invalid_argument("SDP needs at least one constraint");
  if (free_vars < 0) throw std::invalid_argument("negative free variable count");
  for (int d : blocks)
    if (d <= 0) throw std::invalid_argument("block dimensions must be positive");
  auto check = [&](const LinearFunctional& f) {
    for (const auto& e : f.entries) {
      if (e.block < 0 || e.block >= static_cast<int>(blocks.size()))
        throw std::invalid_argument("constraint references unknown block " + std::to_string(e.block));
      int n = blocks[e.block];
      if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n)
        throw std::invalid_argument("constraint entry outside block bounds");
      if (!std::isfinite(e.value)) throw std::invalid_argument("non-finite constraint coefficient");
    }
    for (const auto& [k, v] : f.free_terms) {
      if (k < 0 || k >= free_vars) throw std::invalid_argument("constraint references unknown free variable");
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite constraint coefficient");
    }
  };
  for (const auto& c : constraints) {
    check(c.lhs);
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("non-finite right-hand side");
  }
  check(objective);
}

double SdpProblem::evaluate(const LinearFunctional& f, const std::vector<SymMatrixF>& blocks,
                            const std::vector<double>& free) {
  double s = 0.0;
  for (const auto& e : f.entries) {
    double x = blocks[e.block](e.row, e.col);
    s += (e.row == e.col ? 1.0 : 2.0) * e.value * x;
  }
  for (const auto& [k, v] : f.free_terms) s += v * free[k];
  return s;
}

namespace {

struct Entry {
  int r, c;
  double v;
};

// Problem in solver form: min <C,X> + cf'u  s.t.  A(X) + F u = b,  X PSD.
struct Standard {
  std::vector<int> dims;
  int m = 0;
  int nfree = 0;
  // rows[i][blk] = sparse entries (r <= c) of constraint i in block blk
  std::vector<std::vector<std::vector<Entry>>> rows;
  MatrixXd F;  // m x nfree
  VectorXd b;
  std::vector<MatrixXd> C;
  VectorXd cf;
};

using Blocks = std::vector<MatrixXd>;

double inner(const MatrixXd& a, const MatrixXd& b) { return (a.array() * b.array()).sum(); }

VectorXd apply_A(const Standard& P, const Blocks& X) {
  VectorXd out = VectorXd::Zero(P.m);
  for (int i = 0; i < P.m; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < P.dims.size(); ++k)
      for (const Entry& e : P.rows[i][k]) s += (e.r == e.c ? 1.0 : 2.0) * e.v * X[k](e.r, e.c);
    out(i) = s;
  }
  return out;
}

Blocks apply_At(const Standard& P, const VectorXd& y) {
  Blocks out;
  for (int d : P.dims) out.push_back(MatrixXd::Zero(d, d));
  for (int i = 0; i < P.m; ++i) {
    if (y(i) == 0.0) continue;
    for (std::size_t k = 0; k < P.dims.size(); ++k)
      for (const Entry& e : P.rows[i][k]) {
        out[k](e.r, e.c) += y(i) * e.v;
        if (e.r != e.c) out[k](e.c, e.r) += y(i) * e.v;
      }
  }
  return out;
}

// Largest step t with M + t dM PSD, for M = L L^T positive definite.
double max_step(const Eigen::LLT<MatrixXd>& llt, const MatrixXd& dM) {
  MatrixXd Li = llt.matrixL().solve(MatrixXd::Identity(dM.rows(), dM.cols()));
  MatrixXd T = Li * dM * Li.transpose();
  T = 0.5 * (T + T.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

struct Scaling {
  MatrixXd G;     // X = G V G^T, S = G^-T V G^-1
  MatrixXd Ginv;
  MatrixXd W;     // G G^T
  VectorXd v;     // scaled point (diagonal)
};

bool nt_scaling(const MatrixXd& X, const MatrixXd& S, Scaling& out) {
  Eigen::LLT<MatrixXd> lx(X), ls(S);
  if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
  MatrixXd Lx = lx.matrixL();
  MatrixXd Ls = ls.matrixL();
  Eigen::JacobiSVD<MatrixXd> svd(Ls.transpose() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  VectorXd sig = svd.singularValues();
  if (sig.minCoeff() <= 0.0 || !sig.allFinite()) return false;
  const MatrixXd& Q = svd.matrixV();
  VectorXd isq = sig.array().rsqrt();
  out.G = Lx * Q * isq.asDiagonal();
  MatrixXd LxInv = Lx.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(X.rows(), X.cols()));
  out.Ginv = sig.array().sqrt().matrix().asDiagonal() * Q.transpose() * LxInv;
  out.W = out.G * out.G.transpose();
  out.v = sig;
  return true;
}

// Solves V o Z = R (Jordan product with diagonal V) and maps back: G Z G^T.
MatrixXd unscale_complementarity(const Scaling& sc, const MatrixXd& R) {
  const Eigen::Index n = R.rows();
  MatrixXd Z(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) Z(i, j) = 2.0 * R(i, j) / (sc.v(i) + sc.v(j));
  return sc.G * Z * sc.G.transpose();
}

MatrixXd schur_matrix(const Standard& P, const std::vector<Scaling>& sc) {
  MatrixXd M = MatrixXd::Zero(P.m, P.m);
  for (std::size_t k = 0; k < P.dims.size(); ++k) {
    const MatrixXd& W = sc[k].W;
    const int n = P.dims[k];
    for (int j = 0; j < P.m; ++j) {
      const auto& Aj = P.rows[j][k];
      if (Aj.empty()) continue;
      MatrixXd Pj = MatrixXd::Zero(n, n);
      for (const Entry& e : Aj) {
        if (e.r == e.c) {
          Pj.noalias() += e.v * W.col(e.r) * W.col(e.r).transpose();
        } else {
          Pj.noalias() += e.v * (W.col(e.r) * W.col(e.c).transpose() + W.col(e.c) * W.col(e.r).transpose());
        }
      }
      for (int i = 0; i < P.m; ++i) {
        double s = 0.0;
        for (const Entry& e : P.rows[i][k]) s += (e.r == e.c ? 1.0 : 2.0) * e.v * Pj(e.r, e.c);
        M(i, j) += s;
      }
    }
  }
  return 0.5 * (M + M.transpose());
}

struct Direction {
  Blocks dX, dS;
  VectorXd dy, du;
};

struct NewtonSystem {
  MatrixXd K;
  Eigen::PartialPivLU<MatrixXd> lu;
  int m = 0, f = 0;
};

Direction solve_direction(const Standard& P, const NewtonSystem& ns, const std::vector<Scaling>& sc,
                          const VectorXd& rp, const Blocks& Rd, const VectorXd& rf, const Blocks& Rc) {
  Blocks tmp;
  for (std::size_t k = 0; k < P.dims.size(); ++k) tmp.push_back(Rc[k] - sc[k].W * Rd[k] * sc[k].W);
  VectorXd rhs(ns.m + ns.f);
  rhs.head(ns.m) = rp - apply_A(P, tmp);
  if (ns.f > 0) rhs.tail(ns.f) = rf;
  VectorXd sol = ns.lu.solve(rhs);
  for (int r = 0; r < 2; ++r) sol += ns.lu.solve(rhs - ns.K * sol);
  Direction d;
  d.dy = sol.head(ns.m);
  d.du = ns.f > 0 ? VectorXd(sol.tail(ns.f)) : VectorXd();
  Blocks Aty = apply_At(P, d.dy);
  for (std::size_t k = 0; k < P.dims.size(); ++k) {
    d.dS.push_back(Rd[k] - Aty[k]);
    MatrixXd dX = Rc[k] - sc[k].W * d.dS[k] * sc[k].W;
    d.dX.push_back(0.5 * (dX + dX.transpose()));
  }
  return d;
}


constexpr int kStallIterations = 15;
constexpr double kLooseTol = 1e-6;

} // namespace

SdpResult sdp_solve(const SdpProblem& prob, double tol, const SdpOptions& opts) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  prob.validate();

  const bool maximize_slack = prob.objective.empty();
  const int nb = static_cast<int>(prob.blocks.size());
  const int nf_user = prob.free_vars;
  const int nf = nf_user + (maximize_slack ? 1 : 0);
  const int slack_idx = nf_user;

  // Column layout for the rank/consistency pass: svec of each block, then free vars.
  std::vector<int> offset(nb + 1, 0);
  for (int k = 0; k < nb; ++k) offset[k + 1] = offset[k] + prob.blocks[k] * (prob.blocks[k] + 1) / 2;
  const int ncols = offset[nb] + nf;
  const int m_all = static_cast<int>(prob.constraints.size());
  auto svec_index = [&](int blk, int r, int c) {
    if (r > c) std::swap(r, c);
    return offset[blk] + c * (c + 1) / 2 + r;
  };

  MatrixXd Adense = MatrixXd::Zero(m_all, ncols);
  VectorXd ball(m_all);
  for (int i = 0; i < m_all; ++i) {
    const auto& con = prob.constraints[i];
    for (const auto& e : con.lhs.entries) {
      Adense(i, svec_index(e.block, e.row, e.col)) += (e.row == e.col ? 1.0 : 2.0) * e.value;
      if (maximize_slack && e.row == e.col) Adense(i, offset[nb] + slack_idx) += e.value;
    }
    for (const auto& [k, v] : con.lhs.free_terms) Adense(i, offset[nb] + k) += v;
    ball(i) = con.rhs;
  }

  SdpResult result;

  // Inconsistent equalities admit no solution at any slack.
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(Adense);
  {
    VectorXd xls = cod.solve(ball);
    double res = (Adense * xls - ball).lpNorm<Eigen::Infinity>();
    double scale = 1.0 + ball.lpNorm<Eigen::Infinity>();
    if (res > 1e-8 * scale) {
      result.status = SdpStatus::infeasible;
      result.message = "equality constraints are inconsistent (least-squares residual " + std::to_string(res) + ")";
      return result;
    }
  }

  // Keep a maximal independent subset of constraints.
  std::vector<int> keep;
  {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(Adense.transpose());
    qr.setThreshold(1e-10);
    const auto rank = qr.rank();
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = 0; i < rank; ++i) keep.push_back(perm(i));
    std::sort(keep.begin(), keep.end());
  }

  Standard P;
  P.dims = prob.blocks;
  P.m = static_cast<int>(keep.size());
  P.nfree = nf;
  P.rows.assign(P.m, std::vector<std::vector<Entry>>(nb));
  P.F = MatrixXd::Zero(P.m, nf);
  P.b = VectorXd(P.m);
  for (int ii = 0; ii < P.m; ++ii) {
    const auto& con = prob.constraints[keep[ii]];
    for (const auto& e : con.lhs.entries) {
      int r = std::min(e.row, e.col), c = std::max(e.row, e.col);
      P.rows[ii][e.block].push_back({r, c, e.value});
      if (maximize_slack && r == c) P.F(ii, slack_idx) += e.value;
    }
    for (const auto& [k, v] : con.lhs.free_terms) P.F(ii, k) += v;
    P.b(ii) = con.rhs;
  }
  for (int d : P.dims) P.C.push_back(MatrixXd::Zero(d, d));
  P.cf = VectorXd::Zero(nf);
  if (maximize_slack) {
    P.cf(slack_idx) = -1.0;
  } else {
    for (const auto& e : prob.objective.entries) {
      P.C[e.block](e.row, e.col) += e.value;
      if (e.row != e.col) P.C[e.block](e.col, e.row) += e.value;
    }
    for (const auto& [k, v] : prob.objective.free_terms) P.cf(k) += v;
  }

  // Initial point.
  int ntot = 0;
  for (int d : P.dims) ntot += d;
  double xi = 1.0;
  for (int i = 0; i < P.m; ++i) {
    double an = 0.0;
    for (int k = 0; k < nb; ++k)
      for (const Entry& e : P.rows[i][k]) an += (e.r == e.c ? 1.0 : 2.0) * e.v * e.v;
    an = std::sqrt(an);
    xi = std::max(xi, (1.0 + std::abs(P.b(i))) / (1.0 + an));
  }
  xi = 1.0 + xi;
  Blocks X, S;
  for (int d : P.dims) {
    X.push_back(xi * MatrixXd::Identity(d, d));
    S.push_back(MatrixXd::Identity(d, d));
  }
  VectorXd y = VectorXd::Zero(P.m);
  VectorXd u = VectorXd::Zero(nf);

  const double bnorm = 1.0 + P.b.lpNorm<Eigen::Infinity>();
  int iter = 0;
  bool converged = false;
  std::string failure;

  // Best iterate so far, used when the iteration stalls near a degenerate optimum.
  struct Snapshot {
    Blocks X, S;
    VectorXd y, u;
    double score = std::numeric_limits<double>::infinity();
    double pinf = 0.0, dinf = 0.0, relgap = 0.0;
    int iter = 0;
  } best;
  int since_best = 0;

  for (; iter < opts.max_iterations; ++iter) {
    VectorXd rp = P.b - apply_A(P, X) - (nf > 0 ? VectorXd(P.F * u) : VectorXd::Zero(P.m));
    Blocks Aty = apply_At(P, y);
    Blocks Rd;
    double dinf = 0.0;
    for (int k = 0; k < nb; ++k) {
      Rd.push_back(P.C[k] - Aty[k] - S[k]);
      dinf = std::max(dinf, Rd[k].lpNorm<Eigen::Infinity>());
    }
    VectorXd rf = nf > 0 ? VectorXd(P.cf - P.F.transpose() * y) : VectorXd();
    if (nf > 0) dinf = std::max(dinf, rf.lpNorm<Eigen::Infinity>());

    double gap = 0.0;
    for (int k = 0; k < nb; ++k) gap += inner(X[k], S[k]);
    double pobj = P.cf.dot(u), dobj = P.b.dot(y);
    for (int k = 0; k < nb; ++k) pobj += inner(P.C[k], X[k]);
    const double mu = gap / std::max(ntot, 1);
    const double pinf = rp.lpNorm<Eigen::Infinity>();
    const double relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));

    if (pinf <= 0.1 * tol && dinf <= tol && relgap <= tol) {
      converged = true;
      break;
    }
    const double score = std::max({pinf / (0.1 * tol), dinf / tol, relgap / tol});
    if (score < 0.9 * best.score) {
      best = Snapshot{X, S, y, u, score, pinf, dinf, relgap, iter};
      since_best = 0;
    } else if (++since_best >= kStallIterations) {
      failure = "stalled";
      break;
    }
    double xmax = 0.0;
    for (int k = 0; k < nb; ++k) xmax = std::max(xmax, X[k].lpNorm<Eigen::Infinity>());
    if (!std::isfinite(gap) || xmax > 1e12 || (nf > 0 && u.lpNorm<Eigen::Infinity>() > 1e12)) {
      failure = "iterates diverged (problem likely unbounded)";
      break;
    }

    std::vector<Scaling> sc(nb);
    bool ok = true;
    for (int k = 0; k < nb && ok; ++k) ok = nt_scaling(X[k], S[k], sc[k]);
    if (!ok) {
      failure = "lost positive definiteness of an iterate";
      break;
    }

    NewtonSystem ns;
    ns.m = P.m;
    ns.f = nf;
    ns.K = MatrixXd::Zero(P.m + nf, P.m + nf);
    ns.K.topLeftCorner(P.m, P.m) = schur_matrix(P, sc);
    if (nf > 0) {
      ns.K.topRightCorner(P.m, nf) = P.F;
      ns.K.bottomLeftCorner(nf, P.m) = P.F.transpose();
    }
    ns.lu.compute(ns.K);

    // Predictor.
    Blocks Rc;
    for (int k = 0; k < nb; ++k) Rc.push_back(-X[k]);
    Direction aff = solve_direction(P, ns, sc, rp, Rd, rf, Rc);
    if (!aff.dy.allFinite()) {
      failure = "singular Newton system";
      break;
    }

    std::vector<Eigen::LLT<MatrixXd>> lx, ls;
    for (int k = 0; k < nb; ++k) {
      lx.emplace_back(X[k]);
      ls.emplace_back(S[k]);
    }
    auto steps = [&](const Direction& d) {
      double ap = 1.0, ad = 1.0;
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, opts.step_fraction * max_step(lx[k], d.dX[k]));
        ad = std::min(ad, opts.step_fraction * max_step(ls[k], d.dS[k]));
      }
      return std::pair{ap, ad};
    };
    auto [ap_aff, ad_aff] = steps(aff);
    double gap_aff = 0.0;
    for (int k = 0; k < nb; ++k) gap_aff += inner(X[k] + ap_aff * aff.dX[k], S[k] + ad_aff * aff.dS[k]);
    double sigma = std::pow(std::clamp(gap_aff / gap, 0.0, 1.0), 3.0);

    // Corrector with second-order term in the scaled space.
    Rc.clear();
    for (int k = 0; k < nb; ++k) {
      const int n = P.dims[k];
      MatrixXd dXs = sc[k].Ginv * aff.dX[k] * sc[k].Ginv.transpose();
      MatrixXd dSs = sc[k].G.transpose() * aff.dS[k] * sc[k].G;
      MatrixXd R = -0.5 * (dXs * dSs + dSs * dXs);
      for (int i = 0; i < n; ++i) R(i, i) += sigma * mu - sc[k].v(i) * sc[k].v(i);
      Rc.push_back(unscale_complementarity(sc[k], R));
    }
    Direction dir = solve_direction(P, ns, sc, rp, Rd, rf, Rc);
    if (!dir.dy.allFinite()) {
      failure = "singular Newton system";
      break;
    }
    auto [ap, ad] = steps(dir);

    // Rounding can push a boundary-hugging step out of the cone; shorten until both factor.
    Blocks Xn, Sn;
    for (int attempt = 0;; ++attempt) {
      Xn.clear();
      Sn.clear();
      bool pd = true;
      for (int k = 0; k < nb; ++k) {
        Xn.push_back(X[k] + ap * dir.dX[k]);
        Sn.push_back(S[k] + ad * dir.dS[k]);
        Xn[k] = 0.5 * (Xn[k] + Xn[k].transpose());
        Sn[k] = 0.5 * (Sn[k] + Sn[k].transpose());
        pd = pd && Eigen::LLT<MatrixXd>(Xn[k]).info() == Eigen::Success &&
             Eigen::LLT<MatrixXd>(Sn[k]).info() == Eigen::Success;
      }
      if (pd || attempt == 30) break;
      ap *= 0.5;
      ad *= 0.5;
    }
    X = std::move(Xn);
    S = std::move(Sn);
    y += ad * dir.dy;
    if (nf > 0) u += ap * dir.du;
  }
  if (!converged) {
    // Accept a stalled iterate whose residuals are still small; the projection below cleans up
    // the primal residual.
    const double loose = std::max(kLooseTol, tol);
    if (std::isfinite(best.score) && best.pinf <= loose * bnorm && best.dinf <= loose && best.relgap <= loose) {
      X = best.X;
      S = best.S;
      y = best.y;
      u = best.u;
      iter = best.iter;
      result.message = "reduced accuracy (" + (failure.empty() ? std::string("iteration limit reached") : failure) + ")";
    } else {
      result.status = SdpStatus::numerical_failure;
      result.message = failure.empty() ? "iteration limit reached" : failure;
      return result;
    }
  }

  // Least-squares projection onto the equality constraints.
  {
    VectorXd z = VectorXd::Zero(ncols);
    for (int k = 0; k < nb; ++k)
      for (int c = 0; c < P.dims[k]; ++c)
        for (int r = 0; r <= c; ++r) z(svec_index(k, r, c)) = X[k](r, c);
    if (nf > 0) z.tail(nf) = u;
    VectorXd dz = cod.solve(VectorXd(ball - Adense * z));
    if (dz.allFinite()) {
      for (int k = 0; k < nb; ++k)
        for (int c = 0; c < P.dims[k]; ++c)
          for (int r = 0; r <= c; ++r) {
            X[k](r, c) += dz(svec_index(k, r, c));
            if (r != c) X[k](c, r) = X[k](r, c);
          }
      if (nf > 0) u += dz.tail(nf);
    }
  }

  SdpSolution sol;
  sol.iterations = iter;
  sol.slack = maximize_slack ? u(slack_idx) : 0.0;
  for (int k = 0; k < nb; ++k) {
    MatrixXd Gk = X[k];
    if (maximize_slack) Gk += sol.slack * MatrixXd::Identity(P.dims[k], P.dims[k]);
    sol.blocks.push_back(SymMatrixF::from_dense(Gk));
  }
  sol.free_values.assign(u.data(), u.data() + nf_user);
  for (const auto& con : prob.constraints)
    sol.max_residual =
        std::max(sol.max_residual, std::abs(SdpProblem::evaluate(con.lhs, sol.blocks, sol.free_values) - con.rhs));
  for (const auto& blk : sol.blocks) sol.min_eig_lower.push_back(min_eig_estimate(blk));
  if (!maximize_slack) {
    sol.slack = sol.min_eig_lower.empty()
                    ? 0.0
                    : *std::min_element(sol.min_eig_lower.begin(), sol.min_eig_lower.end());
  }

  if (sol.slack < -tol) {
    result.status = SdpStatus::infeasible;
    result.message = "maximal eigenvalue slack " + std::to_string(sol.slack) + " is negative";
    result.solution = std::move(sol);
    return result;
  }
  result.status = SdpStatus::solved;
  result.solution = std::move(sol);
  return result;
}

} // namespace lyapcert
