#pragma once

// Small dense primal-dual interior-point SDP solver (HKM search direction,
// Mehrotra-style centering) for problems of the form
//
//   maximize <C, X>  s.t.  <A_k, X> = b_k,  X psd
//   minimize b^T y   s.t.  sum_k y_k A_k - C = Z,  Z psd
//
// Constraint matrices are sparse symmetric; the intended sizes are a few
// dozen rows/columns and a few hundred constraints.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include "ctxkit/error.hpp"

namespace ctxkit::sdp {

/// Symmetric matrix as a list of (row, col, value) entries. Off-diagonal
/// entries must be listed in both triangles.
struct SparseSym {
  std::vector<std::tuple<int, int, double>> entries;

  static SparseSym identity(int n) {
    SparseSym s;
    for (int i = 0; i < n; ++i) s.entries.emplace_back(i, i, 1.0);
    return s;
  }
  /// <E, X> = X(i, j) for i != j.
  static SparseSym pick(int i, int j) {
    SparseSym s;
    if (i == j) {
      s.entries.emplace_back(i, i, 1.0);
    } else {
      s.entries.emplace_back(i, j, 0.5);
      s.entries.emplace_back(j, i, 0.5);
    }
    return s;
  }

  double dot(const Eigen::MatrixXd& X) const {
    double s = 0;
    for (const auto& [a, b, v] : entries) s += v * X(a, b);
    return s;
  }
  void add_to(Eigen::MatrixXd& M, double scale) const {
    for (const auto& [a, b, v] : entries) M(a, b) += scale * v;
  }
};

struct Problem {
  Eigen::MatrixXd C;
  std::vector<SparseSym> A;
  Eigen::VectorXd b;
};

struct Options {
  double tol = 1e-9;
  int max_iterations = 150;
};

struct Solution {
  Eigen::MatrixXd X, Z;
  Eigen::VectorXd y;
  double primal_objective = 0;
  double dual_objective = 0;
  double primal_infeasibility = 0;
  double dual_infeasibility = 0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Largest alpha in (0, 1] with M + alpha*D positive definite, damped.
inline double max_step(const Eigen::MatrixXd& M, const Eigen::MatrixXd& D) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return 0.0;
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd W = L.triangularView<Eigen::Lower>().solve(D);
  Eigen::MatrixXd Wt = W.transpose();
  W = L.triangularView<Eigen::Lower>().solve(Wt).transpose().eval();
  Eigen::MatrixXd Ws = (0.5 * (W + W.transpose())).eval();
  double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Ws, Eigen::EigenvaluesOnly)
                    .eigenvalues()
                    .minCoeff();
  if (lmin >= 0) return 1.0;
  return std::min(1.0, 0.95 * (-1.0 / lmin));
}

inline Eigen::VectorXd apply_A(const std::vector<SparseSym>& A, const Eigen::MatrixXd& X) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(A.size()));
  for (std::size_t k = 0; k < A.size(); ++k) v(static_cast<Eigen::Index>(k)) = A[k].dot(X);
  return v;
}

inline Eigen::MatrixXd apply_At(const std::vector<SparseSym>& A, const Eigen::VectorXd& y, int n) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < A.size(); ++k) A[k].add_to(M, y(static_cast<Eigen::Index>(k)));
  return M;
}

}  // namespace detail

inline Solution solve(const Problem& p, const Options& opt = {}) {
  const int n = static_cast<int>(p.C.rows());
  const auto m = static_cast<Eigen::Index>(p.A.size());
  if (p.C.cols() != n || p.b.size() != m) fail(ErrorKind::structural, "SDP dimension mismatch");

  const double cnorm = std::max(1.0, p.C.norm());
  const double bnorm = std::max(1.0, p.b.norm());
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd Z = cnorm * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  Solution sol;
  for (int it = 0; it < opt.max_iterations; ++it) {
    sol.iterations = it;
    Eigen::VectorXd Rp = p.b - detail::apply_A(p.A, X);
    Eigen::MatrixXd Rd = p.C - detail::apply_At(p.A, y, n) + Z;
    const double pobj = (p.C.cwiseProduct(X)).sum();
    const double dobj = p.b.dot(y);
    const double pinf = Rp.norm() / bnorm;
    const double dinf = Rd.norm() / cnorm;
    const double rgap = std::fabs(pobj - dobj) / (1.0 + std::fabs(pobj) + std::fabs(dobj));
    sol.primal_objective = pobj;
    sol.dual_objective = dobj;
    sol.primal_infeasibility = pinf;
    sol.dual_infeasibility = dinf;
    if (pinf < opt.tol && dinf < opt.tol && rgap < opt.tol) {
      sol.converged = true;
      break;
    }
    const double mu = X.cwiseProduct(Z).sum() / n;

    Eigen::LDLT<Eigen::MatrixXd> zfac(Z);
    Eigen::MatrixXd Zi = zfac.solve(Eigen::MatrixXd::Identity(n, n));
    Zi = (0.5 * (Zi + Zi.transpose())).eval();

    // Schur complement M_kl = tr(A_k X A_l Z^{-1}).
    Eigen::MatrixXd M(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index l = k; l < m; ++l) {
        double s = 0;
        for (const auto& [a, b, v] : p.A[static_cast<std::size_t>(k)].entries)
          for (const auto& [c, d, u] : p.A[static_cast<std::size_t>(l)].entries)
            s += v * u * X(b, c) * Zi(d, a);
        M(k, l) = s;
        M(l, k) = s;
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> mfac(M);
    if (mfac.info() != Eigen::Success) break;

    auto direction = [&](double sigma_mu, Eigen::MatrixXd& dX, Eigen::VectorXd& dy,
                         Eigen::MatrixXd& dZ) {
      Eigen::MatrixXd R = sigma_mu * Zi - X + X * Rd * Zi;
      Eigen::VectorXd rhs = detail::apply_A(p.A, R) - Rp;
      dy = mfac.solve(rhs);
      dZ = detail::apply_At(p.A, dy, n) - Rd;
      dX = sigma_mu * Zi - X - X * dZ * Zi;
      dX = (0.5 * (dX + dX.transpose())).eval();
    };

    Eigen::MatrixXd dX, dZ;
    Eigen::VectorXd dy;
    direction(0.0, dX, dy, dZ);
    double ap = detail::max_step(X, dX);
    double ad = detail::max_step(Z, dZ);
    const double mu_aff = (X + ap * dX).cwiseProduct(Z + ad * dZ).sum() / n;
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3);
    sigma = std::clamp(sigma, 1e-3, 0.9);

    direction(sigma * mu, dX, dy, dZ);
    ap = detail::max_step(X, dX);
    ad = detail::max_step(Z, dZ);
    if (ap <= 0 || ad <= 0) break;
    X += ap * dX;
    X = (0.5 * (X + X.transpose())).eval();
    y += ad * dy;
    Z += ad * dZ;
    Z = (0.5 * (Z + Z.transpose())).eval();
  }
  sol.X = X;
  sol.Z = Z;
  sol.y = y;
  return sol;
}

}  // namespace ctxkit::sdp
