#pragma once

// Independent ground truth: the periodic Riccati difference recursion with
// active-sensor reduction, and a plain DARE fixed-point solver.

#include <vector>

#include "mrkf/cyclic.hpp"
#include "mrkf/model.hpp"

namespace mrkf {

struct RiccatiTrace {
  std::vector<Matrix> P;      // periodic prior covariances P_k, k = 0..N-1
  std::vector<Matrix> gains;  // periodic predictor gains L_k = A K_k
  int iterations = 0;         // periods until convergence
  double residual = 0.0;      // final period-to-period max Frobenius change
};

/// Iterates the time-varying Riccati recursion using only the active
/// measurement rows at each step until the per-period covariances settle.
/// P0 is the prior covariance at phase 0.
inline RiccatiTrace periodic_riccati(const MultirateModel& m, const Matrix& p0,
                                     double tol = 1e-11, int max_iters = 100000) {
  const int n = m.n();
  const int q = m.q();
  const int N = m.N();
  const Matrix& A = m.sys.A;
  const Matrix& C = m.sys.C;
  if (p0.rows() != n || p0.cols() != n)
    throw DimensionMismatch("periodic_riccati: P0 must be n x n");

  RiccatiTrace tr;
  tr.P.assign(N, Matrix());
  tr.gains.assign(N, Matrix::Zero(n, q));

  std::vector<Matrix> prev(N, Matrix::Zero(n, n));
  Matrix p = p0;
  for (int period = 0; period < max_iters; ++period) {
    double resid = 0.0;
    for (int k = 0; k < N; ++k) {
      tr.P[k] = p;
      resid = std::max(resid, (p - prev[k]).norm());
      prev[k] = p;

      const std::vector<int> rows = m.schedule.active_rows(k);
      if (rows.empty()) {
        tr.gains[k] = Matrix::Zero(n, q);
        p = A * p * A.transpose() + m.noise.Q;  // pure prediction
        continue;
      }
      const int qa = static_cast<int>(rows.size());
      Matrix ca(qa, n), ra(qa, qa);
      for (int i = 0; i < qa; ++i) {
        ca.row(i) = C.row(rows[i]);
        for (int j = 0; j < qa; ++j) ra(i, j) = m.noise.R(rows[i], rows[j]);
      }
      const Matrix innov = ca * p * ca.transpose() + ra;
      const Matrix k_red = p * ca.transpose() * innov.inverse();
      const Matrix l_red = A * k_red;
      tr.gains[k].setZero();
      for (int i = 0; i < qa; ++i) tr.gains[k].col(rows[i]) = l_red.col(i);
      p = A * (p - k_red * ca * p) * A.transpose() + m.noise.Q;
    }
    tr.iterations = period + 1;
    tr.residual = resid;
    if (period > 0 && resid < tol) return tr;
  }
  throw NoConvergence("periodic_riccati: no periodic steady state after max_iters");
}

struct DareResult {
  Matrix P;     // stabilizing solution
  Matrix K_ss;  // update-form gain
  Matrix L_ss;  // predictor-form gain A * K_ss
  int iterations = 0;
};

/// Fixed-point iteration of the DARE
///   P = A P A^T - A P C^T (C P C^T + R)^{-1} C P A^T + Q.
inline DareResult dare_fixed_point(const Matrix& A, const Matrix& C, const Matrix& Q,
                                   const Matrix& R, double tol = 1e-12,
                                   int max_iters = 100000) {
  const int n = static_cast<int>(A.rows());
  DareResult res;
  Matrix p = Matrix::Identity(n, n);
  for (int it = 0; it < max_iters; ++it) {
    const Matrix innov = C * p * C.transpose() + R;
    const Matrix pc = p * C.transpose();
    Matrix pn = A * p * A.transpose() -
                A * pc * innov.inverse() * pc.transpose() * A.transpose() + Q;
    pn = 0.5 * (pn + pn.transpose());
    const double resid = (pn - p).norm();
    p = pn;
    res.iterations = it + 1;
    if (resid < tol) {
      res.P = p;
      res.K_ss = p * C.transpose() * (C * p * C.transpose() + R).inverse();
      res.L_ss = A * res.K_ss;
      return res;
    }
  }
  throw NoConvergence("dare_fixed_point: no convergence after max_iters");
}

struct CrossValidationReport {
  std::vector<double> gain_gap;  // per-phase Frobenius gap LMI vs Riccati
  double max_gain_gap = 0.0;
  double oracle_trace = 0.0;  // sum_k trace(P_k) over one period
  bool covariance_bound_ok = true;  // P_k <= matching block of X^{-1} + tol I
  double worst_bound_violation = 0.0;
};

/// Compares designed periodic gains against the periodic-Riccati oracle and
/// checks the per-phase covariance bound against the blocks of Xinv.
inline CrossValidationReport cross_validate(const MultirateModel& m,
                                            const std::vector<Matrix>& gains,
                                            const Matrix& x_inv,
                                            double bound_tol = 1e-4) {
  CrossValidationReport rep;
  RiccatiTrace tr = periodic_riccati(m, Matrix::Identity(m.n(), m.n()));
  const int N = m.N();
  const int n = m.n();
  rep.gain_gap.resize(N);
  for (int k = 0; k < N; ++k) {
    rep.gain_gap[k] = (gains[k] - tr.gains[k]).norm();
    rep.max_gain_gap = std::max(rep.max_gain_gap, rep.gain_gap[k]);
    rep.oracle_trace += tr.P[k].trace();
    if (x_inv.size() > 0) {
      const Matrix block = x_inv.block(k * n, k * n, n, n);
      const double viol = -min_eigenvalue(block - tr.P[k]);
      rep.worst_bound_violation = std::max(rep.worst_bound_violation, viol);
      if (viol > bound_tol) rep.covariance_bound_ok = false;
    }
  }
  return rep;
}

}  // namespace mrkf
