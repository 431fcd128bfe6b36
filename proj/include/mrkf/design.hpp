#pragma once

// Assembly of the filter-design SDPs (optimal, weighted, pole-constrained,
// l2-norm-constrained), gain recovery/extraction, and design verification.

#include <optional>
#include <vector>

#include "mrkf/cyclic.hpp"
#include "mrkf/sdp_solver.hpp"

namespace mrkf {

struct DesignSpec {
  Matrix Gamma;                      // Nn x Nn PD objective weight; empty = identity
  std::optional<double> pole_radius; // disk radius rbar in (0,1)
  std::optional<double> l2_bound;    // gamma_bar > 0
  Matrix Cz;                         // performance output (rows x n); empty = sqrt(0.1) I_n
  double alpha = 1.0;                // l2 scaling degree of freedom
  double epsilon = 1e-6;             // X >= epsilon I
  double margin = 1e-6;              // margin for strict constraints
};

struct VerificationReport {
  double spectral_radius = 0.0;
  bool stable = false;
  double lmi_min_eig = 0.0;             // main LMI at the optimum
  double gain_recovery_residual = 0.0;  // ||X L + Y|| / ||Y||
  double offpattern_rel_norm = 0.0;     // off-pattern blocks of Lcyc, relative
  std::optional<double> pole_margin;    // rbar - max|lambda| when constrained
  std::optional<double> l2_achieved;    // filled by verify command on demand
};

struct FilterDesign {
  CyclicGain gains;
  Matrix X;  // Nn x Nn
  Matrix W;  // Nn x Nn
  double objective = 0.0;
  SdpStatus status = SdpStatus::NumericalFailure;
  int iterations = 0;
  VerificationReport verification;
};

namespace detail {

inline void add_scalar_identity(LmiBlock& blk, int var, double coeff, int brow) {
  const int d = blk.block_dims[brow - 1];
  for (int i = 0; i < d; ++i) {
    Matrix left = Matrix::Zero(d, 1);
    left(i, 0) = coeff;
    Matrix right = Matrix::Zero(1, d);
    right(0, i) = 1.0;
    blk.add_term(var, left, right, brow, brow);
  }
}

inline Matrix block_diag_repeat(const Matrix& m, int N) {
  Matrix out = Matrix::Zero(N * m.rows(), N * m.cols());
  for (int k = 0; k < N; ++k)
    out.block(k * m.rows(), k * m.cols(), m.rows(), m.cols()) = m;
  return out;
}

}  // namespace detail

/// Variable indices shared by all assembled design problems.
struct DesignVariables {
  int X = -1;
  int Y = -1;
  int W = -1;
};

/// The base optimal-filter problem: the 4x4 stability/performance LMI, the
/// X >= eps I floor, the covariance-bound coupling [[W, I],[I, X]] >= 0, and
/// objective trace(W).
inline SdpProblem assemble_kalman_lmi(const CyclicSystem& cs, double epsilon = 1e-6,
                                      DesignVariables* vars_out = nullptr) {
  const int nn = cs.nn();
  const int nq = cs.nq();
  SdpProblem p;
  DesignVariables v;
  v.X = p.add_variable("X", nn, nn, true);
  v.Y = p.add_variable("Y", nn, nq, false);
  v.W = p.add_variable("W", nn, nn, true);

  const Matrix id_nn = Matrix::Identity(nn, nn);
  const Matrix id_nq = Matrix::Identity(nq, nq);

  LmiBlock main;
  main.name = "kalman";
  main.block_dims = {nn, nn, nn, nq};
  main.constant = Matrix::Zero(3 * nn + nq, 3 * nn + nq);
  main.constant.block(2 * nn, 2 * nn, nn, nn) = id_nn;
  main.constant.block(3 * nn, 3 * nn, nq, nq) = id_nq;
  main.add_term(v.X, id_nn, id_nn, 1, 1);
  main.add_term(v.X, id_nn, cs.Acyc, 1, 2);
  main.add_term(v.Y, id_nn, cs.Ccyc, 1, 2);
  main.add_term(v.X, id_nn, cs.Qhalf_cyc, 1, 3);
  main.add_term(v.Y, id_nn, cs.Rhalf_cyc, 1, 4);
  main.add_term(v.X, id_nn, id_nn, 2, 2);
  p.blocks.push_back(std::move(main));

  LmiBlock floor;
  floor.name = "X_floor";
  floor.block_dims = {nn};
  floor.margin = epsilon;
  floor.add_term(v.X, id_nn, id_nn, 1, 1);
  p.blocks.push_back(std::move(floor));

  LmiBlock bound;
  bound.name = "cov_bound";
  bound.block_dims = {nn, nn};
  bound.constant = Matrix::Zero(2 * nn, 2 * nn);
  bound.constant.block(0, nn, nn, nn) = id_nn;
  bound.constant.block(nn, 0, nn, nn) = id_nn;
  bound.add_term(v.W, id_nn, id_nn, 1, 1);
  bound.add_term(v.X, id_nn, id_nn, 2, 2);
  p.blocks.push_back(std::move(bound));

  p.objective_var = v.W;
  if (vars_out) *vars_out = v;
  return p;
}

/// Weighted variant: the coupling block becomes [[W, Gamma],[Gamma, X]],
/// so trace(W) bounds trace(Gamma X^{-1} Gamma).
inline SdpProblem assemble_weighted(const CyclicSystem& cs, const Matrix& gamma,
                                    double epsilon = 1e-6,
                                    DesignVariables* vars_out = nullptr) {
  if (gamma.rows() != cs.nn() || gamma.cols() != cs.nn())
    throw DimensionMismatch("assemble_weighted: Gamma must be Nn x Nn");
  if (!is_positive_definite(gamma))
    throw NotPositiveDefinite("assemble_weighted: Gamma must be PD");
  DesignVariables v;
  SdpProblem p = assemble_kalman_lmi(cs, epsilon, &v);
  const int nn = cs.nn();
  for (LmiBlock& b : p.blocks)
    if (b.name == "cov_bound") {
      b.constant.block(0, nn, nn, nn) = gamma;
      b.constant.block(nn, 0, nn, nn) = gamma.transpose();
    }
  if (vars_out) *vars_out = v;
  return p;
}

/// Disk pole-placement constraint [[rbar^2 X, X A + Y C],[., X]] > 0.
inline void assemble_pole_constraint(SdpProblem& p, const CyclicSystem& cs,
                                     const DesignVariables& v, double rbar,
                                     double margin = 1e-6) {
  if (!(rbar > 0.0 && rbar < 1.0))
    throw std::invalid_argument("pole constraint: rbar must be in (0,1)");
  const int nn = cs.nn();
  const Matrix id_nn = Matrix::Identity(nn, nn);
  LmiBlock blk;
  blk.name = "pole";
  blk.block_dims = {nn, nn};
  blk.margin = margin;
  blk.add_term(v.X, rbar * rbar * id_nn, id_nn, 1, 1);
  blk.add_term(v.X, id_nn, cs.Acyc, 1, 2);
  blk.add_term(v.Y, id_nn, cs.Ccyc, 1, 2);
  blk.add_term(v.X, id_nn, id_nn, 2, 2);
  p.blocks.push_back(std::move(blk));
}

/// Bounded-real-lemma style l2-induced-norm constraint at level gamma, with
/// the alpha scaling degree of freedom applied to Cz and gamma.
inline void assemble_l2_constraint(SdpProblem& p, const CyclicSystem& cs,
                                   const DesignVariables& v, double gamma,
                                   const Matrix& cz, double alpha = 1.0,
                                   double margin = 1e-6) {
  if (!(gamma > 0.0)) throw std::invalid_argument("l2 constraint: gamma must be > 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("l2 constraint: alpha must be > 0");
  const int nn = cs.nn();
  const int nq = cs.nq();
  const Matrix id_nn = Matrix::Identity(nn, nn);
  const Matrix cz_cyc = detail::block_diag_repeat(cz, cs.N);
  const double g2a2 = gamma * gamma / (alpha * alpha);

  LmiBlock blk;
  blk.name = "l2";
  blk.block_dims = {nn, nn, nn, nq};
  blk.margin = margin;
  blk.constant = Matrix::Zero(3 * nn + nq, 3 * nn + nq);
  blk.constant.block(nn, nn, nn, nn) =
      -(alpha * alpha) * cz_cyc.transpose() * cz_cyc;
  blk.constant.block(2 * nn, 2 * nn, nn, nn) = g2a2 * id_nn;
  blk.constant.block(3 * nn, 3 * nn, nq, nq) = g2a2 * Matrix::Identity(nq, nq);
  blk.add_term(v.X, id_nn, id_nn, 1, 1);
  blk.add_term(v.X, id_nn, cs.Acyc, 1, 2);
  blk.add_term(v.Y, id_nn, cs.Ccyc, 1, 2);
  blk.add_term(v.X, id_nn, cs.Qhalf_cyc, 1, 3);
  blk.add_term(v.Y, id_nn, cs.Rhalf_cyc, 1, 4);
  blk.add_term(v.X, id_nn, id_nn, 2, 2);
  p.blocks.push_back(std::move(blk));
}

inline Matrix default_cz(int n) { return std::sqrt(0.1) * Matrix::Identity(n, n); }

/// Relative Frobenius norm of the blocks of Lcyc outside the cyclic index
/// pattern.
inline double offpattern_norm(const Matrix& lcyc, int N, int n, int q) {
  Matrix pattern = embed_periodic_gains(extract_periodic_gains(lcyc, N, n, q), n, q);
  const double total = lcyc.norm();
  if (total == 0.0) return 0.0;
  return (lcyc - pattern).norm() / total;
}

/// End-to-end design: build the cyclic system, assemble the requested
/// constraints, solve, recover L = -X^{-1} Y, extract periodic gains, and
/// populate the verification report.
inline FilterDesign design(const MultirateModel& m, const DesignSpec& spec = {},
                           const SolverOptions& opts = {}) {
  ValidationReport vr = validate_model(m);
  if (!vr.ok()) {
    const ValidationIssue& first = vr.issues.front();
    if (first.check == "NotPositiveDefinite") throw NotPositiveDefinite(first.detail);
    if (first.check == "InvalidMask") throw InvalidMask(first.detail);
    throw DimensionMismatch(first.check + ": " + first.detail);
  }
  CyclicSystem cs = build_cyclic(m);
  ObservabilityReport obs = observability_matrix(cs);
  if (obs.rank < cs.nn())
    throw Unobservable("design: cyclic pair not observable (rank " +
                       std::to_string(obs.rank) + " < " + std::to_string(cs.nn()) + ")");

  DesignVariables v;
  SdpProblem p = spec.Gamma.size() > 0
                     ? assemble_weighted(cs, spec.Gamma, spec.epsilon, &v)
                     : assemble_kalman_lmi(cs, spec.epsilon, &v);
  if (spec.pole_radius)
    assemble_pole_constraint(p, cs, v, *spec.pole_radius, spec.margin);
  if (spec.l2_bound) {
    const Matrix cz = spec.Cz.size() > 0 ? spec.Cz : default_cz(cs.n);
    assemble_l2_constraint(p, cs, v, *spec.l2_bound, cz, spec.alpha, spec.margin);
  }

  SdpSolution sol = solve_sdp(p, opts);
  if (sol.status == SdpStatus::Infeasible)
    throw Infeasible("design: constraint set is infeasible");
  if (sol.status != SdpStatus::Optimal)
    throw SolverFailure(std::string("design: solver returned ") + to_string(sol.status));

  FilterDesign fd;
  fd.status = sol.status;
  fd.iterations = sol.iterations;
  fd.objective = sol.objective;
  fd.X = 0.5 * (sol.values[v.X] + sol.values[v.X].transpose());
  fd.W = 0.5 * (sol.values[v.W] + sol.values[v.W].transpose());
  const Matrix& y = sol.values[v.Y];

  Eigen::LLT<Matrix> xllt(fd.X);
  if (xllt.info() != Eigen::Success) throw SolverFailure("design: X not PD at solution");
  fd.gains.Lcyc = -xllt.solve(y);
  fd.gains.periodic = extract_periodic_gains(fd.gains.Lcyc, cs.N, cs.n, cs.q);

  VerificationReport& rep = fd.verification;
  rep.spectral_radius = spectral_radius(cs.Acyc - fd.gains.Lcyc * cs.Ccyc);
  rep.stable = rep.spectral_radius < 1.0;
  rep.lmi_min_eig = evaluate_block_with_eig(p.blocks[0], sol.values).second;
  rep.gain_recovery_residual =
      (fd.X * fd.gains.Lcyc + y).norm() / std::max(1e-300, y.norm());
  rep.offpattern_rel_norm = offpattern_norm(fd.gains.Lcyc, cs.N, cs.n, cs.q);
  if (spec.pole_radius) rep.pole_margin = *spec.pole_radius - rep.spectral_radius;
  return fd;
}

namespace detail {

/// Feasibility of a strict LMI system, decided by maximizing the smallest
/// eigenvalue margin t subject to a trace-style box on X. Returns the
/// attained t (positive means strictly feasible).
struct FeasibilityProbe {
  bool feasible = false;
  double t = 0.0;
};

}  // namespace detail

/// Smallest gamma for which the l2 design LMI (X and Y free) is feasible,
/// located by bisection. This is the optimization the gamma_opt reference
/// value comes from.
inline double l2_optimal_gamma(const CyclicSystem& cs, const Matrix& cz,
                               double alpha = 1.0, double rel_tol = 1e-4,
                               double x_cap = 1e4, const SolverOptions& opts = {}) {
  auto feasible = [&](double gamma) {
    const int nn = cs.nn();
    SdpProblem p;
    DesignVariables v;
    v.X = p.add_variable("X", nn, nn, true);
    v.Y = p.add_variable("Y", nn, cs.nq(), false);
    const int t = p.add_variable("t", 1, 1, true);
    assemble_l2_constraint(p, cs, v, gamma, cz, alpha, 0.0);
    LmiBlock& l2 = p.blocks.back();
    for (int brow = 1; brow <= 4; ++brow) detail::add_scalar_identity(l2, t, -1.0, brow);

    LmiBlock floor;
    floor.name = "X_floor";
    floor.block_dims = {nn};
    floor.margin = 1e-8;
    floor.add_term(v.X, Matrix::Identity(nn, nn), Matrix::Identity(nn, nn), 1, 1);
    p.blocks.push_back(std::move(floor));

    LmiBlock cap;
    cap.name = "X_cap";
    cap.block_dims = {nn};
    cap.constant = x_cap * Matrix::Identity(nn, nn);
    cap.add_term(v.X, -Matrix::Identity(nn, nn), Matrix::Identity(nn, nn), 1, 1);
    p.blocks.push_back(std::move(cap));

    p.objective_var = t;
    p.objective_scale = -1.0;  // maximize t
    SdpSolution sol = solve_sdp(p, opts);
    const double tval = -sol.objective;
    return (sol.status == SdpStatus::Optimal || sol.status == SdpStatus::MaxIterations) &&
           tval > 1e-7;
  };

  double hi = 1.0;
  int guard = 0;
  while (!feasible(hi)) {
    hi *= 2.0;
    if (++guard > 40) throw NoConvergence("l2_optimal_gamma: no feasible gamma found");
  }
  double lo = hi / 2.0;
  if (hi == 1.0) lo = 0.0;
  while ((hi - lo) > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Achieved l2-induced norm of a fixed gain, by bisection of the analysis
/// LMI (Y substituted by -X L, linear in X alone).
inline double verify_l2_norm(const MultirateModel& m, const CyclicGain& gains,
                             const Matrix& cz, double alpha = 1.0,
                             double rel_tol = 1e-4, double x_cap = 1e4,
                             const SolverOptions& opts = {}) {
  CyclicSystem cs = build_cyclic(m);
  Matrix lcyc = gains.Lcyc.size() > 0
                    ? gains.Lcyc
                    : embed_periodic_gains(gains.periodic, cs.n, cs.q);
  const Matrix acl = cs.Acyc - lcyc * cs.Ccyc;
  if (spectral_radius(acl) >= 1.0)
    throw Unstable("verify_l2_norm: closed loop not Schur stable");
  const int nn = cs.nn();
  const int nq = cs.nq();
  const Matrix cz_cyc = detail::block_diag_repeat(cz, cs.N);
  const Matrix neg_lr = -(lcyc * cs.Rhalf_cyc);

  auto feasible = [&](double gamma) {
    SdpProblem p;
    const int X = p.add_variable("X", nn, nn, true);
    const int t = p.add_variable("t", 1, 1, true);
    const Matrix id_nn = Matrix::Identity(nn, nn);
    const double g2a2 = gamma * gamma / (alpha * alpha);

    LmiBlock blk;
    blk.name = "l2_analysis";
    blk.block_dims = {nn, nn, nn, nq};
    blk.constant = Matrix::Zero(3 * nn + nq, 3 * nn + nq);
    blk.constant.block(nn, nn, nn, nn) = -(alpha * alpha) * cz_cyc.transpose() * cz_cyc;
    blk.constant.block(2 * nn, 2 * nn, nn, nn) = g2a2 * id_nn;
    blk.constant.block(3 * nn, 3 * nn, nq, nq) = g2a2 * Matrix::Identity(nq, nq);
    blk.add_term(X, id_nn, id_nn, 1, 1);
    blk.add_term(X, id_nn, acl, 1, 2);
    blk.add_term(X, id_nn, cs.Qhalf_cyc, 1, 3);
    blk.add_term(X, id_nn, neg_lr, 1, 4);
    blk.add_term(X, id_nn, id_nn, 2, 2);
    for (int brow = 1; brow <= 4; ++brow) detail::add_scalar_identity(blk, t, -1.0, brow);
    p.blocks.push_back(std::move(blk));

    LmiBlock floor;
    floor.block_dims = {nn};
    floor.margin = 1e-8;
    floor.add_term(X, id_nn, id_nn, 1, 1);
    p.blocks.push_back(std::move(floor));

    LmiBlock cap;
    cap.block_dims = {nn};
    cap.constant = x_cap * id_nn;
    cap.add_term(X, -id_nn, id_nn, 1, 1);
    p.blocks.push_back(std::move(cap));

    p.objective_var = t;
    p.objective_scale = -1.0;
    SdpSolution sol = solve_sdp(p, opts);
    const double tval = -sol.objective;
    return (sol.status == SdpStatus::Optimal || sol.status == SdpStatus::MaxIterations) &&
           tval > 1e-7;
  };

  double hi = 1.0;
  int guard = 0;
  while (!feasible(hi)) {
    hi *= 2.0;
    if (++guard > 40) throw Unstable("verify_l2_norm: no finite norm certificate found");
  }
  double lo = hi / 2.0;
  if (hi == 1.0) lo = 0.0;
  while ((hi - lo) > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace mrkf
