#pragma once

// Primal-dual path-following interior-point solver for the canonicalized
// LMI form
//   minimize c^T x   subject to   S_b(x) = F0_b + sum_i x_i F_ib >= 0.
// Nesterov-Todd scaling on dense PSD blocks, Mehrotra-style adaptive
// centering, Schur complement solved by dense Cholesky.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mrkf/lmi.hpp"

namespace mrkf {

enum class SdpStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::MaxIterations: return "MaxIterations";
    case SdpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

struct SolverOptions {
  double tol = 1e-8;
  int max_iters = 200;
  bool verbose = false;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  Vector x;                    // scalarized solution
  std::vector<Matrix> values;  // per matrix variable
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

namespace detail {

struct BlockState {
  int dim;
  Matrix S, Z;          // primal slack and dual matrix, kept PD
  Matrix Ls, Lz;        // Cholesky factors
  Matrix G;             // inverse NT scaling, G S G = Z
  Matrix K, Kinv;       // G = K K^T; scaled point Lambda = K^T S K = diag(sigma)
  Vector sigma;         // NT scaled spectrum
  Matrix Sinv;
  Matrix R;             // primal residual F0 + A(x) - S
  Matrix dS, dZ;
  Matrix corr;          // Mehrotra second-order term, already G-congruent
};

inline double inner(const std::vector<SparseEntry>& f, const Matrix& m) {
  double s = 0.0;
  for (const SparseEntry& e : f) s += e.val * m(e.row, e.col);
  return s;
}

/// Largest step alpha in (0, 1] with S + alpha * dS >= 0, given S = L L^T.
inline double max_step(const Matrix& L, const Matrix& dM) {
  Matrix scaled = L.triangularView<Eigen::Lower>().solve(dM);
  scaled = L.triangularView<Eigen::Lower>().solve(Matrix(scaled.transpose()));
  const double lmin = min_eigenvalue(scaled);
  if (lmin >= 0.0) return 1.0;
  return std::min(1.0, -1.0 / lmin);
}

}  // namespace detail

inline SdpSolution solve_canonical(const CanonicalForm& cf, const SolverOptions& opts) {
  using detail::BlockState;
  SdpSolution sol;
  const int m_total = cf.m;

  // Scalars that never appear in any constraint are pinned to zero; a
  // nonzero objective coefficient on such a scalar makes the problem
  // unbounded and is reported as a failure.
  std::vector<char> used(m_total, 0);
  for (const CanonicalBlock& b : cf.blocks)
    for (int sid : b.active) used[sid] = 1;
  std::vector<int> compress(m_total, -1), expand;
  for (int i = 0; i < m_total; ++i) {
    if (used[i]) {
      compress[i] = static_cast<int>(expand.size());
      expand.push_back(i);
    } else if (cf.c(i) != 0.0) {
      sol.status = SdpStatus::NumericalFailure;
      return sol;
    }
  }
  const int m = static_cast<int>(expand.size());

  Vector c(m);
  for (int i = 0; i < m; ++i) c(i) = cf.c(expand[i]);
  const double cnorm = c.norm();

  const int nblocks = static_cast<int>(cf.blocks.size());
  std::vector<BlockState> bs(nblocks);
  std::vector<std::vector<int>> local_active(nblocks);  // compressed ids per block
  double data_scale = 1.0;
  int total_dim = 0;
  for (int b = 0; b < nblocks; ++b) {
    const CanonicalBlock& cb = cf.blocks[b];
    bs[b].dim = cb.dim;
    total_dim += cb.dim;
    data_scale = std::max(data_scale, cb.F0.cwiseAbs().maxCoeff());
    for (int sid : cb.active) local_active[b].push_back(compress[sid]);
  }

  sol.x = Vector::Zero(m_total);
  if (m == 0 || total_dim == 0) {
    // Nothing to optimize: feasibility of the constants decides.
    bool ok = true;
    for (const CanonicalBlock& cb : cf.blocks)
      if (cb.dim > 0 && min_eigenvalue(cb.F0) < -1e-10 * std::max(1.0, data_scale))
        ok = false;
    sol.status = ok ? SdpStatus::Optimal : SdpStatus::Infeasible;
    sol.objective = 0.0;
    sol.values = cf.devectorize(sol.x);
    return sol;
  }

  Vector x = Vector::Zero(m);
  const double init_scale = std::max(1.0, data_scale);
  for (int b = 0; b < nblocks; ++b) {
    bs[b].S = init_scale * Matrix::Identity(bs[b].dim, bs[b].dim);
    bs[b].Z = std::max(1.0, cnorm / std::sqrt(static_cast<double>(total_dim))) *
              Matrix::Identity(bs[b].dim, bs[b].dim);
  }

  auto apply_map = [&](const Vector& xv, int b) {
    const CanonicalBlock& cb = cf.blocks[b];
    Matrix out = cb.F0;
    for (size_t a = 0; a < cb.active.size(); ++a) {
      const double xi = xv(compress[cb.active[a]]);
      if (xi == 0.0) continue;
      for (const SparseEntry& e : cb.F[cb.active[a]]) out(e.row, e.col) += xi * e.val;
    }
    return out;
  };

  Matrix M(m, m);
  Vector rd(m), rhs(m);
  int stall_count = 0, flat_count = 0;
  double last_pinf = std::numeric_limits<double>::infinity();
  double best_gap = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    sol.iterations = iter;

    // Residuals.
    double pinf = 0.0, gap = 0.0;
    double pobj = c.dot(x), dobj = 0.0;
    rd = c;
    for (int b = 0; b < nblocks; ++b) {
      const CanonicalBlock& cb = cf.blocks[b];
      bs[b].R = apply_map(x, b) - bs[b].S;
      pinf = std::max(pinf, bs[b].R.cwiseAbs().maxCoeff() /
                                (1.0 + cb.F0.cwiseAbs().maxCoeff()));
      gap += bs[b].S.cwiseProduct(bs[b].Z).sum();
      dobj -= cb.F0.cwiseProduct(bs[b].Z).sum();
      for (size_t a = 0; a < cb.active.size(); ++a)
        rd(compress[cb.active[a]]) -= detail::inner(cb.F[cb.active[a]], bs[b].Z);
    }
    const double dinf = rd.norm() / (1.0 + cnorm);
    const double relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double mu = gap / total_dim;

    if (opts.verbose)
      std::printf("it %3d  pobj % .8e dobj % .8e gap %.2e pinf %.2e dinf %.2e\n", iter,
                  pobj, dobj, relgap, pinf, dinf);

    // Near the floor of attainable accuracy the step sizes collapse and the
    // gap flatlines; an iterate within a modest multiple of the target is
    // still accepted rather than reported as a breakdown.
    const bool converged =
        relgap <= opts.tol && pinf <= opts.tol * 10 && dinf <= opts.tol * 10;
    const bool near_converged =
        relgap <= opts.tol * 100 && pinf <= opts.tol * 1e3 && dinf <= opts.tol * 1e3;
    flat_count = relgap > 0.9 * best_gap ? flat_count + 1 : 0;
    if (converged || (near_converged && flat_count >= 5)) {
      sol.status = SdpStatus::Optimal;
      sol.objective = pobj;
      sol.primal_residual = pinf;
      sol.dual_residual = dinf;
      sol.gap = relgap;
      for (int i = 0; i < m; ++i) sol.x(expand[i]) = x(i);
      sol.values = cf.devectorize(sol.x);
      return sol;
    }

    // Infeasibility certificate: a dual direction with A^T(Z) ~ 0 and
    // <F0, Z> < 0 proves the LMI has no PSD point.
    {
      double znorm = 0.0, f0z = 0.0, atz = 0.0;
      for (int b = 0; b < nblocks; ++b) {
        znorm += bs[b].Z.squaredNorm();
        f0z += cf.blocks[b].F0.cwiseProduct(bs[b].Z).sum();
      }
      znorm = std::sqrt(znorm);
      Vector at = Vector::Zero(m);
      for (int b = 0; b < nblocks; ++b) {
        const CanonicalBlock& cb = cf.blocks[b];
        for (size_t a = 0; a < cb.active.size(); ++a)
          at(compress[cb.active[a]]) += detail::inner(cb.F[cb.active[a]], bs[b].Z);
      }
      atz = at.norm();
      if (znorm > 1e6 * init_scale && atz / znorm < 1e-9 && f0z / znorm < -1e-9) {
        sol.status = SdpStatus::Infeasible;
        sol.gap = relgap;
        return sol;
      }
    }
    // Stall-based detection: primal infeasibility refuses to shrink while
    // iterations keep being spent.
    if (iter >= 20 && pinf > 1e-6 && pinf > 0.9 * last_pinf) {
      if (++stall_count >= 30) {
        sol.status = SdpStatus::Infeasible;
        sol.gap = relgap;
        return sol;
      }
    } else {
      stall_count = 0;
    }
    last_pinf = pinf;
    best_gap = std::min(best_gap, relgap);

    // NT scaling per block.
    bool factor_ok = true;
    for (int b = 0; b < nblocks; ++b) {
      BlockState& st = bs[b];
      Eigen::LLT<Matrix> llt_s(st.S), llt_z(st.Z);
      if (llt_s.info() != Eigen::Success || llt_z.info() != Eigen::Success) {
        factor_ok = false;
        break;
      }
      st.Ls = llt_s.matrixL();
      st.Lz = llt_z.matrixL();
      Matrix J = st.Ls.transpose() * st.Lz;
      Eigen::JacobiSVD<Matrix> svd(J, Eigen::ComputeFullU);
      // G = K K^T with K = Ls^{-T} U Sigma^{1/2}; then G S G = Z and the
      // scaled point K^T S K = Kinv Z Kinv^T = diag(sigma).
      st.sigma = svd.singularValues();
      st.K = st.Ls.transpose().triangularView<Eigen::Upper>().solve(svd.matrixU());
      st.Kinv = st.sigma.cwiseSqrt().cwiseInverse().asDiagonal() *
                Matrix(svd.matrixU().transpose() * st.Ls.transpose());
      st.K *= st.sigma.cwiseSqrt().asDiagonal();
      st.G = st.K * st.K.transpose();
      st.Sinv = llt_s.solve(Matrix::Identity(st.dim, st.dim));
    }
    if (!factor_ok) {
      sol.status = near_converged ? SdpStatus::Optimal : SdpStatus::NumericalFailure;
      sol.objective = pobj;
      sol.primal_residual = pinf;
      sol.dual_residual = dinf;
      sol.gap = relgap;
      for (int i = 0; i < m; ++i) sol.x(expand[i]) = x(i);
      sol.values = cf.devectorize(sol.x);
      return sol;
    }

    // Schur complement M_ij = sum_b <F_i, G F_j G>.
    M.setZero();
    for (int b = 0; b < nblocks; ++b) {
      const CanonicalBlock& cb = cf.blocks[b];
      const BlockState& st = bs[b];
      const auto& act = cb.active;
      Matrix T(st.dim, st.dim);
      for (size_t a = 0; a < act.size(); ++a) {
        T.setZero();
        for (const SparseEntry& e : cb.F[act[a]])
          T.noalias() += e.val * (st.G.col(e.row) * st.G.row(e.col));
        const int ia = local_active[b][a];
        for (size_t a2 = a; a2 < act.size(); ++a2) {
          double v = 0.0;
          for (const SparseEntry& e : cb.F[act[a2]]) v += e.val * T(e.col, e.row);
          const int ja = local_active[b][a2];
          M(ia, ja) += v;
          if (ja != ia) M(ja, ia) += v;
        }
      }
    }
    // Jacobi-scaled Cholesky of the Schur complement, with a refinement
    // pass in the solve to hold accuracy once mu is tiny.
    Vector dscale = M.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Matrix Ms = dscale.asDiagonal() * M * dscale.asDiagonal();
    Eigen::LLT<Matrix> mllt(Ms);
    for (double jitter = 1e-14; mllt.info() != Eigen::Success && jitter < 1e-4;
         jitter *= 100) {
      Ms.diagonal().array() += jitter;
      mllt.compute(Ms);
    }
    if (mllt.info() != Eigen::Success) {
      sol.status = near_converged ? SdpStatus::Optimal : SdpStatus::NumericalFailure;
      sol.objective = pobj;
      sol.primal_residual = pinf;
      sol.dual_residual = dinf;
      sol.gap = relgap;
      for (int i = 0; i < m; ++i) sol.x(expand[i]) = x(i);
      sol.values = cf.devectorize(sol.x);
      return sol;
    }
    auto schur_solve = [&](const Vector& b) {
      Vector y = dscale.asDiagonal() * mllt.solve(Vector(dscale.asDiagonal() * b));
      Vector res = b - M * y;
      y += dscale.asDiagonal() * mllt.solve(Vector(dscale.asDiagonal() * res));
      return y;
    };

    // Direction for a given centering parameter; when with_corrector is set
    // the blocks' `corr` matrices (second-order terms) are subtracted.
    auto compute_direction = [&](double sigma_mu, bool with_corrector) {
      rhs = -c;
      for (int b = 0; b < nblocks; ++b) {
        const CanonicalBlock& cb = cf.blocks[b];
        BlockState& st = bs[b];
        Matrix w = sigma_mu * st.Sinv - st.G * st.R * st.G;
        if (with_corrector) w -= st.corr;
        for (size_t a = 0; a < cb.active.size(); ++a)
          rhs(compress[cb.active[a]]) += detail::inner(cb.F[cb.active[a]], w);
      }
      Vector dx = schur_solve(rhs);
      for (int b = 0; b < nblocks; ++b) {
        BlockState& st = bs[b];
        Matrix ds = st.R;
        const CanonicalBlock& cb = cf.blocks[b];
        for (size_t a = 0; a < cb.active.size(); ++a) {
          const double v = dx(compress[cb.active[a]]);
          if (v == 0.0) continue;
          for (const SparseEntry& e : cb.F[cb.active[a]]) ds(e.row, e.col) += v * e.val;
        }
        st.dS = ds;
        st.dZ = sigma_mu * st.Sinv - st.Z - st.G * ds * st.G;
        if (with_corrector) st.dZ -= st.corr;
      }
      return dx;
    };

    // Predictor (affine) to pick the centering parameter.
    Vector dx = compute_direction(0.0, false);
    double ap = 1.0, ad = 1.0;
    for (int b = 0; b < nblocks; ++b) {
      ap = std::min(ap, detail::max_step(bs[b].Ls, bs[b].dS));
      ad = std::min(ad, detail::max_step(bs[b].Lz, bs[b].dZ));
    }
    double gap_aff = 0.0;
    for (int b = 0; b < nblocks; ++b)
      gap_aff += (bs[b].S + ap * bs[b].dS).cwiseProduct(bs[b].Z + ad * bs[b].dZ).sum();
    gap_aff = std::max(gap_aff, 0.0);
    double sigma = std::pow(gap_aff / gap, 3.0);
    sigma = std::clamp(sigma, 1e-6, 0.99);

    // Mehrotra second-order term, formed in the NT-scaled space where the
    // current point is diag(sigma): solve (1/2)(Lam M + M Lam) = H(dS^ dZ^)
    // entrywise, then map back through K.
    for (int b = 0; b < nblocks; ++b) {
      BlockState& st = bs[b];
      Matrix ds_hat = st.K.transpose() * st.dS * st.K;
      Matrix dz_hat = st.Kinv * st.dZ * st.Kinv.transpose();
      Matrix h = ds_hat * dz_hat;
      h = 0.5 * (h + h.transpose()).eval();
      for (int r = 0; r < st.dim; ++r)
        for (int col = 0; col < st.dim; ++col)
          h(r, col) *= 2.0 / (st.sigma(r) + st.sigma(col));
      st.corr = st.K * h * st.K.transpose();
    }

    // Corrector with the chosen centering.
    dx = compute_direction(sigma * mu, true);
    ap = 1.0;
    ad = 1.0;
    for (int b = 0; b < nblocks; ++b) {
      ap = std::min(ap, detail::max_step(bs[b].Ls, bs[b].dS));
      ad = std::min(ad, detail::max_step(bs[b].Lz, bs[b].dZ));
    }
    double tau = 0.98;
    if (relgap < 1e-4) tau = 0.99;
    if (relgap < 1e-6) tau = 0.995;
    ap = std::min(1.0, tau * ap);
    ad = std::min(1.0, tau * ad);

    // Backtrack if rounding pushed the candidate outside the cone: max_step
    // is exact only in exact arithmetic.
    auto cone_ok = [&](double a_p, double a_d) {
      for (int b = 0; b < nblocks; ++b) {
        if (Eigen::LLT<Matrix>(Matrix(bs[b].S + a_p * bs[b].dS)).info() != Eigen::Success)
          return false;
        if (Eigen::LLT<Matrix>(Matrix(bs[b].Z + a_d * bs[b].dZ)).info() != Eigen::Success)
          return false;
      }
      return true;
    };
    for (int bt = 0; bt < 30 && !cone_ok(ap, ad); ++bt) {
      ap *= 0.8;
      ad *= 0.8;
    }

    if (opts.verbose) std::printf("      sigma %.2e ap %.3f ad %.3f\n", sigma, ap, ad);
    x += ap * dx;
    for (int b = 0; b < nblocks; ++b) {
      bs[b].S += ap * bs[b].dS;
      bs[b].Z += ad * bs[b].dZ;
    }
  }

  sol.status = SdpStatus::MaxIterations;
  for (int i = 0; i < m; ++i) sol.x(expand[i]) = x(i);
  sol.values = cf.devectorize(sol.x);
  sol.objective = c.dot(x);
  return sol;
}

inline SdpSolution solve_sdp(const SdpProblem& p, const SolverOptions& opts = {}) {
  CanonicalForm cf = canonicalize(p);
  return solve_canonical(cf, opts);
}

}  // namespace mrkf
