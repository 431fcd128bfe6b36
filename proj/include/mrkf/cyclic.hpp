#pragma once

// Time-invariant cyclic reformulation of the periodic multirate system and
// structural analysis on it (ranks, observability, monodromy).

#include <cmath>
#include <vector>

#include "mrkf/model.hpp"

namespace mrkf {

/// Block-structured dilation of an N-periodic multirate model. Acyc, Bcyc and
/// Qhalf_cyc carry the cyclic-shift block pattern (block (i+1, i) and the
/// wrap-around block (1, N)); Ccyc and Rhalf_cyc are block diagonal with the
/// selection masks applied.
struct CyclicSystem {
  Matrix Acyc;       // Nn x Nn
  Matrix Bcyc;       // Nn x Np
  Matrix Ccyc;       // Nq x Nn
  Matrix Qhalf_cyc;  // Nn x Nn
  Matrix Rhalf_cyc;  // Nq x Nq
  int N = 0, n = 0, p = 0, q = 0;

  int nn() const { return N * n; }
  int nq() const { return N * q; }

  Matrix Qcyc() const { return Qhalf_cyc * Qhalf_cyc.transpose(); }
  Matrix Rcyc() const { return Rhalf_cyc * Rhalf_cyc.transpose(); }
};

/// Recovered cyclic gain together with its periodic extraction.
struct CyclicGain {
  Matrix Lcyc;                   // Nn x Nq (may be empty when built from L_k only)
  std::vector<Matrix> periodic;  // N gains, each n x q

  int N() const { return static_cast<int>(periodic.size()); }
};

namespace detail {

/// Places `block` at 1-based block position (brow, bcol) of `dst`.
inline void set_block(Matrix& dst, int brow, int bcol, int rows, int cols,
                      const Matrix& block) {
  dst.block((brow - 1) * rows, (bcol - 1) * cols, rows, cols) = block;
}

inline Matrix get_block(const Matrix& src, int brow, int bcol, int rows, int cols) {
  return src.block((brow - 1) * rows, (bcol - 1) * cols, rows, cols);
}

/// Cyclic-shift block pattern shared by Acyc, Bcyc and Qhalf_cyc: block
/// (i+1, i) for i = 1..N-1 and block (1, N).
inline Matrix cyclic_embed(const Matrix& block, int N) {
  const int r = static_cast<int>(block.rows());
  const int c = static_cast<int>(block.cols());
  Matrix out = Matrix::Zero(N * r, N * c);
  if (N == 1) {
    out = block;
    return out;
  }
  for (int i = 1; i <= N - 1; ++i) set_block(out, i + 1, i, r, c, block);
  set_block(out, 1, N, r, c, block);
  return out;
}

}  // namespace detail

inline CyclicSystem build_cyclic(const MultirateModel& m) {
  CyclicSystem cs;
  cs.N = m.N();
  cs.n = m.n();
  cs.p = m.p();
  cs.q = m.q();
  cs.Acyc = detail::cyclic_embed(m.sys.A, cs.N);
  cs.Bcyc = detail::cyclic_embed(m.sys.B, cs.N);
  cs.Qhalf_cyc = detail::cyclic_embed(m.noise.Qhalf, cs.N);
  cs.Ccyc = Matrix::Zero(cs.nq(), cs.nn());
  cs.Rhalf_cyc = Matrix::Zero(cs.nq(), cs.nq());
  for (int k = 0; k < cs.N; ++k) {
    const Matrix sk = m.schedule.selection_matrix(k);
    cs.Ccyc.block(k * cs.q, k * cs.n, cs.q, cs.n) = sk * m.sys.C;
    cs.Rhalf_cyc.block(k * cs.q, k * cs.q, cs.q, cs.q) = sk * m.noise.Rhalf;
  }
  return cs;
}

/// Expands N periodic gains into the cyclic gain pattern: L_0 at block (2,1),
/// L_k at block (k+2, k+1), L_{N-1} at block (1, N).
inline Matrix embed_periodic_gains(const std::vector<Matrix>& periodic, int n, int q) {
  const int N = static_cast<int>(periodic.size());
  Matrix l = Matrix::Zero(N * n, N * q);
  if (N == 1) {
    l = periodic[0];
    return l;
  }
  detail::set_block(l, 2, 1, n, q, periodic[0]);
  for (int k = 1; k <= N - 2; ++k) detail::set_block(l, k + 2, k + 1, n, q, periodic[k]);
  detail::set_block(l, 1, N, n, q, periodic[N - 1]);
  return l;
}

/// Inverse of embed_periodic_gains on the significant blocks of Lcyc.
inline std::vector<Matrix> extract_periodic_gains(const Matrix& lcyc, int N, int n, int q) {
  std::vector<Matrix> gains(N);
  if (N == 1) {
    gains[0] = lcyc;
    return gains;
  }
  gains[0] = detail::get_block(lcyc, 2, 1, n, q);
  for (int k = 1; k <= N - 2; ++k) gains[k] = detail::get_block(lcyc, k + 2, k + 1, n, q);
  gains[N - 1] = detail::get_block(lcyc, 1, N, n, q);
  return gains;
}

struct RankReport {
  int rank_R = 0;
  std::vector<int> block_ranks;  // rank of S_k R S_k^T per step
  bool is_definite = false;      // rank(Rcyc) == Nq
};

inline RankReport cyclic_rank_report(const CyclicSystem& cs) {
  RankReport rep;
  const Matrix rcyc = cs.Rcyc();
  rep.rank_R = numerical_rank(rcyc).rank;
  rep.is_definite = (rep.rank_R == cs.nq());
  rep.block_ranks.resize(cs.N);
  for (int k = 0; k < cs.N; ++k) {
    Matrix blk = rcyc.block(k * cs.q, k * cs.q, cs.q, cs.q);
    rep.block_ranks[k] = numerical_rank(blk).rank;
  }
  return rep;
}

struct ObservabilityReport {
  Matrix O;  // (Nn*Nq) x Nn stack of Ccyc * Acyc^i
  int rank = 0;
  double cond = 0.0;
};

/// Stacks Ccyc * Acyc^i for i = 0..Nn-1 and reports numerical rank and the
/// condition number over the rank-revealing singular values.
inline ObservabilityReport observability_matrix(const CyclicSystem& cs) {
  ObservabilityReport rep;
  const int nn = cs.nn();
  const int nq = cs.nq();
  rep.O = Matrix::Zero(nn * nq, nn);
  Matrix power = Matrix::Identity(nn, nn);
  for (int i = 0; i < nn; ++i) {
    rep.O.block(i * nq, 0, nq, nn) = cs.Ccyc * power;
    power = cs.Acyc * power;
  }
  RankInfo info = numerical_rank(rep.O);
  rep.rank = info.rank;
  rep.cond = info.cond;
  return rep;
}

/// Monodromy matrix of the periodic error dynamics,
/// Phi_N = (A - L_{N-1} S_{N-1} C) * ... * (A - L_0 S_0 C).
inline Matrix monodromy(const MultirateModel& m, const CyclicGain& gains) {
  const int N = m.N();
  if (gains.N() != N) throw DimensionMismatch("monodromy: gain count != period");
  Matrix phi = Matrix::Identity(m.n(), m.n());
  for (int k = 0; k < N; ++k) {
    const int idx = N - 1 - k;
    const Matrix factor =
        m.sys.A - gains.periodic[idx] * m.schedule.selection_matrix(idx) * m.sys.C;
    phi = (k == 0) ? factor : Matrix(phi * factor);
  }
  return phi;
}

/// | rho(Acyc - Lcyc*Ccyc) - rho(Phi_N)^{1/N} |, the spectral mapping
/// identity between the cyclic closed loop and the monodromy matrix.
inline double spectral_radius_identity_check(const MultirateModel& m,
                                             const CyclicSystem& cs,
                                             const CyclicGain& gains) {
  const Matrix closed = cs.Acyc - gains.Lcyc * cs.Ccyc;
  const double rho_cyc = spectral_radius(closed);
  const double rho_mono = spectral_radius(monodromy(m, gains));
  return std::abs(rho_cyc - std::pow(rho_mono, 1.0 / cs.N));
}

}  // namespace mrkf
