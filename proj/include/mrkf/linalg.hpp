#pragma once

// Small dense linear-algebra helpers shared across the library.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mrkf/errors.hpp"

namespace mrkf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Lower-triangular Cholesky factor L with L*L^T = M. Throws
/// NotPositiveDefinite when a pivot is not strictly positive.
inline Matrix cholesky_factor(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("cholesky_factor: matrix not square");
  if (!m.isApprox(m.transpose(), 1e-10))
    throw NotPositiveDefinite("cholesky_factor: matrix not symmetric");
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("cholesky_factor: matrix not positive definite");
  Matrix l = llt.matrixL();
  if ((l.diagonal().array() <= 0.0).any())
    throw NotPositiveDefinite("cholesky_factor: nonpositive pivot");
  return l;
}

/// Eigenvalues of a symmetric matrix (ascending). Input is symmetrized.
inline Vector sym_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return sym_eigenvalues(m)(0);
}

inline double max_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Vector ev = sym_eigenvalues(m);
  return ev(ev.size() - 1);
}

/// Strict positive-definiteness test with a relative eigenvalue threshold:
/// min eig > tol * max(1, max eig).
inline bool is_positive_definite(const Matrix& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  if (!m.isApprox(m.transpose(), 1e-10)) return false;
  Vector ev = sym_eigenvalues(m);
  return ev(0) > tol * std::max(1.0, ev(ev.size() - 1));
}

/// Spectral radius max_i |lambda_i| of a general square matrix.
inline double spectral_radius(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct RankInfo {
  int rank = 0;
  double cond = 0.0;  // sigma_max / sigma_rank over the rank-revealing subset
  double sigma_max = 0.0;
};

/// Numerical rank via SVD: singular values above tol * sigma_max count.
inline RankInfo numerical_rank(const Matrix& m, double tol = 1e-10) {
  RankInfo info;
  if (m.rows() == 0 || m.cols() == 0) return info;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  info.sigma_max = sv(0);
  if (info.sigma_max == 0.0) return info;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * info.sigma_max) info.rank = i + 1;
  if (info.rank > 0) info.cond = info.sigma_max / sv(info.rank - 1);
  return info;
}

}  // namespace mrkf
