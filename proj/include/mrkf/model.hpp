#pragma once

// Multirate estimation problem: plant, noise model, and the periodic
// sensor-availability schedule.

#include <string>
#include <utility>
#include <vector>

#include "mrkf/linalg.hpp"

namespace mrkf {

/// Discrete-time LTI plant x(k+1) = A x + B u with full measurement map C.
struct LtiSystem {
  Matrix A;  // n x n
  Matrix B;  // n x p
  Matrix C;  // q x n

  int n() const { return static_cast<int>(A.rows()); }
  int p() const { return static_cast<int>(B.cols()); }
  int q() const { return static_cast<int>(C.rows()); }
};

/// Process/measurement covariances with their lower-triangular Cholesky
/// factors (the square-root convention used throughout).
struct NoiseModel {
  Matrix Q;      // n x n, PD
  Matrix R;      // q x q, PD
  Matrix Qhalf;  // lower triangular, Qhalf*Qhalf^T = Q
  Matrix Rhalf;  // lower triangular, Rhalf*Rhalf^T = R

  static NoiseModel from_covariances(Matrix q_cov, Matrix r_cov) {
    NoiseModel nm;
    nm.Qhalf = cholesky_factor(q_cov);
    nm.Rhalf = cholesky_factor(r_cov);
    nm.Q = std::move(q_cov);
    nm.R = std::move(r_cov);
    return nm;
  }
};

/// Periodic diagonal 0/1 selection masks S_k, indexed modulo the period.
struct SelectionSchedule {
  int period = 0;                    // N
  std::vector<Vector> masks;         // N vectors of length q, entries in {0,1}

  const Vector& mask(int k) const { return masks[((k % period) + period) % period]; }

  Matrix selection_matrix(int k) const {
    return Matrix(mask(k).asDiagonal());
  }

  std::vector<int> active_rows(int k) const {
    const Vector& m = mask(k);
    std::vector<int> rows;
    for (int i = 0; i < m.size(); ++i)
      if (m(i) != 0.0) rows.push_back(i);
    return rows;
  }
};

/// Mask i at step k is active iff k mod divisor_i == 0.
inline SelectionSchedule schedule_from_rates(int base_period,
                                             const std::vector<int>& sensor_divisors) {
  SelectionSchedule s;
  s.period = base_period;
  s.masks.resize(base_period);
  const int q = static_cast<int>(sensor_divisors.size());
  for (int k = 0; k < base_period; ++k) {
    s.masks[k] = Vector::Zero(q);
    for (int i = 0; i < q; ++i)
      if (k % sensor_divisors[i] == 0) s.masks[k](i) = 1.0;
  }
  return s;
}

struct MultirateModel {
  LtiSystem sys;
  NoiseModel noise;
  SelectionSchedule schedule;

  int n() const { return sys.n(); }
  int p() const { return sys.p(); }
  int q() const { return sys.q(); }
  int N() const { return schedule.period; }
};

struct ValidationIssue {
  std::string check;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

/// Checks dimensional consistency, strict positive definiteness of Q and R,
/// factor consistency, and that every schedule mask is binary.
inline ValidationReport validate_model(const MultirateModel& m) {
  ValidationReport rep;
  auto fail = [&rep](std::string check, std::string detail) {
    rep.issues.push_back({std::move(check), std::move(detail)});
  };

  const int n = m.sys.n();
  const int q = m.sys.q();
  if (m.sys.A.rows() != m.sys.A.cols()) fail("DimensionMismatch", "A not square");
  if (m.sys.B.rows() != n) fail("DimensionMismatch", "B row count != n");
  if (m.sys.C.cols() != n) fail("DimensionMismatch", "C column count != n");
  if (m.noise.Q.rows() != n || m.noise.Q.cols() != n)
    fail("DimensionMismatch", "Q must be n x n");
  if (m.noise.R.rows() != q || m.noise.R.cols() != q)
    fail("DimensionMismatch", "R must be q x q");
  if (!all_finite(m.sys.A) || !all_finite(m.sys.B) || !all_finite(m.sys.C))
    fail("NotFinite", "plant matrices contain non-finite entries");

  if (!is_positive_definite(m.noise.Q)) fail("NotPositiveDefinite", "Q is not PD");
  if (!is_positive_definite(m.noise.R)) fail("NotPositiveDefinite", "R is not PD");
  if (m.noise.Qhalf.rows() == n && m.noise.Q.rows() == n) {
    const double rel = (m.noise.Qhalf * m.noise.Qhalf.transpose() - m.noise.Q).norm() /
                       std::max(1e-300, m.noise.Q.norm());
    if (rel > 1e-12) fail("FactorMismatch", "Qhalf*Qhalf^T != Q");
  }
  if (m.noise.Rhalf.rows() == q && m.noise.R.rows() == q) {
    const double rel = (m.noise.Rhalf * m.noise.Rhalf.transpose() - m.noise.R).norm() /
                       std::max(1e-300, m.noise.R.norm());
    if (rel > 1e-12) fail("FactorMismatch", "Rhalf*Rhalf^T != R");
  }

  if (m.schedule.period < 1) fail("InvalidMask", "period must be positive");
  bool any_active = false;
  for (const Vector& mask : m.schedule.masks) {
    if (mask.size() != q) fail("DimensionMismatch", "mask length != q");
    for (int i = 0; i < mask.size(); ++i) {
      if (mask(i) != 0.0 && mask(i) != 1.0) {
        fail("InvalidMask", "mask entry not in {0,1}");
        break;
      }
    }
    if ((mask.array() != 0.0).any()) any_active = true;
  }
  if (static_cast<int>(m.schedule.masks.size()) != m.schedule.period)
    fail("DimensionMismatch", "mask count != period");
  if (!any_active) fail("InvalidMask", "no mask activates any sensor");

  return rep;
}

}  // namespace mrkf
