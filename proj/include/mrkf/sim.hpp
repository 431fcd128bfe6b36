// Seeded Monte-Carlo simulation of the multirate plant with a periodic
// predictor-form estimator, plus the error statistics used for validation.
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mrkf/cyclic.hpp"
#include "mrkf/errors.hpp"
#include "mrkf/model.hpp"
#include "mrkf/rng.hpp"

namespace mrkf {

/// Deterministic input signal u(k).
struct InputSignal {
  enum class Kind { Zero, Constant, Sinusoid, External };

  Kind kind = Kind::Zero;
  double constant = 0.0;
  double amplitude = 0.0;  // Sinusoid: amplitude * sin(frequency * k)
  double frequency = 0.0;
  std::vector<Vector> sequence;  // External: one p-vector per step

  static InputSignal zero() { return {}; }
  static InputSignal constant_input(double value) {
    InputSignal s;
    s.kind = Kind::Constant;
    s.constant = value;
    return s;
  }
  static InputSignal sinusoid(double amplitude, double frequency) {
    InputSignal s;
    s.kind = Kind::Sinusoid;
    s.amplitude = amplitude;
    s.frequency = frequency;
    return s;
  }
  static InputSignal external(std::vector<Vector> sequence) {
    InputSignal s;
    s.kind = Kind::External;
    s.sequence = std::move(sequence);
    return s;
  }

  Vector value(int k, int p) const {
    switch (kind) {
      case Kind::Zero:
        return Vector::Zero(p);
      case Kind::Constant:
        return Vector::Constant(p, constant);
      case Kind::Sinusoid:
        return Vector::Constant(p, amplitude * std::sin(frequency * k));
      case Kind::External:
        if (k >= static_cast<int>(sequence.size()))
          throw DimensionMismatch("input sequence shorter than horizon");
        return sequence[k];
    }
    return Vector::Zero(p);
  }
};

struct ScenarioConfig {
  int horizon = 0;  // T, number of simulated steps k = 0..T-1
  Vector x0;
  Vector xhat0;
  InputSignal input;
  std::uint64_t seed = 0;
  bool process_noise = true;
  bool measurement_noise = true;
};

/// One simulated trajectory.  Measurements at inactive schedule rows are
/// recorded as NaN ("absent"); the estimator internally zero-fills them,
/// which is inert because the matching gain columns are zero.
///
/// `x_pred` is the state of the predictor recursion, x̂(k | k-1); `x_hat`
/// is the current estimate x̂(k | k) after folding in y(k) through the
/// measurement-update gain K_k recovered from L_k = A K_k.  Reported
/// errors refer to the current estimate.
struct SimulationRun {
  std::vector<Vector> x_true;   // length T, n each
  std::vector<Vector> y;        // length T, q each, NaN where inactive
  std::vector<Vector> x_pred;   // length T, n each, x̂(k | k-1)
  std::vector<Vector> x_hat;    // length T, n each, x̂(k | k)
  std::vector<Vector> error;    // length T, x_true - x_hat
  std::vector<int> phase;       // length T, k mod N

  int steps() const { return static_cast<int>(x_true.size()); }
};

inline SimulationRun simulate(const MultirateModel& m, const CyclicGain& gains,
                              const ScenarioConfig& cfg) {
  const int n = m.sys.n(), p = m.sys.p(), q = m.sys.q();
  const int N = m.schedule.period;
  if (gains.N() != N) throw DimensionMismatch("gain schedule length != period");
  if (cfg.horizon < 1) throw DimensionMismatch("horizon must be >= 1");
  if (cfg.x0.size() != n || cfg.xhat0.size() != n)
    throw DimensionMismatch("x0 / xhat0 dimension mismatch");

  // Measurement-update gains: least-squares solution of A K_k = L_k
  // (exact whenever A is invertible).
  Eigen::CompleteOrthogonalDecomposition<Matrix> Adec(m.sys.A);
  std::vector<Matrix> K(N);
  for (int ph = 0; ph < N; ++ph) K[ph] = Adec.solve(gains.periodic[ph]);

  Xoshiro256 rng(cfg.seed);
  SimulationRun run;
  run.x_true.reserve(cfg.horizon);
  run.y.reserve(cfg.horizon);
  run.x_pred.reserve(cfg.horizon);
  run.x_hat.reserve(cfg.horizon);
  run.error.reserve(cfg.horizon);
  run.phase.reserve(cfg.horizon);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  Vector x = cfg.x0, xhat = cfg.xhat0;
  for (int k = 0; k < cfg.horizon; ++k) {
    const int ph = k % N;
    const Vector& mask = m.schedule.mask(ph);
    const Vector u = cfg.input.value(k, p);

    // Measure: full-rate noise draw, then the schedule selects rows.
    Vector noise_v = Vector::Zero(q);
    if (cfg.measurement_noise) noise_v = m.noise.Rhalf * rng.normal_vector(q);
    const Vector y_full = m.sys.C * x + noise_v;
    Vector y_rec(q), y_zero = Vector::Zero(q);
    for (int i = 0; i < q; ++i) {
      y_rec(i) = mask(i) != 0.0 ? y_full(i) : nan;
      y_zero(i) = mask(i) != 0.0 ? y_full(i) : 0.0;
    }

    // Innovation against the zero-filled prediction; inactive columns of
    // L_k are structurally zero so the filled entries never propagate.
    Vector pred = m.sys.C * xhat;
    for (int i = 0; i < q; ++i)
      if (mask(i) == 0.0) pred(i) = 0.0;

    const Vector xcur = xhat + K[ph] * (y_zero - pred);
    run.x_true.push_back(x);
    run.y.push_back(y_rec);
    run.x_pred.push_back(xhat);
    run.x_hat.push_back(xcur);
    run.error.push_back(x - xcur);
    run.phase.push_back(ph);

    Vector noise_w = Vector::Zero(n);
    if (cfg.process_noise) noise_w = m.noise.Qhalf * rng.normal_vector(n);
    const Vector x_next = m.sys.A * x + m.sys.B * u + noise_w;
    xhat = m.sys.A * xhat + m.sys.B * u + gains.periodic[ph] * (y_zero - pred);
    x = x_next;
  }
  return run;
}

/// Component-wise RMSE of the estimation error over k >= warmup.
inline Vector rmse(const SimulationRun& run, int warmup) {
  if (warmup >= run.steps()) throw DimensionMismatch("warmup >= horizon");
  const int n = static_cast<int>(run.error.front().size());
  Vector acc = Vector::Zero(n);
  int count = 0;
  for (int k = warmup; k < run.steps(); ++k) {
    acc += run.error[k].cwiseAbs2();
    ++count;
  }
  return (acc / count).cwiseSqrt();
}

/// Sample covariance of e(k) at steps congruent to k_offset mod N, pooled
/// across runs, discarding `warmup` initial steps of each run.
inline Matrix empirical_covariance(const std::vector<SimulationRun>& runs,
                                   int N, int k_offset, int warmup) {
  if (runs.size() < 2) throw InsufficientData("need >= 2 runs");
  const int n = static_cast<int>(runs.front().error.front().size());
  Vector mean = Vector::Zero(n);
  int count = 0;
  for (const SimulationRun& run : runs)
    for (int k = warmup; k < run.steps(); ++k)
      if (k % N == k_offset) {
        mean += run.error[k];
        ++count;
      }
  if (count < 2) throw InsufficientData("fewer than 2 samples at phase");
  mean /= count;
  Matrix cov = Matrix::Zero(n, n);
  for (const SimulationRun& run : runs)
    for (int k = warmup; k < run.steps(); ++k)
      if (k % N == k_offset) {
        const Vector d = run.error[k] - mean;
        cov += d * d.transpose();
      }
  return cov / (count - 1);
}

}  // namespace mrkf
