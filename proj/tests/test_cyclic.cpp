#include <catch2/catch_amalgamated.hpp>

#include "mrkf/cyclic.hpp"
#include "mrkf/rng.hpp"

using namespace mrkf;

namespace {

MultirateModel automotive() {
  MultirateModel m;
  m.sys.A = Matrix{{1.0, 0.1, 0.005}, {0.0, 1.0, 0.1}, {0.0, 0.0, 0.8}};
  m.sys.B = Matrix{{0.0}, {0.0}, {1.0}};
  m.sys.C = Matrix{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  m.noise = NoiseModel::from_covariances(Vector{{0.01, 0.1, 0.5}}.asDiagonal(),
                                         Vector{{1.0, 0.1}}.asDiagonal());
  m.schedule = schedule_from_rates(10, {10, 1});
  return m;
}

MultirateModel random_stable_model(Xoshiro256& rng, int n, int q, int N) {
  MultirateModel m;
  Matrix a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = rng.normal();
  m.sys.A = 0.9 * a / std::max(1.0, spectral_radius(a));
  m.sys.B = Matrix::Zero(n, 1);
  Matrix cm(q, n);
  for (int r = 0; r < q; ++r)
    for (int c = 0; c < n; ++c) cm(r, c) = rng.normal();
  m.sys.C = cm;
  m.noise = NoiseModel::from_covariances(Matrix::Identity(n, n),
                                         Matrix::Identity(q, q));
  m.schedule.period = N;
  for (int k = 0; k < N; ++k) {
    Vector mask = Vector::Zero(q);
    for (int i = 0; i < q; ++i) mask(i) = rng.uniform() < 0.6 ? 1.0 : 0.0;
    if (k == 0) mask.setOnes();
    m.schedule.masks.push_back(mask);
  }
  return m;
}

}  // namespace

TEST_CASE("N=1 cyclic system reduces to the original") {
  MultirateModel m = automotive();
  m.schedule = schedule_from_rates(1, {1, 1});
  CyclicSystem cs = build_cyclic(m);
  CHECK(cs.Acyc.isApprox(m.sys.A));
  CHECK(cs.Ccyc.isApprox(m.sys.C));
  CHECK(cs.Rhalf_cyc.isApprox(m.noise.Rhalf));
}

TEST_CASE("scalar N=2 cyclic shift pattern") {
  MultirateModel m;
  m.sys.A = Matrix{{2.0}};
  m.sys.B = Matrix{{1.0}};
  m.sys.C = Matrix{{1.0}};
  m.noise = NoiseModel::from_covariances(Matrix{{1.0}}, Matrix{{1.0}});
  m.schedule = schedule_from_rates(2, {1});
  CyclicSystem cs = build_cyclic(m);
  CHECK(cs.Acyc.isApprox(Matrix{{0.0, 2.0}, {2.0, 0.0}}));
}

TEST_CASE("automotive cyclic dimensions and measurement rank") {
  CyclicSystem cs = build_cyclic(automotive());
  CHECK(cs.Acyc.rows() == 30);
  CHECK(cs.Acyc.cols() == 30);
  CHECK(cs.Ccyc.rows() == 20);
  CHECK(cs.Ccyc.cols() == 30);

  RankReport rr = cyclic_rank_report(cs);
  CHECK(rr.rank_R == 11);
  CHECK_FALSE(rr.is_definite);
}

TEST_CASE("rank report degenerate schedules") {
  MultirateModel m = automotive();
  m.schedule.masks.assign(10, Vector::Ones(2));
  CHECK(cyclic_rank_report(build_cyclic(m)).is_definite);

  MultirateModel s;
  s.sys.A = Matrix{{0.5}};
  s.sys.B = Matrix{{1.0}};
  s.sys.C = Matrix{{1.0}};
  s.noise = NoiseModel::from_covariances(Matrix{{1.0}}, Matrix{{1.0}});
  s.schedule = schedule_from_rates(2, {2});
  CHECK(cyclic_rank_report(build_cyclic(s)).rank_R == 1);
}

TEST_CASE("automotive observability rank and conditioning") {
  ObservabilityReport obs = observability_matrix(build_cyclic(automotive()));
  CHECK(obs.rank == 30);
  CHECK(obs.cond > 9.0);
  CHECK(obs.cond < 13.0);
}

TEST_CASE("observability degenerate cases") {
  MultirateModel m = automotive();
  m.sys.C.setZero();
  CHECK(observability_matrix(build_cyclic(m)).rank == 0);

  MultirateModel full = automotive();
  full.schedule = schedule_from_rates(1, {1, 1});
  CHECK(observability_matrix(build_cyclic(full)).rank == 3);
}

TEST_CASE("monodromy with zero gains is A^N") {
  MultirateModel m = automotive();
  CyclicGain gains;
  gains.periodic.assign(10, Matrix::Zero(3, 2));
  Matrix an = Matrix::Identity(3, 3);
  for (int k = 0; k < 10; ++k) an = m.sys.A * an;
  CHECK(monodromy(m, gains).isApprox(an, 1e-12));
}

TEST_CASE("monodromy at N=1 is the closed loop") {
  MultirateModel m = automotive();
  m.schedule = schedule_from_rates(1, {1, 1});
  CyclicGain gains;
  gains.periodic = {Matrix{{0.1, 0.0}, {0.0, 0.2}, {0.0, 0.0}}};
  CHECK(monodromy(m, gains)
            .isApprox(m.sys.A - gains.periodic[0] * m.sys.C, 1e-14));
}

TEST_CASE("spectral radius identity, trivial and randomized") {
  MultirateModel m;
  m.sys.A = 0.5 * Matrix::Identity(2, 2);
  m.sys.B = Matrix::Zero(2, 1);
  m.sys.C = Matrix{{1.0, 0.0}};
  m.noise = NoiseModel::from_covariances(Matrix::Identity(2, 2), Matrix{{1.0}});
  m.schedule = schedule_from_rates(3, {1});
  CyclicGain zero;
  zero.periodic.assign(3, Matrix::Zero(2, 1));
  zero.Lcyc = embed_periodic_gains(zero.periodic, 2, 1);
  CHECK(spectral_radius_identity_check(m, build_cyclic(m), zero) < 1e-12);

  Xoshiro256 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    MultirateModel rm = random_stable_model(rng, 3, 2, 4);
    CyclicGain gains;
    for (int k = 0; k < 4; ++k) {
      Matrix l(3, 2);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c)
          l(r, c) = 0.05 * rng.normal() * rm.schedule.mask(k)(c);
      gains.periodic.push_back(l);
    }
    gains.Lcyc = embed_periodic_gains(gains.periodic, 3, 2);
    CHECK(spectral_radius_identity_check(rm, build_cyclic(rm), gains) < 1e-10);
  }
}

TEST_CASE("gain embedding and extraction round-trip") {
  Xoshiro256 rng(5);
  std::vector<Matrix> periodic;
  for (int k = 0; k < 4; ++k) {
    Matrix l(3, 2);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c) l(r, c) = rng.normal();
    periodic.push_back(l);
  }
  Matrix lcyc = embed_periodic_gains(periodic, 3, 2);
  std::vector<Matrix> back = extract_periodic_gains(lcyc, 4, 3, 2);
  for (int k = 0; k < 4; ++k) CHECK(back[k].isApprox(periodic[k], 1e-14));
}

TEST_CASE("Proposition 1: cyclic recursion carries the periodic state") {
  Xoshiro256 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    MultirateModel m = random_stable_model(rng, 3, 2, 4);
    CyclicSystem cs = build_cyclic(m);
    const int N = 4, n = 3;

    Vector x(3);
    for (int i = 0; i < 3; ++i) x(i) = rng.normal();
    Vector xcyc = Vector::Zero(N * n);
    xcyc.head(n) = x;

    for (int k = 0; k < 5 * N; ++k) {
      Vector w = rng.normal_vector(n);
      x = m.sys.A * x + m.noise.Qhalf * w;
      Vector wcyc = Vector::Zero(N * n);
      wcyc.segment((k % N) * n, n) = w;
      xcyc = cs.Acyc * xcyc + cs.Qhalf_cyc * wcyc;

      const int blk = (k + 1) % N;
      CHECK((xcyc.segment(blk * n, n) - x).norm() < 1e-10);
      for (int j = 0; j < N; ++j)
        if (j != blk) CHECK(xcyc.segment(j * n, n).norm() == 0.0);
    }
  }
}
