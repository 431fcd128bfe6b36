#include <catch2/catch_amalgamated.hpp>

#include "mrkf/riccati.hpp"

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

}  // namespace

TEST_CASE("scalar DARE fixed points") {
  DareResult stable = dare_fixed_point(Matrix{{0.5}}, Matrix{{1.0}},
                                       Matrix{{0.0}}, Matrix{{1.0}});
  CHECK(stable.P(0, 0) == Catch::Approx(0.0).margin(1e-10));
  CHECK(stable.L_ss(0, 0) == Catch::Approx(0.0).margin(1e-10));

  DareResult golden = dare_fixed_point(Matrix{{1.0}}, Matrix{{1.0}},
                                       Matrix{{1.0}}, Matrix{{1.0}});
  CHECK(golden.P(0, 0) == Catch::Approx(0.5 * (1.0 + std::sqrt(5.0))).margin(1e-9));
}

TEST_CASE("periodic recursion reproduces the Table 1 gains") {
  MultirateModel m = automotive();
  RiccatiTrace tr = periodic_riccati(m, Matrix::Identity(3, 3));
  REQUIRE(static_cast<int>(tr.gains.size()) == 10);

  const Matrix l0_ref{{0.2827, 0.1017}, {0.0042, 0.6979}, {0.0062, 0.3755}};
  const Matrix l1_ref{{0.0, 0.1094}, {0.0, 0.6981}, {0.0, 0.3757}};
  const Matrix l5_ref{{0.0, 0.1148}, {0.0, 0.6981}, {0.0, 0.3758}};
  CHECK((tr.gains[0] - l0_ref).cwiseAbs().maxCoeff() < 5e-3);
  CHECK((tr.gains[1] - l1_ref).cwiseAbs().maxCoeff() < 5e-3);
  CHECK((tr.gains[5] - l5_ref).cwiseAbs().maxCoeff() < 5e-3);
  for (int k = 1; k < 10; ++k) CHECK(tr.gains[k].col(0).norm() == 0.0);
}

TEST_CASE("periodic recursion at N=1 matches the stationary DARE") {
  MultirateModel m = automotive();
  m.schedule = schedule_from_rates(1, {1, 1});
  RiccatiTrace tr = periodic_riccati(m, Matrix::Identity(3, 3));
  DareResult dare =
      dare_fixed_point(m.sys.A, m.sys.C, m.noise.Q, m.noise.R);
  CHECK((tr.gains[0] - dare.L_ss).norm() < 1e-8);
  CHECK((tr.P[0] - dare.P).norm() < 1e-8);
}

TEST_CASE("zero-sensor steps perform pure prediction") {
  MultirateModel m;
  m.sys.A = Matrix{{1.0, 0.1}, {0.0, 0.9}};
  m.sys.B = Matrix{{0.0}, {1.0}};
  m.sys.C = Matrix{{1.0, 0.0}};
  m.noise = NoiseModel::from_covariances(Vector{{0.01, 0.1}}.asDiagonal(),
                                         Matrix{{0.5}});
  m.schedule.period = 2;
  m.schedule.masks = {Vector::Ones(1), Vector::Zero(1)};

  RiccatiTrace tr = periodic_riccati(m, Matrix::Identity(2, 2));
  CHECK(tr.gains[1].norm() == 0.0);
  const Matrix predicted =
      m.sys.A * tr.P[1] * m.sys.A.transpose() + m.noise.Q;
  CHECK((tr.P[0] - predicted).norm() < 1e-9);
}

TEST_CASE("periodic solution is invariant to the initial covariance") {
  MultirateModel m = automotive();
  RiccatiTrace a = periodic_riccati(m, Matrix::Identity(3, 3));
  RiccatiTrace b = periodic_riccati(m, 10.0 * Matrix::Identity(3, 3));
  RiccatiTrace c = periodic_riccati(m, m.noise.Q);
  for (int k = 0; k < 10; ++k) {
    CHECK((a.gains[k] - b.gains[k]).norm() < 1e-9);
    CHECK((a.gains[k] - c.gains[k]).norm() < 1e-9);
  }
}

TEST_CASE("cross_validate flags an injected gain fault") {
  MultirateModel m = automotive();
  RiccatiTrace tr = periodic_riccati(m, Matrix::Identity(3, 3));
  std::vector<Matrix> gains = tr.gains;

  CrossValidationReport clean =
      cross_validate(m, gains, Matrix::Identity(30, 30) * 1e6);
  CHECK(clean.max_gain_gap < 1e-8);

  gains[0](0, 1) += 0.1;
  CrossValidationReport fault =
      cross_validate(m, gains, Matrix::Identity(30, 30) * 1e6);
  CHECK(fault.max_gain_gap == Catch::Approx(0.1).margin(1e-8));
}
