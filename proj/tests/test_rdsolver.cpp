#include "evtrack/rdsolver.hpp"

#include <doctest.h>

#include <cmath>

using namespace evtrack;

namespace {

StateSpaceModel scalar_model(double A = -0.1, double B = 1.0) {
  Matrix a(1, 1), b(1, 1), s(1, 1);
  a << A;
  b << B;
  s << 1.0;
  return make_model(a, b, s);
}

StateSpaceModel diag_model(double a1, double a2) {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = a1;
  A(1, 1) = a2;
  return make_model(A, Matrix::Identity(2, 2), Matrix::Identity(2, 2));
}

StateSpaceModel planar_model() {
  Matrix A(2, 2), B(2, 2), S(2, 2);
  A << -0.0145, -0.0886, 0.0886, 0.0;
  B << 0.1, 0.0, 0.0, 0.1;
  S << 1.0, 0.0, 0.0, 1.0;
  return make_model(A, B, S);
}

}  // namespace

TEST_CASE("scalar closed forms") {
  CHECK(scalar_ct_info(-0.1, 1.0, 1.0) ==
        doctest::Approx(0.577078).epsilon(1e-6));
  CHECK(scalar_ct_info(-0.1, 1.0, 5.0) == 0.0);  // clamp at stationary
  CHECK(scalar_ct_info(-0.1, 0.0, 0.5) == 0.0);
  CHECK_THROWS_AS(scalar_ct_info(-0.1, 1.0, 0.0), std::invalid_argument);

  const auto d = discretize(scalar_model(), 1.0);
  const double a = d.A_tau(0, 0), w = d.B_tau(0, 0) * d.B_tau(0, 0),
               q = d.Q_bar(0, 0);
  const double Dd = 1.0 - d.b_bar;
  CHECK(scalar_dt_rate(d, Dd) ==
        doctest::Approx(0.5 * std::log2(a * a + w * q / Dd)).epsilon(1e-12));
  CHECK(scalar_dt_rate(d, q * w / (1.0 - a * a)) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("CT solver matches the scalar closed form") {
  const auto model = scalar_model();
  for (int i = 1; i <= 20; ++i) {
    const double D = 0.3 * i;  // spans the zero-rate clamp at D = 5
    const auto sol = solve_ct_info(model, D);
    CHECK(sol.feasible);
    CHECK(std::abs(sol.value - scalar_ct_info(-0.1, 1.0, D)) < 1e-6);
    CHECK(sol.X_star(0, 0) > 0.0);
    CHECK(sol.X_star.trace() <= D + 1e-7);
    const double objective =
        (sol.a + sol.Y_star.trace()) / (2.0 * std::log(2.0));
    const bool value_consistent =
        sol.value == 0.0 ||
        std::abs(sol.value - objective) < 1e-9 * (1.0 + std::abs(objective));
    CHECK(value_consistent);
    CHECK(sol.kkt_residual < 1e-6);
  }
}

TEST_CASE("CT solver feasibility invariants on the planar model") {
  const auto model = planar_model();
  const Matrix W = model.B * model.B.transpose();
  for (double D : {0.05, 0.1, 0.3, 0.6, 1.0, 1.3}) {
    const auto sol = solve_ct_info(model, D);
    CHECK(sol.feasible);
    CHECK(sol.X_star.trace() <= D + 1e-7);
    const Matrix S = model.A * sol.X_star + sol.X_star * model.A.transpose() + W;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S));
    CHECK(es.eigenvalues().minCoeff() >= -1e-7);
    CHECK(sol.value >= 0.0);
    CHECK(sol.gap <= 1e-7 * (1.0 + sol.value) + 1e-15);
  }
}

TEST_CASE("CT solver split-budget oracle for a decoupled model") {
  const auto model = diag_model(-1.0, -2.0);
  const double D = 0.4;
  const auto sol = solve_ct_info(model, D);
  double best = 1e300;
  for (int i = 1; i < 4000; ++i) {
    const double d1 = D * i / 4000.0;
    best = std::min(best, scalar_ct_info(-1.0, 1.0, d1) +
                              scalar_ct_info(-2.0, 1.0, D - d1));
  }
  CHECK(sol.value <= best + 1e-5);
  CHECK(sol.value >= best - 1e-4);  // grid resolution slack
}

TEST_CASE("CT solver rejects non-positive budgets") {
  CHECK_THROWS_AS(solve_ct_info(scalar_model(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_ct_info(scalar_model(), -1.0), std::invalid_argument);
}

TEST_CASE("DT solver matches the scalar closed form") {
  const auto model = scalar_model();
  for (double tau : {0.25, 1.0}) {
    const auto d = discretize(model, tau);
    for (int i = 1; i <= 20; ++i) {
      const double Dd = 0.25 * i * d.Q_bar(0, 0);
      const auto sol = solve_dt_rate(d, Dd, d.Q_bar);
      CHECK(sol.feasible);
      CHECK(std::abs(sol.value - scalar_dt_rate(d, Dd)) < 1e-6);
      CHECK(sol.P_star(0, 0) > 0.0);
      CHECK((d.Q_bar * sol.P_star).trace() <= Dd + 1e-7);
      const Matrix pred = d.A_tau * sol.P_star * d.A_tau.transpose() +
                          d.B_tau * d.B_tau.transpose();
      CHECK((sol.Pi_star - pred).norm() < 1e-7);
      CHECK(sol.kkt_residual < 1e-3);
    }
  }
}

TEST_CASE("DT solver on the planar model") {
  const auto model = planar_model();
  const auto d = discretize(model, 1.0);
  double prev = 1e300;
  for (double Dc : {0.02, 0.05, 0.1, 0.3, 0.6, 1.0}) {
    const double Dd = Dc - d.b_bar;
    REQUIRE(Dd > 0.0);
    const auto sol = solve_dt_rate(d, Dd, d.Q_bar);
    CHECK(sol.feasible);
    CHECK(sol.value >= 0.0);
    CHECK(sol.value <= prev + 1e-9);  // non-increasing in the budget
    prev = sol.value;
    CHECK((d.Q_bar * sol.P_star).trace() <= Dd + 1e-7);
    // prediction-map constraint P <= A P A^T + W
    const Matrix slack = d.A_tau * sol.P_star * d.A_tau.transpose() +
                         d.B_tau * d.B_tau.transpose() - sol.P_star;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(slack));
    CHECK(es.eigenvalues().minCoeff() >= -1e-7);
    CHECK(0.5 * std::log2(sol.Pi_star.determinant() /
                          sol.P_star.determinant()) ==
          doctest::Approx(sol.value).epsilon(1e-7));
  }
}

TEST_CASE("DT value diverges as the budget shrinks") {
  const auto d = discretize(scalar_model(), 1.0);
  double prev = -1.0;
  for (double Dd : {0.1, 0.01, 0.001, 1e-4, 1e-5}) {
    const auto sol = solve_dt_rate(d, Dd, d.Q_bar);
    CHECK(sol.value > prev);
    prev = sol.value;
  }
  CHECK(prev > 7.0);  // ~0.5 log2(w q / Dd) at Dd = 1e-5
}

TEST_CASE("perturbed DT constraint is honored") {
  const auto d = discretize(scalar_model(), 1.0);
  const double Dd = 1.0 - d.b_bar;
  const double eps = 1e-3;
  const auto base = solve_dt_rate(d, Dd, d.Q_bar);
  const auto pert = solve_dt_rate(d, Dd, d.Q_bar, eps);
  CHECK(pert.value >= base.value - 1e-9);
  const Matrix slack = d.A_tau * pert.P_star * d.A_tau.transpose() +
                       d.B_tau * d.B_tau.transpose() -
                       eps * Matrix::Identity(1, 1) - pert.P_star;
  CHECK(slack(0, 0) >= -1e-7);
}

TEST_CASE("CT/DT ordering across the grid") {
  for (const auto& model : {scalar_model(), planar_model()}) {
    const bool scalar = model.dim() == 1;
    for (double tau : {0.5, 1.0, 2.0}) {
      const auto d = discretize(model, tau);
      for (double Dc : scalar ? std::initializer_list<double>{0.6, 1.0, 2.0, 3.0, 4.0}
                              : std::initializer_list<double>{0.05, 0.1, 0.3, 0.6, 1.0}) {
        const double Dd = Dc * tau - d.b_bar;
        if (Dd <= 0.0) continue;
        const double R = solve_dt_rate(d, Dd, d.Q_bar).value;
        const double Ic = solve_ct_info(model, Dc).value;
        CHECK(R / tau >= Ic - 1e-6);
      }
    }
  }
}

TEST_CASE("sampled rate per second approaches the CT rate") {
  const auto model = scalar_model();
  const double Ic = scalar_ct_info(-0.1, 1.0, 1.0);
  const auto d = discretize(model, 1e-4);
  const double Dd = 1e-4 - d.b_bar;
  REQUIRE(Dd > 0.0);
  const double R = scalar_dt_rate(d, Dd);
  CHECK(std::abs(R / 1e-4 - Ic) / Ic < 0.01);
}

TEST_CASE("zero-rate bypass") {
  const auto model = scalar_model();
  const auto ct = solve_ct_info(model, 6.0);
  CHECK(ct.value == 0.0);
  CHECK(ct.X_star(0, 0) == doctest::Approx(5.0));
  const auto d = discretize(model, 1.0);
  const auto dt = solve_dt_rate(d, d.Q_bar(0, 0) * 5.0 + 0.1, d.Q_bar);
  CHECK(dt.value == 0.0);
  CHECK(dt.P_star(0, 0) == doctest::Approx(5.0));
  CHECK(dt.Pi_star(0, 0) == doctest::Approx(5.0));
}
