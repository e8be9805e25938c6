#include "evtrack/ctsensor.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace evtrack {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Riccati flow together with the three running integrals
// (tr(C X C^T), tr X, tr(B^T X^{-1} B)), advanced by one RK4 step.
// gain(t) returns C^T C at absolute time t.
struct Flow {
  const Matrix& A;
  const Matrix& W;
  std::function<Matrix(double)> gain;

  Matrix rhs(double t, const Matrix& X) const {
    return A * X + X * A.transpose() + W - X * gain(t) * X;
  }

  void step(double& t, double h, Matrix& X, double& cxc, double& trx,
            double& y) const {
    const Matrix k1 = rhs(t, X);
    const Matrix k2 = rhs(t + 0.5 * h, X + 0.5 * h * k1);
    const Matrix k3 = rhs(t + 0.5 * h, X + 0.5 * h * k2);
    const Matrix k4 = rhs(t + h, X + h * k3);

    auto scalars = [&](double tt, const Matrix& XX, double& dc, double& dx,
                       double& dy) {
      dc = (gain(tt) * XX).trace();
      dx = XX.trace();
      Eigen::LLT<Matrix> llt(symmetrize(XX));
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error("riccati flow: covariance lost positivity");
      }
      dy = llt.solve(W).trace();
    };
    double c1, x1, y1, c2, x2, y2, c3, x3, y3, c4, x4, y4;
    scalars(t, X, c1, x1, y1);
    scalars(t + 0.5 * h, X + 0.5 * h * k1, c2, x2, y2);
    scalars(t + 0.5 * h, X + 0.5 * h * k2, c3, x3, y3);
    scalars(t + h, X + h * k3, c4, x4, y4);

    X = symmetrize(X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    cxc += (h / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    trx += (h / 6.0) * (x1 + 2.0 * x2 + 2.0 * x3 + x4);
    y += (h / 6.0) * (y1 + 2.0 * y2 + 2.0 * y3 + y4);
    t += h;
    if (!X.allFinite()) {
      throw std::runtime_error("riccati flow: divergence at t = " +
                               std::to_string(t));
    }
  }
};

void require_pd(const Matrix& M, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M));
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument(std::string(what) +
                                ": matrix must be positive definite");
  }
}

}  // namespace

SensorDesign design_ti_sensor(const StateSpaceModel& model, double D) {
  const CTInfoSolution info = solve_ct_info(model, D);
  const int n = model.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(info.X_star);
  if (es.eigenvalues().minCoeff() < 1e-10) {
    throw std::runtime_error("design_ti_sensor: optimizer is near-singular");
  }
  const Matrix Xinv = info.X_star.llt().solve(Matrix::Identity(n, n));
  const Matrix S = symmetrize(model.A * info.X_star +
                              info.X_star * model.A.transpose() +
                              model.B * model.B.transpose());
  const Matrix CtC = symmetrize(Xinv * S * Xinv);
  SensorDesign d;
  d.X_target = info.X_star;
  d.C = psd_sqrt(CtC, 1e-6);
  return d;
}

RiccatiTrajectory run_riccati(const StateSpaceModel& model,
                              const SensorDesign& sensor, const Matrix& X0,
                              double horizon, double step) {
  if (step <= 0.0) throw std::invalid_argument("run_riccati: step <= 0");
  if (horizon < step) {
    throw std::invalid_argument("run_riccati: horizon < step");
  }
  require_pd(X0, "run_riccati: X0");
  const Matrix W = symmetrize(model.B * model.B.transpose());
  const Matrix G = symmetrize(sensor.C.transpose() * sensor.C);
  Flow flow{model.A, W, [&G](double) { return G; }};

  const long n_steps = static_cast<long>(std::llround(horizon / step));
  RiccatiTrajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.X.reserve(n_steps + 1);
  Matrix X = symmetrize(X0);
  double t = 0.0, cxc = 0.0, trx = 0.0, y = 0.0;
  traj.times.push_back(t);
  traj.X.push_back(X);
  for (long k = 0; k < n_steps; ++k) {
    flow.step(t, step, X, cxc, trx, y);
    t = (k + 1) * step;
    traj.times.push_back(t);
    traj.X.push_back(X);
  }
  const double T = n_steps * step;
  traj.mi_rate = cxc / (2.0 * kLn2) / T;
  traj.mse_rate = trx / T;
  traj.cxc_integral = cxc;
  traj.y_integral = y;
  traj.X_final = X;
  return traj;
}

PeriodicPolicyReport periodic_policy_check(const StateSpaceModel& model,
                                           const DiscretizedModel& dmodel,
                                           double Dc, double eps,
                                           double delta) {
  const double tau = dmodel.tau;
  if (eps <= 0.0) {
    throw std::invalid_argument("periodic_policy_check: eps <= 0");
  }
  if (delta <= 0.0 || delta >= tau) {
    throw std::invalid_argument("periodic_policy_check: need 0 < delta < tau");
  }
  const DtDistortion dd = ct_to_dt_distortion(dmodel, Dc);
  if (!dd.feasible) {
    throw std::invalid_argument(
        "periodic_policy_check: distortion below the sampling floor");
  }
  const DTRateSolution rd = solve_dt_rate(dmodel, dd.value, dmodel.Q_bar, eps);

  const Matrix& A = model.A;
  const Matrix W = symmetrize(model.B * model.B.transpose());
  const Matrix& P = rd.P_star;
  const int n = model.dim();

  // Open-loop covariance at the start of the correction ramp; the ramp
  // then pulls the covariance linearly back to P* over delta seconds.
  const double t_ramp = tau - delta;
  const Matrix A_r = matrix_exp(A, t_ramp);
  const Matrix Xtil = symmetrize(A_r * P * A_r.transpose() +
                                 gramian_integral(A, model.B, t_ramp));
  const Matrix M = (P - Xtil) / delta;

  auto ramp_gain = [&](double u) {  // u in [0, delta]
    const Matrix F = symmetrize(Xtil + u * M);
    const Matrix Finv = F.llt().solve(Matrix::Identity(n, n));
    return symmetrize(-Finv *
                      (M - A * F - F * A.transpose() - W) * Finv);
  };

  PeriodicPolicyReport rep;
  rep.Dc = Dc;
  rep.rate_per_sample = rd.value;
  rep.rate_target = rd.value / tau;

  const long ramp_steps = 400;
  const double ramp_h = delta / ramp_steps;
  for (long k = 0; k <= ramp_steps; ++k) {
    const Matrix G = ramp_gain(k * ramp_h);
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    if (es.eigenvalues().minCoeff() < -1e-9 * (1.0 + G.norm())) {
      rep.gain_psd_ok = false;
      return rep;
    }
  }

  const Matrix zero_gain = Matrix::Zero(n, n);
  const long smooth_steps = 2000;
  const double smooth_h = t_ramp / smooth_steps;

  Matrix X = P;
  const int periods = 3;
  for (int period = 0; period < periods; ++period) {
    const bool last = (period == periods - 1);
    double cxc = 0.0, trx = 0.0, y = 0.0;
    // Silent phase: pure drift.
    {
      Flow flow{A, W, [&zero_gain](double) { return zero_gain; }};
      double t = 0.0;
      for (long k = 0; k < smooth_steps; ++k) {
        flow.step(t, smooth_h, X, cxc, trx, y);
      }
    }
    // Correction ramp with the time-varying gain.
    {
      Flow flow{A, W, ramp_gain};
      double t = 0.0;
      for (long k = 0; k < ramp_steps; ++k) {
        flow.step(t, ramp_h, X, cxc, trx, y);
      }
    }
    if (last) {
      rep.mi_rate = cxc / (2.0 * kLn2) / tau;
      rep.mse_rate = trx / tau;
      rep.periodicity_error = (X - P).norm();
    }
  }
  return rep;
}

}  // namespace evtrack
