#pragma once

#include "evtrack/rdsolver.hpp"

#include <vector>

namespace evtrack {

/// Time-invariant observation gain achieving the minimum information
/// rate at distortion budget D: C^T C = X*^{-1}(A X* + X* A^T + B B^T) X*^{-1}.
struct SensorDesign {
  Matrix C;
  Matrix X_target;
};

SensorDesign design_ti_sensor(const StateSpaceModel& model, double D);

/// Filtering Riccati flow dX = A X + X A^T + B B^T - X C^T C X under a
/// constant gain, with running information and distortion functionals.
struct RiccatiTrajectory {
  std::vector<double> times;
  std::vector<Matrix> X;
  double mi_rate = 0.0;       // (1/T) int tr(C X C^T) / (2 ln 2), bits/s
  double mse_rate = 0.0;      // (1/T) int tr(X)
  double cxc_integral = 0.0;  // int tr(C X C^T) dt, nats-scale
  double y_integral = 0.0;    // int tr(B^T X^{-1} B) dt
  Matrix X_final;
};

RiccatiTrajectory run_riccati(const StateSpaceModel& model,
                              const SensorDesign& sensor, const Matrix& X0,
                              double horizon, double step = 0.01);

/// Periodic sawtooth policy: silent drift over [0, tau - delta], then a
/// time-varying gain ramping the covariance linearly back to the
/// perturbed-optimal P* over the final delta seconds.
struct PeriodicPolicyReport {
  bool gain_psd_ok = true;       // false: delta too large, G_t lost PSD
  double mi_rate = 0.0;          // last-period average, bits/second
  double mse_rate = 0.0;         // last-period average, state-units^2
  double rate_target = 0.0;      // R(D_d, eps) / tau, bits/second
  double rate_per_sample = 0.0;  // R(D_d, eps), bits/sample
  double Dc = 0.0;
  double periodicity_error = 0.0;  // ||X(end of period) - P*||_F
};

PeriodicPolicyReport periodic_policy_check(const StateSpaceModel& model,
                                           const DiscretizedModel& dmodel,
                                           double Dc, double eps,
                                           double delta);

}  // namespace evtrack
