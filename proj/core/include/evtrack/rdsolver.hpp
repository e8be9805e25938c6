#pragma once

#include "evtrack/discretize.hpp"

#include <stdexcept>

namespace evtrack {

/// Thrown when the barrier method hits its iteration cap before the
/// duality-gap target; carries the last gap estimate in bits.
struct SolverError : std::runtime_error {
  SolverError(const std::string& msg, double last_gap_bits)
      : std::runtime_error(msg), last_gap(last_gap_bits) {}
  double last_gap;
};

/// Barrier parameters. Defaults are fixed project-wide.
struct BarrierOptions {
  double t_init = 1.0;
  double t_growth = 10.0;
  double newton_tol = 1e-9;       // half squared Newton decrement
  double gap_tol = 1e-7;          // relative, gap / (1 + |value|), bits
  int max_outer = 200;
  int max_inner = 100;
};

struct CTInfoSolution {
  double value = 0.0;            // bits/second, clamped at 0
  double value_unclamped = 0.0;  // bits/second, before the clamp
  Matrix X_star;
  Matrix Y_star;                 // B^T X*^{-1} B
  double a = 0.0;                // 2 tr(A)
  bool feasible = false;
  double gap = 0.0;              // final duality-gap estimate, bits
  double kkt_residual = 0.0;     // scaled stationarity residual
};

/// Minimum long-run mutual information rate of a Kalman-Bucy sensing
/// policy subject to tr(X) <= D, solved as a barrier method on
///   min (a + tr(B^T X^{-1} B)) / (2 ln 2)
///   s.t. A X + X A^T + B B^T >= 0, tr(X) <= D, X > 0.
/// D at or above the stationary trace bypasses the solver and returns
/// the analytic zero-rate solution.
CTInfoSolution solve_ct_info(const StateSpaceModel& model, double D,
                             const BarrierOptions& opts = {});

struct DTRateSolution {
  double value = 0.0;   // bits/sample
  Matrix P_star;        // posterior covariance at the optimum
  Matrix Pi_star;       // prediction covariance A_tau P* A_tau^T + B_tau B_tau^T
  bool feasible = false;
  double gap = 0.0;
  double kkt_residual = 0.0;
};

/// Sequential rate-distortion function of the tau-sampled source under
/// the weighted distortion tr(Q P) <= D_d, via the log-det barrier on
/// the (P, Pi) lift. epsilon > 0 tightens the prediction constraint to
/// P <= A_tau P A_tau^T + B_tau B_tau^T - epsilon I.
DTRateSolution solve_dt_rate(const DiscretizedModel& dmodel, double D_d,
                             const Matrix& Q, double epsilon = 0.0,
                             const BarrierOptions& opts = {});

/// Scalar closed form: log2(e) * max{0, A + B^2 / (2 D)}.
double scalar_ct_info(double A, double B, double D);

/// Scalar closed form: max{0, 0.5 log2(A_tau^2 + B_tau^2 / (D_d / Q_bar))}.
double scalar_dt_rate(const DiscretizedModel& dmodel, double D_d);

}  // namespace evtrack
