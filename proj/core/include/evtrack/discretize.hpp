#pragma once

#include "evtrack/matkernel.hpp"

namespace evtrack {

/// Continuous-time source dx = A x dt + B dw, x_0 ~ N(0, Sigma0).
/// A must be Hurwitz, B B^T and Sigma0 positive definite.
struct StateSpaceModel {
  Matrix A;
  Matrix B;
  Matrix Sigma0;

  int dim() const { return static_cast<int>(A.rows()); }
};

/// Validates invariants and throws std::invalid_argument naming the
/// offending field.
StateSpaceModel make_model(const Matrix& A, const Matrix& B,
                           const Matrix& Sigma0);

/// tau-sampled quantities: A_tau = e^{A tau}, B_tau the symmetric root of
/// the noise gramian, Q_bar the interval weighting matrix, b_bar the
/// within-interval noise distortion floor.
struct DiscretizedModel {
  double tau = 0.0;
  Matrix A_tau;
  Matrix B_tau;
  Matrix Q_bar;
  double b_bar = 0.0;

  int dim() const { return static_cast<int>(A_tau.rows()); }
};

DiscretizedModel discretize(const StateSpaceModel& model, double tau);

struct DtDistortion {
  double value = 0.0;  // D_c * tau - b_bar; may be negative
  bool feasible = false;
};

/// Converts a continuous-time MSE budget into the per-sample weighted
/// budget. A non-positive result is returned flagged rather than thrown
/// so sweeps can record the critical-distortion asymptote.
DtDistortion ct_to_dt_distortion(const DiscretizedModel& dmodel, double Dc);

/// Trace of the stationary covariance (Lyapunov solution). Distortion
/// targets at or above this are achievable with no communication.
double stationary_trace(const StateSpaceModel& model);

/// Exact integral of continuous-time MSE over one sampling interval when
/// the sample-time error covariance is err_cov:
/// tr(Q_bar err_cov) + b_bar.
double interval_mse(const DiscretizedModel& dmodel, const Matrix& err_cov);

}  // namespace evtrack
