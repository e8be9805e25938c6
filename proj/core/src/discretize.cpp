#include "evtrack/discretize.hpp"

#include <stdexcept>
#include <string>

namespace evtrack {

StateSpaceModel make_model(const Matrix& A, const Matrix& B,
                           const Matrix& Sigma0) {
  if (A.rows() < 1 || A.rows() != A.cols()) {
    throw std::invalid_argument("model.A: must be square with dim >= 1");
  }
  if (B.rows() != A.rows() || B.cols() != A.cols()) {
    throw std::invalid_argument("model.B: dimension mismatch with A");
  }
  if (Sigma0.rows() != A.rows() || Sigma0.cols() != A.cols()) {
    throw std::invalid_argument("model.Sigma0: dimension mismatch with A");
  }
  if (!A.allFinite() || !B.allFinite() || !Sigma0.allFinite()) {
    throw std::invalid_argument("model: non-finite entries");
  }
  if (!is_hurwitz(A)) {
    throw std::invalid_argument(
        "model.A: not Hurwitz (max Re eig = " +
        std::to_string(max_real_eigenvalue(A)) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> bb(symmetrize(B * B.transpose()));
  if (bb.eigenvalues().minCoeff() <= 1e-10) {
    throw std::invalid_argument("model.B: B B^T must be positive definite");
  }
  if (!is_symmetric(Sigma0, 1e-9)) {
    throw std::invalid_argument("model.Sigma0: not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> s0(symmetrize(Sigma0));
  if (s0.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("model.Sigma0: must be positive definite");
  }
  return StateSpaceModel{A, B, symmetrize(Sigma0)};
}

DiscretizedModel discretize(const StateSpaceModel& model, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("discretize: tau <= 0");
  DiscretizedModel d;
  d.tau = tau;
  d.A_tau = matrix_exp(model.A, tau);
  d.B_tau = psd_sqrt(gramian_integral(model.A, model.B, tau));
  d.Q_bar = weighted_gram_integral(model.A, tau);
  d.b_bar = nested_gramian_trace(model.A, model.B, tau);
  return d;
}

DtDistortion ct_to_dt_distortion(const DiscretizedModel& dmodel, double Dc) {
  if (Dc <= 0.0) throw std::invalid_argument("ct_to_dt_distortion: Dc <= 0");
  const double v = Dc * dmodel.tau - dmodel.b_bar;
  return DtDistortion{v, v > 0.0};
}

double stationary_trace(const StateSpaceModel& model) {
  return lyapunov_solve(model.A, model.B * model.B.transpose()).trace();
}

double interval_mse(const DiscretizedModel& dmodel, const Matrix& err_cov) {
  return (dmodel.Q_bar * err_cov).trace() + dmodel.b_bar;
}

}  // namespace evtrack
