#include "evtrack/matkernel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

namespace evtrack {

namespace {

void require_finite(const Matrix& M, const char* what) {
  if (!M.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

}  // namespace

bool is_symmetric(const Matrix& M, double tol) {
  if (M.rows() != M.cols()) return false;
  const double dev = (M - M.transpose()).cwiseAbs().maxCoeff();
  return dev <= tol * (1.0 + M.cwiseAbs().maxCoeff());
}

double max_real_eigenvalue(const Matrix& A) {
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Matrix& A, double margin) {
  return max_real_eigenvalue(A) <= -margin;
}

Matrix matrix_exp(const Matrix& M, double t) {
  require_finite(M, "matrix_exp");
  if (t < 0.0 || !std::isfinite(t)) {
    throw std::invalid_argument("matrix_exp: t must be finite and >= 0");
  }
  if (t == 0.0) return Matrix::Identity(M.rows(), M.cols());
  return (M * t).exp();
}

Matrix gramian_integral(const Matrix& A, const Matrix& B, double t) {
  require_finite(A, "gramian_integral");
  require_finite(B, "gramian_integral");
  if (t < 0.0) throw std::invalid_argument("gramian_integral: t < 0");
  const Eigen::Index n = A.rows();
  if (t == 0.0) return Matrix::Zero(n, n);
  const Matrix W = B * B.transpose();
  // exp([[-A, W], [0, A^T]] t); the integral is F22^T F12.
  Matrix H = Matrix::Zero(2 * n, 2 * n);
  H.topLeftCorner(n, n) = -A;
  H.topRightCorner(n, n) = W;
  H.bottomRightCorner(n, n) = A.transpose();
  const Matrix F = (H * t).exp();
  return symmetrize(F.bottomRightCorner(n, n).transpose() *
                    F.topRightCorner(n, n));
}

Matrix weighted_gram_integral(const Matrix& A, double t) {
  require_finite(A, "weighted_gram_integral");
  if (t <= 0.0) throw std::invalid_argument("weighted_gram_integral: t <= 0");
  const Eigen::Index n = A.rows();
  Matrix H = Matrix::Zero(2 * n, 2 * n);
  H.topLeftCorner(n, n) = -A.transpose();
  H.topRightCorner(n, n) = Matrix::Identity(n, n);
  H.bottomRightCorner(n, n) = A;
  const Matrix F = (H * t).exp();
  return symmetrize(F.bottomRightCorner(n, n).transpose() *
                    F.topRightCorner(n, n));
}

double nested_gramian_trace(const Matrix& A, const Matrix& B, double t) {
  require_finite(A, "nested_gramian_trace");
  require_finite(B, "nested_gramian_trace");
  if (t < 0.0) throw std::invalid_argument("nested_gramian_trace: t < 0");
  if (t == 0.0) return 0.0;
  const Eigen::Index n = A.rows();
  const Matrix W = B * B.transpose();
  // exp([[-A, W, 0], [0, A^T, I], [0, 0, A^T]] t) gives, after a left
  // multiply by e^{A t}, both G(t) = int e^{As} W e^{A^T s} ds (block 1,2)
  // and J(t) = int s e^{As} W e^{A^T s} ds (block 1,3). The double
  // integral is t G(t) - J(t).
  Matrix H = Matrix::Zero(3 * n, 3 * n);
  H.block(0, 0, n, n) = -A;
  H.block(0, n, n, n) = W;
  H.block(n, n, n, n) = A.transpose();
  H.block(n, 2 * n, n, n) = Matrix::Identity(n, n);
  H.block(2 * n, 2 * n, n, n) = A.transpose();
  const Matrix F = (H * t).exp();
  const Matrix eAt = (A * t).exp();
  const Matrix G = eAt * F.block(0, n, n, n);
  const Matrix J = eAt * F.block(0, 2 * n, n, n);
  return (t * G - J).trace();
}

Matrix lyapunov_solve(const Matrix& A, const Matrix& Q) {
  require_finite(A, "lyapunov_solve");
  require_finite(Q, "lyapunov_solve");
  if (!is_hurwitz(A)) {
    throw std::invalid_argument("lyapunov_solve: A is not Hurwitz (max Re eig = " +
                                std::to_string(max_real_eigenvalue(A)) + ")");
  }
  const Eigen::Index n = A.rows();
  // vec(A X + X A^T) = (I (x) A + A (x) I) vec(X)
  Matrix K = Matrix::Zero(n * n, n * n);
  const Matrix I = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) += I(i, j) * A;
      K.block(i * n, j * n, n, n) += A(i, j) * I;
    }
  }
  Eigen::VectorXd q(Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n));
  Eigen::VectorXd x = K.partialPivLu().solve(-q);
  Matrix X(Eigen::Map<Matrix>(x.data(), n, n));
  return symmetrize(X);
}

Matrix psd_sqrt(const Matrix& M, double tol) {
  require_finite(M, "psd_sqrt");
  const Matrix Ms = symmetrize(M);
  Eigen::SelfAdjointEigenSolver<Matrix> es(Ms);
  const double scale = Ms.norm();
  Eigen::VectorXd lam = es.eigenvalues();
  if (scale > 0.0 && lam.minCoeff() < -tol * scale) {
    throw std::invalid_argument("psd_sqrt: matrix is not PSD (min eig = " +
                                std::to_string(lam.minCoeff()) + ")");
  }
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    lam(i) = std::sqrt(std::max(lam(i), 0.0));
  }
  return symmetrize(es.eigenvectors() * lam.asDiagonal() *
                    es.eigenvectors().transpose());
}

OdeTrajectory integrate_ode(const MatrixRhs& f, const Matrix& X0,
                            double horizon, double step) {
  if (step <= 0.0) throw std::invalid_argument("integrate_ode: step <= 0");
  if (horizon < step) throw std::invalid_argument("integrate_ode: horizon < step");
  const long n_steps = static_cast<long>(std::llround(horizon / step));
  OdeTrajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  Matrix X = symmetrize(X0);
  double t = 0.0;
  traj.times.push_back(t);
  traj.states.push_back(X);
  for (long k = 0; k < n_steps; ++k) {
    const Matrix k1 = f(t, X);
    const Matrix k2 = f(t + 0.5 * step, X + 0.5 * step * k1);
    const Matrix k3 = f(t + 0.5 * step, X + 0.5 * step * k2);
    const Matrix k4 = f(t + step, X + step * k3);
    X = symmetrize(X + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    t = (k + 1) * step;
    if (!X.allFinite()) {
      throw std::runtime_error("integrate_ode: divergence at t = " +
                               std::to_string(t));
    }
    traj.times.push_back(t);
    traj.states.push_back(X);
  }
  return traj;
}

}  // namespace evtrack
