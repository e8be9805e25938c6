#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

namespace evtrack {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetry check against ||M - M^T||_max <= tol * (1 + ||M||_max).
bool is_symmetric(const Matrix& M, double tol = 1e-12);

inline Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

double max_real_eigenvalue(const Matrix& A);

/// Strict Hurwitz stability: every eigenvalue has real part <= -margin.
bool is_hurwitz(const Matrix& A, double margin = 1e-12);

/// e^{M t} via scaling-and-squaring with a Pade rational core.
Matrix matrix_exp(const Matrix& M, double t);

/// int_0^t e^{A s} B B^T e^{A^T s} ds, computed from a single augmented
/// block exponential. PSD by construction.
Matrix gramian_integral(const Matrix& A, const Matrix& B, double t);

/// int_0^t e^{A^T s} e^{A s} ds; positive definite for t > 0.
Matrix weighted_gram_integral(const Matrix& A, double t);

/// tr( int_0^t int_0^s e^{A u} B B^T e^{A^T u} du ds ), one nested
/// block-triangular exponential.
double nested_gramian_trace(const Matrix& A, const Matrix& B, double t);

/// Unique X with A X + X A^T + Q = 0. Requires A Hurwitz.
Matrix lyapunov_solve(const Matrix& A, const Matrix& Q);

/// Symmetric S with S S = M for PSD M. Eigenvalues below
/// -tol * ||M||_F are rejected; small negatives are clamped to zero.
Matrix psd_sqrt(const Matrix& M, double tol = 1e-8);

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<Matrix> states;
};

using MatrixRhs = std::function<Matrix(double, const Matrix&)>;

/// Classical fourth-order fixed-step integration of a symmetric
/// matrix ODE. The state is symmetrized after every step. Throws on a
/// non-finite state, reporting the divergence time.
OdeTrajectory integrate_ode(const MatrixRhs& f, const Matrix& X0,
                            double horizon, double step);

}  // namespace evtrack
