#include "evtrack/rdsolver.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace evtrack {

namespace {

constexpr double kLog2E = 1.4426950408889634;
constexpr double kLn2 = 0.6931471805599453;

// Basis of symmetric n x n matrices: E_ii = e_i e_i^T, then
// E_ij = e_i e_j^T + e_j e_i^T for i < j.
std::vector<Matrix> sym_basis(int n) {
  std::vector<Matrix> basis;
  basis.reserve(n * (n + 1) / 2);
  for (int i = 0; i < n; ++i) {
    Matrix E = Matrix::Zero(n, n);
    E(i, i) = 1.0;
    basis.push_back(E);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Matrix E = Matrix::Zero(n, n);
      E(i, j) = 1.0;
      E(j, i) = 1.0;
      basis.push_back(E);
    }
  }
  return basis;
}

Matrix from_coords(const std::vector<Matrix>& basis, const Eigen::VectorXd& x,
                   int offset, int n) {
  Matrix M = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    M += x(offset + static_cast<int>(k)) * basis[k];
  }
  return M;
}

// log det of a PD matrix via Cholesky; returns false if not strictly PD.
bool logdet_pd(const Matrix& M, double& out) {
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) return false;
  const auto& L = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const double d = L(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    s += std::log(d);
  }
  out = 2.0 * s;
  return true;
}

bool is_pd(const Matrix& M) {
  double dummy;
  return logdet_pd(M, dummy);
}

// Solves H d = -g, adding a diagonal ridge until the factorization
// succeeds and d is a descent direction.
Eigen::VectorXd newton_direction(Matrix H, const Eigen::VectorXd& g) {
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  double ridge = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Matrix Hr = H;
    if (ridge > 0.0) {
      Hr += ridge * Matrix::Identity(H.rows(), H.cols());
    }
    Eigen::LDLT<Matrix> ldlt(Hr);
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd d = ldlt.solve(-g);
      if (d.allFinite() && g.dot(d) < 0.0) return d;
    }
    ridge = (ridge == 0.0) ? 1e-12 * scale : 10.0 * ridge;
  }
  return -g;  // gradient fallback
}

}  // namespace

// ---------------------------------------------------------------------------
// Continuous-time information rate
// ---------------------------------------------------------------------------

namespace {

struct CtProblem {
  Matrix A;
  Matrix W;  // B B^T
  double D;
  std::vector<Matrix> basis;
  int n = 0;
  int m = 0;

  bool eval(const Eigen::VectorXd& x, double t, double& phi) const {
    const Matrix X = from_coords(basis, x, 0, n);
    Eigen::LLT<Matrix> lltX(X);
    if (lltX.info() != Eigen::Success) return false;
    const Matrix Xinv = lltX.solve(Matrix::Identity(n, n));
    const Matrix S = symmetrize(A * X + X * A.transpose() + W);
    double ldS;
    if (!logdet_pd(S, ldS)) return false;
    const double slack = D - X.trace();
    if (!(slack > 0.0)) return false;
    phi = t * (W * Xinv).trace() - ldS - std::log(slack);
    return std::isfinite(phi);
  }

  void derivatives(const Eigen::VectorXd& x, double t, Eigen::VectorXd& g,
                   Matrix& H) const {
    const Matrix X = from_coords(basis, x, 0, n);
    const Matrix Xinv = X.llt().solve(Matrix::Identity(n, n));
    const Matrix S = symmetrize(A * X + X * A.transpose() + W);
    const Matrix Sinv = S.llt().solve(Matrix::Identity(n, n));
    const double slack = D - X.trace();
    const Matrix XWX = Xinv * W * Xinv;

    std::vector<Matrix> T(m), G(m);
    for (int k = 0; k < m; ++k) {
      T[k] = Xinv * basis[k] * Xinv;
      const Matrix dS = A * basis[k] + basis[k] * A.transpose();
      G[k] = Sinv * dS;
    }
    g.resize(m);
    H.resize(m, m);
    for (int k = 0; k < m; ++k) {
      g(k) = -t * (XWX * basis[k]).trace() - G[k].trace() +
             basis[k].trace() / slack;
    }
    for (int k = 0; k < m; ++k) {
      const Matrix Rk = Xinv * W * T[k];
      for (int l = k; l < m; ++l) {
        double h = 2.0 * t * (Rk * basis[l]).trace();
        h += (G[k] * G[l]).trace();
        h += basis[k].trace() * basis[l].trace() / (slack * slack);
        H(k, l) = h;
        H(l, k) = h;
      }
    }
  }
};

}  // namespace

CTInfoSolution solve_ct_info(const StateSpaceModel& model, double D,
                             const BarrierOptions& opts) {
  if (D <= 0.0) {
    throw std::invalid_argument("solve_ct_info: distortion budget D <= 0");
  }
  const int n = model.dim();
  const Matrix W = symmetrize(model.B * model.B.transpose());
  const double a = 2.0 * model.A.trace();
  const Matrix X_lyap = lyapunov_solve(model.A, W);

  CTInfoSolution sol;
  sol.a = a;

  auto fill_value = [&](const Matrix& X) {
    const Matrix Xinv = X.llt().solve(Matrix::Identity(n, n));
    sol.X_star = symmetrize(X);
    sol.Y_star = symmetrize(model.B.transpose() * Xinv * model.B);
    sol.value_unclamped = (a + sol.Y_star.trace()) / (2.0 * kLn2);
    sol.value = std::max(0.0, sol.value_unclamped);
  };

  if (D >= X_lyap.trace()) {
    // The stationary covariance is feasible and achieves zero rate.
    fill_value(X_lyap);
    sol.value = 0.0;
    sol.feasible = true;
    sol.gap = 0.0;
    sol.kkt_residual = 0.0;
    return sol;
  }

  CtProblem prob{model.A, W, D, sym_basis(n), n, n * (n + 1) / 2};

  // X = alpha X_lyap is strictly feasible: the drift residual there is
  // (1 - alpha) B B^T > 0 and the trace constraint holds by choice of alpha.
  const double alpha = std::min(0.99, 0.99 * D / X_lyap.trace());
  Matrix X0 = alpha * X_lyap;
  Eigen::VectorXd x(prob.m);
  {
    int k = 0;
    for (int i = 0; i < n; ++i) x(k++) = X0(i, i);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) x(k++) = X0(i, j);
    }
  }

  const double nu = n + 1;  // barrier degree: drift LMI + trace
  double t = opts.t_init;
  double gap_bits = std::numeric_limits<double>::infinity();
  bool converged = false;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    // Newton centering at the current t.
    for (int inner = 0; inner < opts.max_inner; ++inner) {
      Eigen::VectorXd g;
      Matrix H;
      prob.derivatives(x, t, g, H);
      const Eigen::VectorXd d = newton_direction(H, g);
      const double decrement2 = -g.dot(d);
      if (0.5 * decrement2 <= opts.newton_tol) break;
      double phi0;
      if (!prob.eval(x, t, phi0)) {
        throw SolverError("solve_ct_info: iterate left the domain", gap_bits);
      }
      double step = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        double phi1;
        const Eigen::VectorXd x1 = x + step * d;
        if (prob.eval(x1, t, phi1) &&
            phi1 <= phi0 + 1e-4 * step * g.dot(d)) {
          x = x1;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;  // stalled; recenter at larger t
    }

    const Matrix X = from_coords(prob.basis, x, 0, n);
    fill_value(X);
    gap_bits = nu / (t * 2.0 * kLn2);
    if (gap_bits / (1.0 + std::abs(sol.value)) <= opts.gap_tol) {
      Eigen::VectorXd g;
      Matrix H;
      prob.derivatives(x, t, g, H);
      sol.kkt_residual = g.norm() / (t * (1.0 + std::abs(sol.value)));
      sol.gap = gap_bits;
      sol.feasible = true;
      converged = true;
      break;
    }
    t *= opts.t_growth;
  }
  if (!converged) {
    throw SolverError("solve_ct_info: outer iteration cap reached", gap_bits);
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Discrete-time sequential rate-distortion
// ---------------------------------------------------------------------------

namespace {

struct DtProblem {
  Matrix A;   // A_tau
  Matrix W;   // B_tau B_tau^T
  Matrix Q;
  double D = 0.0;
  double epsilon = 0.0;
  std::vector<Matrix> basis;
  int n = 0;
  int m = 0;  // coords per matrix; total 2m (P then Pi)

  Matrix z2(const Matrix& P) const {
    return symmetrize(A * P * A.transpose() + W - P) -
           epsilon * Matrix::Identity(n, n);
  }

  Matrix z3(const Matrix& P, const Matrix& Pi) const {
    Matrix Z = Matrix::Zero(2 * n, 2 * n);
    Z.topLeftCorner(n, n) = P - Pi;
    Z.topRightCorner(n, n) = P * A.transpose();
    Z.bottomLeftCorner(n, n) = A * P;
    Z.bottomRightCorner(n, n) = A * P * A.transpose() + W;
    return symmetrize(Z);
  }

  bool eval(const Eigen::VectorXd& x, double t, double& phi) const {
    const Matrix P = from_coords(basis, x, 0, n);
    const Matrix Pi = from_coords(basis, x, m, n);
    double ldPi, ld2, ld3;
    if (!logdet_pd(Pi, ldPi)) return false;
    if (!logdet_pd(z2(P), ld2)) return false;
    if (!logdet_pd(z3(P, Pi), ld3)) return false;
    const double slack = D - (Q * P).trace();
    if (!(slack > 0.0)) return false;
    phi = -0.5 * t * ldPi - std::log(slack) - ld2 - ld3;
    return std::isfinite(phi);
  }

  void derivatives(const Eigen::VectorXd& x, double t, Eigen::VectorXd& g,
                   Matrix& H) const {
    const Matrix P = from_coords(basis, x, 0, n);
    const Matrix Pi = from_coords(basis, x, m, n);
    const Matrix Z2 = z2(P);
    const Matrix Z3 = z3(P, Pi);
    const Matrix Piinv = Pi.llt().solve(Matrix::Identity(n, n));
    const Matrix Z2inv = Z2.llt().solve(Matrix::Identity(n, n));
    const Matrix Z3inv = Z3.llt().solve(Matrix::Identity(2 * n, 2 * n));
    const double slack = D - (Q * P).trace();

    const int dim = 2 * m;
    // Per-coordinate constraint differentials, premultiplied by the
    // corresponding inverse; Hessian entries are then plain trace products.
    std::vector<Matrix> GPi(dim), G2(dim), G3(dim);
    Eigen::VectorXd dq = Eigen::VectorXd::Zero(dim);
    for (int k = 0; k < dim; ++k) {
      Matrix dPi = Matrix::Zero(n, n);
      Matrix dZ2 = Matrix::Zero(n, n);
      Matrix dZ3 = Matrix::Zero(2 * n, 2 * n);
      if (k < m) {
        const Matrix& U = basis[k];
        dZ2 = A * U * A.transpose() - U;
        dZ3.topLeftCorner(n, n) = U;
        dZ3.topRightCorner(n, n) = U * A.transpose();
        dZ3.bottomLeftCorner(n, n) = A * U;
        dZ3.bottomRightCorner(n, n) = A * U * A.transpose();
        dq(k) = (Q * U).trace();
      } else {
        const Matrix& V = basis[k - m];
        dPi = V;
        dZ3.topLeftCorner(n, n) = -V;
      }
      GPi[k] = Piinv * dPi;
      G2[k] = Z2inv * dZ2;
      G3[k] = Z3inv * dZ3;
    }
    g.resize(dim);
    H.resize(dim, dim);
    for (int k = 0; k < dim; ++k) {
      g(k) = -0.5 * t * GPi[k].trace() - G2[k].trace() - G3[k].trace() +
             dq(k) / slack;
    }
    for (int k = 0; k < dim; ++k) {
      for (int l = k; l < dim; ++l) {
        double h = 0.5 * t * (GPi[k] * GPi[l]).trace();
        h += (G2[k] * G2[l]).trace();
        h += (G3[k] * G3[l]).trace();
        h += dq(k) * dq(l) / (slack * slack);
        H(k, l) = h;
        H(l, k) = h;
      }
    }
  }
};

void pack_coords(const std::vector<Matrix>& basis, const Matrix& M, int offset,
                 Eigen::VectorXd& x) {
  const int n = static_cast<int>(M.rows());
  int k = offset;
  for (int i = 0; i < n; ++i) x(k++) = M(i, i);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) x(k++) = M(i, j);
  }
}

// Half of the one-step-prediction Schur complement; with this choice of
// Pi the coupling LMI holds with strict margin.
Matrix half_schur(const Matrix& A, const Matrix& W, const Matrix& P) {
  const int n = static_cast<int>(P.rows());
  const Matrix M = symmetrize(A * P * A.transpose() + W);
  const Matrix Minv = M.llt().solve(Matrix::Identity(n, n));
  return symmetrize(
      0.5 * (P - P * A.transpose() * Minv * A * P));
}

}  // namespace

DTRateSolution solve_dt_rate(const DiscretizedModel& dmodel, double D_d,
                             const Matrix& Q, double epsilon,
                             const BarrierOptions& opts) {
  if (D_d <= 0.0) {
    throw std::invalid_argument("solve_dt_rate: distortion budget D_d <= 0");
  }
  const int n = dmodel.dim();
  if (Q.rows() != n || Q.cols() != n) {
    throw std::invalid_argument("solve_dt_rate: Q dimension mismatch");
  }
  if (epsilon < 0.0) {
    throw std::invalid_argument("solve_dt_rate: epsilon < 0");
  }
  const Matrix& A = dmodel.A_tau;
  const Matrix W = symmetrize(dmodel.B_tau * dmodel.B_tau.transpose());

  DTRateSolution sol;
  auto fill_value = [&](const Matrix& P) {
    sol.P_star = symmetrize(P);
    sol.Pi_star = symmetrize(A * P * A.transpose() + W);
    double ldP, ldPi;
    if (!logdet_pd(sol.P_star, ldP) || !logdet_pd(sol.Pi_star, ldPi)) {
      throw SolverError("solve_dt_rate: degenerate optimum", sol.gap);
    }
    sol.value = std::max(0.0, 0.5 * kLog2E * (ldPi - ldP));
  };

  {
    // The stationary covariance of the sampled chain is a fixed point of
    // the prediction map, so above its weighted trace the rate is exactly
    // zero (only valid for the unperturbed constraint).
    // Solve P = A P A^T + W by Kronecker elimination.
    Matrix K = Matrix::Identity(n * n, n * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        K.block(i * n, j * n, n, n) -= A(i, j) * A;
      }
    }
    Eigen::VectorXd w(Eigen::Map<const Eigen::VectorXd>(W.data(), n * n));
    Eigen::VectorXd p = K.partialPivLu().solve(w);
    const Matrix P_stat =
        symmetrize(Matrix(Eigen::Map<Matrix>(p.data(), n, n)));
    if (epsilon == 0.0 && (Q * P_stat).trace() <= D_d) {
      fill_value(P_stat);
      sol.value = 0.0;
      sol.feasible = true;
      sol.gap = 0.0;
      sol.kkt_residual = 0.0;
      return sol;
    }
  }

  DtProblem prob{A, W, Q, D_d, epsilon, sym_basis(n), n, n * (n + 1) / 2};

  // Strictly feasible start: the half-relaxation fixed point
  // P = (A P A^T + W) / 2 keeps the prediction constraint slack PD;
  // scale down to respect the distortion budget, with a shrinking
  // multiple of the identity as fallback.
  Matrix P0;
  {
    Matrix K = Matrix::Identity(n * n, n * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        K.block(i * n, j * n, n, n) -= 0.5 * A(i, j) * A;
      }
    }
    Eigen::VectorXd w(Eigen::Map<const Eigen::VectorXd>(W.data(), n * n));
    Eigen::VectorXd p = K.partialPivLu().solve(0.5 * w);
    P0 = symmetrize(Matrix(Eigen::Map<Matrix>(p.data(), n, n)));
    const double tq = (Q * P0).trace();
    if (tq > 0.0) P0 *= std::min(1.0, 0.99 * D_d / tq);
  }
  auto feasible_start = [&](const Matrix& P) {
    return is_pd(P) && is_pd(prob.z2(P)) &&
           (Q * P).trace() < D_d &&
           is_pd(prob.z3(P, half_schur(A, W, P)));
  };
  if (!feasible_start(P0)) {
    const double qtr = std::max(Q.trace(), 1e-300);
    bool found = false;
    double delta = 0.99 * D_d / qtr;
    for (int k = 0; k < 60 && !found; ++k) {
      P0 = delta * Matrix::Identity(n, n);
      found = feasible_start(P0);
      delta *= 0.5;
    }
    if (!found) {
      throw SolverError("solve_dt_rate: no strictly feasible start found",
                        std::numeric_limits<double>::infinity());
    }
  }
  Eigen::VectorXd x(2 * prob.m);
  pack_coords(prob.basis, P0, 0, x);
  pack_coords(prob.basis, half_schur(A, W, P0), prob.m, x);

  const double nu = 3.0 * n + 1.0;  // coupling LMI (2n) + slack LMI (n) + trace
  double t = opts.t_init;
  double gap_bits = std::numeric_limits<double>::infinity();
  bool converged = false;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    for (int inner = 0; inner < opts.max_inner; ++inner) {
      Eigen::VectorXd g;
      Matrix H;
      prob.derivatives(x, t, g, H);
      const Eigen::VectorXd d = newton_direction(H, g);
      const double decrement2 = -g.dot(d);
      if (0.5 * decrement2 <= opts.newton_tol) break;
      double phi0;
      if (!prob.eval(x, t, phi0)) {
        throw SolverError("solve_dt_rate: iterate left the domain", gap_bits);
      }
      double step = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        double phi1;
        const Eigen::VectorXd x1 = x + step * d;
        if (prob.eval(x1, t, phi1) &&
            phi1 <= phi0 + 1e-4 * step * g.dot(d)) {
          x = x1;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }

    const Matrix P = from_coords(prob.basis, x, 0, n);
    fill_value(P);
    gap_bits = nu / (t * kLn2);
    if (gap_bits / (1.0 + std::abs(sol.value)) <= opts.gap_tol) {
      Eigen::VectorXd g;
      Matrix H;
      prob.derivatives(x, t, g, H);
      sol.kkt_residual = g.norm() / (t * (1.0 + std::abs(sol.value)));
      sol.gap = gap_bits;
      sol.feasible = true;
      converged = true;
      break;
    }
    t *= opts.t_growth;
  }
  if (!converged) {
    throw SolverError("solve_dt_rate: outer iteration cap reached", gap_bits);
  }
  return sol;
}

double scalar_ct_info(double A, double B, double D) {
  if (D <= 0.0) {
    throw std::invalid_argument("scalar_ct_info: distortion budget D <= 0");
  }
  return std::max(0.0, kLog2E * (A + B * B / (2.0 * D)));
}

double scalar_dt_rate(const DiscretizedModel& dmodel, double D_d) {
  if (dmodel.dim() != 1) {
    throw std::invalid_argument("scalar_dt_rate: model is not scalar");
  }
  if (D_d <= 0.0) {
    throw std::invalid_argument("scalar_dt_rate: distortion budget D_d <= 0");
  }
  const double a = dmodel.A_tau(0, 0);
  const double w = dmodel.B_tau(0, 0) * dmodel.B_tau(0, 0);
  const double P = D_d / dmodel.Q_bar(0, 0);
  return std::max(0.0, 0.5 * std::log2(a * a + w / P));
}

}  // namespace evtrack
