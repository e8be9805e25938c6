#include "evtrack/abscheme.hpp"

#include "evtrack/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace evtrack {

double sample_sde_step(double x, const DiscretizedModel& dmodel,
                       double noise) {
  if (dmodel.dim() != 1) {
    throw std::invalid_argument("sample_sde_step: model is not scalar");
  }
  return dmodel.A_tau(0, 0) * x + dmodel.B_tau(0, 0) * noise;
}

EmpiricalPoint run_ab(const ABConfig& config) {
  if (!(config.A < 0.0)) throw std::invalid_argument("run_ab: A must be < 0");
  if (config.B == 0.0) throw std::invalid_argument("run_ab: B must be nonzero");
  if (!(config.d > 0.0)) throw std::invalid_argument("run_ab: d must be > 0");
  if (!(config.tau > 0.0)) throw std::invalid_argument("run_ab: tau must be > 0");
  if (config.horizon < 100.0 * config.tau) {
    throw std::invalid_argument("run_ab: horizon must be >= 100 tau");
  }

  Matrix A(1, 1), B(1, 1), S0(1, 1);
  A << config.A;
  B << config.B;
  S0 << 1.0;
  const StateSpaceModel model = make_model(A, B, S0);
  const DiscretizedModel dmodel = discretize(model, config.tau);
  const double q_bar = dmodel.Q_bar(0, 0);

  const long n_steps =
      static_cast<long>(std::llround(config.horizon / config.tau));
  CounterRng rng(config.seed, 0);

  double x = 0.0, xhat = 0.0;
  long n_events = 0;
  double mse_integral = 0.0;
  for (long k = 0; k < n_steps; ++k) {
    const double e_pre = x - xhat;
    if (std::abs(e_pre) >= config.d) {
      ++n_events;
      xhat += (e_pre > 0.0 ? config.d : -config.d);
    }
    const double e = x - xhat;
    mse_integral += q_bar * e * e + dmodel.b_bar;
    x = sample_sde_step(x, dmodel, rng.normal(static_cast<std::uint64_t>(k)));
    xhat = dmodel.A_tau(0, 0) * xhat;
  }
  const double T = n_steps * config.tau;

  EmpiricalPoint pt;
  pt.n_events = n_events;
  pt.n_steps = n_steps;
  pt.rate = n_events / T;
  const double p = static_cast<double>(n_events) / n_steps;
  pt.rate_stderr = std::sqrt(p * (1.0 - p) / n_steps) / config.tau;
  pt.mse = mse_integral / T;
  return pt;
}

std::vector<EmpiricalPoint> ab_sweep(double A, double B,
                                     const std::vector<double>& d_grid,
                                     const std::vector<double>& tau_grid,
                                     std::uint64_t seed) {
  if (d_grid.empty() || tau_grid.empty()) {
    throw std::invalid_argument("ab_sweep: empty grid");
  }
  std::vector<EmpiricalPoint> points;
  points.reserve(d_grid.size() * tau_grid.size());
  std::uint64_t run = 0;
  for (double d : d_grid) {
    for (double tau : tau_grid) {
      ABConfig cfg;
      cfg.A = A;
      cfg.B = B;
      cfg.d = d;
      cfg.tau = tau;
      cfg.horizon = 10000.0 * d * d;
      cfg.seed = CounterRng::mix(seed, run++, 0);
      points.push_back(run_ab(cfg));
    }
  }
  return points;
}

}  // namespace evtrack
