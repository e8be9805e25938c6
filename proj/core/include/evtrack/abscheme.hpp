#pragma once

#include "evtrack/discretize.hpp"

#include <cstdint>
#include <vector>

namespace evtrack {

/// Scalar one-bit threshold encoder: emit a single bit whenever the
/// estimation error magnitude reaches d, silence otherwise.
struct ABConfig {
  double A = 0.0;  // must be < 0
  double B = 0.0;
  double d = 0.0;        // trigger threshold, > 0
  double tau = 0.0;      // sampling interval
  double horizon = 0.0;  // seconds, >= 100 tau
  std::uint64_t seed = 0;
};

struct EmpiricalPoint {
  double rate = 0.0;         // bits/second
  double rate_stderr = 0.0;  // binomial standard error of rate
  double mse = 0.0;          // time-average continuous-time MSE
  long n_events = 0;
  long n_steps = 0;
};

/// One exact-distribution transition of the sampled scalar diffusion.
double sample_sde_step(double x, const DiscretizedModel& dmodel,
                       double noise);

EmpiricalPoint run_ab(const ABConfig& config);

/// One point per (d, tau); horizon = 10000 d^2 seconds per run.
std::vector<EmpiricalPoint> ab_sweep(double A, double B,
                                     const std::vector<double>& d_grid,
                                     const std::vector<double>& tau_grid,
                                     std::uint64_t seed);

}  // namespace evtrack
