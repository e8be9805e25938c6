#pragma once

#include "evtrack/bounds.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace evtrack {

enum class Scheme { ab, diq, bounds_only };

struct ExperimentConfig {
  StateSpaceModel model;
  Scheme scheme = Scheme::bounds_only;
  std::vector<double> tau_grid;
  std::vector<double> Dc_grid;  // bounds / diq sweeps
  std::vector<double> d_grid;   // ab sweeps
  std::vector<std::uint64_t> seeds = {0};
};

struct SweepRow {
  std::string scheme;
  double tau = 0.0;
  std::optional<double> dc;
  std::optional<double> d;
  std::optional<double> rate_lb_ct;
  std::optional<double> rate_lb_dt;
  std::optional<double> rate_emp;
  std::optional<double> mse_emp;
  std::optional<double> critical_dc;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> flags;
};

/// One row per grid cell; infeasible cells are kept and flagged rather
/// than dropped. Rows come back in the canonical CSV order.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config);

/// header: scheme,tau,dc,d,rate_lb_ct,rate_lb_dt,rate_emp,mse_emp,critical_dc,seed,flags
/// Missing values are empty fields; flags joined with ';'. Rows are
/// sorted lexicographically by (scheme, tau, dc, d, seed), so identical
/// configs produce byte-identical files.
void emit_csv(const std::vector<SweepRow>& rows, std::ostream& out);

/// %.12g rendering used for every numeric CSV field.
std::string format_csv_number(double v);

}  // namespace evtrack
