// Command-line front end: point queries for the bounds and solvers plus
// simulation sweeps emitting the plotting CSV.
//
// Exit codes: 0 ok, 1 solver failure, 2 config/usage error, 3 infeasible
// request (distortion below the sampling floor or non-positive budget).

#include "evtrack/abscheme.hpp"
#include "evtrack/bounds.hpp"
#include "evtrack/ctsensor.hpp"
#include "evtrack/diqcodec.hpp"
#include "evtrack/modelio.hpp"
#include "evtrack/sweep.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

evtrack::StateSpaceModel load_or_throw(const std::string& path) {
  if (path.empty()) {
    throw evtrack::ConfigError("--model is required");
  }
  return evtrack::load_model(path);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) {
    throw Infeasible(std::string(what) + " must be > 0");
  }
}

void print_value(double v) { std::printf("%.6f\n", v); }

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw evtrack::ConfigError(path + ": cannot open for writing");
  return f;
}

int run(int argc, char** argv) {
  CLI::App app{"bitrate lower bounds and event-based encoder simulations "
               "for Gauss-Markov tracking"};
  app.require_subcommand(1);

  std::string model_path, out_path, trace_path, scheme = "bounds";
  double tau = 1.0, dc = 0.0, d = 0.0, horizon = 0.0, eps = 1e-3,
         delta = 1e-3;
  std::uint64_t seed = 0;
  std::vector<double> tau_grid, dc_grid, d_grid;
  std::vector<std::uint64_t> seeds;

  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--model", model_path, "model config file")->required();
  };

  auto* c_ic = app.add_subcommand("ic", "continuous-time information rate");
  add_model(c_ic);
  c_ic->add_option("--dc", dc, "CT distortion budget")->required();

  auto* c_rdt = app.add_subcommand("rdt", "sampled rate per sample");
  add_model(c_rdt);
  c_rdt->add_option("--dc", dc)->required();
  c_rdt->add_option("--tau", tau)->required();

  auto* c_bct = app.add_subcommand("bound-ct", "CT bitrate lower bound");
  add_model(c_bct);
  c_bct->add_option("--dc", dc)->required();
  c_bct->add_option("--tau", tau)->required();

  auto* c_bdt = app.add_subcommand("bound-dt", "sampled bitrate lower bound");
  add_model(c_bdt);
  c_bdt->add_option("--dc", dc)->required();
  c_bdt->add_option("--tau", tau)->required();

  auto* c_ab = app.add_subcommand("sim-ab", "one-bit threshold simulation");
  add_model(c_ab);
  c_ab->add_option("--d", d, "trigger threshold")->required();
  c_ab->add_option("--tau", tau)->required();
  c_ab->add_option("--horizon", horizon, "seconds; default 10000 d^2");
  c_ab->add_option("--seed", seed);

  auto* c_diq = app.add_subcommand("sim-diq", "dithered codec simulation");
  add_model(c_diq);
  c_diq->add_option("--dc", dc)->required();
  c_diq->add_option("--tau", tau)->required();
  c_diq->add_option("--horizon", horizon, "seconds; default 10000 samples");
  c_diq->add_option("--seed", seed);
  c_diq->add_option("--trace", trace_path, "per-step trace dump path");

  auto* c_vs = app.add_subcommand("verify-sensor",
                                  "time-invariant sensor Riccati check");
  add_model(c_vs);
  c_vs->add_option("--dc", dc)->required();
  c_vs->add_option("--horizon", horizon, "seconds; default 50/|max Re eig|");
  c_vs->add_option("--eps", eps, "perturbation for the periodic policy");
  c_vs->add_option("--delta", delta, "ramp width (unused here)");

  auto* c_vac = app.add_subcommand("vacuity", "small-tau bound collapse table");
  add_model(c_vac);
  c_vac->add_option("--dc", dc)->required();
  c_vac->add_option("--tau", tau_grid, "tau grid (default decades 1e-1..1e-6)");

  auto* c_sweep = app.add_subcommand("sweep", "grid run emitting CSV");
  add_model(c_sweep);
  c_sweep->add_option("--scheme", scheme)
      ->check(CLI::IsMember({"ab", "diq", "bounds"}));
  c_sweep->add_option("--tau", tau_grid, "tau grid")->required();
  c_sweep->add_option("--dc", dc_grid, "Dc grid (bounds/diq)");
  c_sweep->add_option("--d", d_grid, "threshold grid (ab)");
  c_sweep->add_option("--seed", seeds, "seed list");
  c_sweep->add_option("--out", out_path, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  if (c_ic->parsed()) {
    const auto model = load_or_throw(model_path);
    require_positive(dc, "--dc");
    print_value(evtrack::solve_ct_info(model, dc).value);
    return kExitOk;
  }
  if (c_rdt->parsed() || c_bct->parsed() || c_bdt->parsed()) {
    const auto model = load_or_throw(model_path);
    require_positive(dc, "--dc");
    require_positive(tau, "--tau");
    if (c_bct->parsed()) {
      print_value(evtrack::ct_lower_bound(model, dc, tau).rate_lb_ct);
      return kExitOk;
    }
    const evtrack::BoundReport b = evtrack::dt_lower_bound(model, dc, tau);
    if (b.flags.dt_infeasible) {
      throw Infeasible("Dc is at or below the sampling floor b_bar/tau = " +
                       evtrack::format_csv_number(b.critical_Dc));
    }
    print_value(c_rdt->parsed() ? b.rate_dt_per_sample : b.rate_lb_dt);
    return kExitOk;
  }
  if (c_ab->parsed()) {
    const auto model = load_or_throw(model_path);
    if (model.dim() != 1) {
      throw evtrack::ConfigError("sim-ab needs a scalar model");
    }
    require_positive(d, "--d");
    require_positive(tau, "--tau");
    evtrack::ABConfig cfg;
    cfg.A = model.A(0, 0);
    cfg.B = model.B(0, 0);
    cfg.d = d;
    cfg.tau = tau;
    cfg.horizon = horizon > 0.0 ? horizon : 10000.0 * d * d;
    cfg.seed = seed;
    const evtrack::EmpiricalPoint pt = evtrack::run_ab(cfg);
    std::printf("rate %.6f\nmse %.6f\n", pt.rate, pt.mse);
    return kExitOk;
  }
  if (c_diq->parsed()) {
    const auto model = load_or_throw(model_path);
    require_positive(dc, "--dc");
    require_positive(tau, "--tau");
    const auto dmodel = evtrack::discretize(model, tau);
    if (!evtrack::ct_to_dt_distortion(dmodel, dc).feasible) {
      throw Infeasible("Dc is at or below the sampling floor b_bar/tau = " +
                       evtrack::format_csv_number(dmodel.b_bar / tau));
    }
    evtrack::CodecRunOptions opts;
    opts.seed = seed;
    if (horizon > 0.0) {
      opts.steps = static_cast<long>(std::llround(horizon / tau));
      if (opts.steps < 1) throw Infeasible("--horizon shorter than tau");
    }
    std::ofstream trace_file;
    if (!trace_path.empty()) {
      trace_file = open_out(trace_path);
      opts.trace = &trace_file;
    }
    const evtrack::EmpiricalPoint pt =
        evtrack::run_codec(model, dc, tau, opts);
    std::printf("rate %.6f\nmse %.6f\n", pt.rate, pt.mse);
    return kExitOk;
  }
  if (c_vs->parsed()) {
    const auto model = load_or_throw(model_path);
    require_positive(dc, "--dc");
    const auto sensor = evtrack::design_ti_sensor(model, dc);
    const double T = horizon > 0.0
                         ? horizon
                         : 50.0 / std::abs(evtrack::max_real_eigenvalue(
                               model.A));
    const auto traj = evtrack::run_riccati(
        model, sensor, model.Sigma0, T);
    const double conv = (traj.X_final - sensor.X_target).norm();
    std::printf("mi_rate %.6f\nmse_rate %.6f\nconvergence %.3e\n",
                traj.mi_rate, traj.mse_rate, conv);
    return kExitOk;
  }
  if (c_vac->parsed()) {
    const auto model = load_or_throw(model_path);
    require_positive(dc, "--dc");
    if (tau_grid.empty()) {
      tau_grid = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    }
    const auto rows = evtrack::vacuity_profile(model, dc, tau_grid);
    std::printf("tau rate_per_s info_ct bound\n");
    for (const auto& r : rows) {
      if (r.infeasible) {
        std::printf("%.3e infeasible %.6f -\n", r.tau, r.info_ct);
      } else {
        std::printf("%.3e %.6f %.6f %.6e\n", r.tau, r.rate_per_second,
                    r.info_ct, r.bound);
      }
    }
    return kExitOk;
  }
  if (c_sweep->parsed()) {
    evtrack::ExperimentConfig cfg;
    cfg.model = load_or_throw(model_path);
    cfg.scheme = scheme == "ab"    ? evtrack::Scheme::ab
                 : scheme == "diq" ? evtrack::Scheme::diq
                                   : evtrack::Scheme::bounds_only;
    cfg.tau_grid = tau_grid;
    cfg.Dc_grid = dc_grid;
    cfg.d_grid = d_grid;
    if (!seeds.empty()) cfg.seeds = seeds;
    const auto rows = evtrack::run_sweep(cfg);
    if (out_path.empty()) {
      evtrack::emit_csv(rows, std::cout);
    } else {
      auto f = open_out(out_path);
      evtrack::emit_csv(rows, f);
    }
    return kExitOk;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const evtrack::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const evtrack::SolverError& e) {
    std::cerr << "solver failure: " << e.what()
              << " (last gap " << e.last_gap << " bits)\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}
