// End-to-end acceptance checks, one line per criterion. Exit status is
// the number of failed criteria.

#include "evtrack/abscheme.hpp"
#include "evtrack/bounds.hpp"
#include "evtrack/ctsensor.hpp"
#include "evtrack/diqcodec.hpp"
#include "evtrack/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace evtrack;

namespace {

StateSpaceModel scalar_model() {
  Matrix a(1, 1), b(1, 1), s(1, 1);
  a << -0.1;
  b << 1.0;
  s << 1.0;
  return make_model(a, b, s);
}

StateSpaceModel planar_model() {
  Matrix A(2, 2), B(2, 2), S(2, 2);
  A << -0.0145, -0.0886, 0.0886, 0.0;
  B << 0.1, 0.0, 0.0, 0.1;
  S << 1.0, 0.0, 0.0, 1.0;
  return make_model(A, B, S);
}

struct Checker {
  bool ok = true;
  std::string why;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      why = what;
    }
  }
};

int run_criterion(int number, const std::function<void(Checker&)>& body) {
  Checker c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  if (c.ok) {
    std::printf("criterion %d: PASS\n", number);
    return 0;
  }
  std::printf("criterion %d: FAIL (%s)\n", number, c.why.c_str());
  return 1;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Solver-vs-closed-form agreement on a (D, tau) grid.
void criterion_1(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = scalar_model();
  for (int i = 1; i <= 20; ++i) {
    const double D = 0.25 * i;
    const double ct = solve_ct_info(model, D).value;
    c.require(std::abs(ct - scalar_ct_info(-0.1, 1.0, D)) < 1e-6,
              "ct mismatch at D = " + std::to_string(D));
    for (double tau : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const auto d = discretize(model, tau);
      const double Dd = D * d.Q_bar(0, 0);
      const double dt = solve_dt_rate(d, Dd, d.Q_bar).value;
      c.require(std::abs(dt - scalar_dt_rate(d, Dd)) < 1e-6,
                "dt mismatch at D = " + std::to_string(D) +
                    ", tau = " + std::to_string(tau));
    }
  }
  c.require(seconds_since(t0) < 10.0, "runtime over 10 s");
}

// theta inversion accuracy.
void criterion_2(Checker& c) {
  for (double y = 0.0; y <= 64.0; y += 0.125) {
    c.require(std::abs(theta(theta_inv(y)) - y) < 1e-10,
              "roundtrip error at y = " + std::to_string(y));
  }
  c.require(std::abs(theta_inv(3.0) - 1.0) < 1e-10, "theta_inv(3) != 1");
}

// Sampled rate dominates the continuous-time rate, before and after the
// nonsingular-code map.
void criterion_3(Checker& c) {
  const std::vector<double> taus = {0.5, 1.0, 2.0};
  for (const auto& model : {scalar_model(), planar_model()}) {
    const bool scalar = model.dim() == 1;
    const std::vector<double> dcs =
        scalar ? std::vector<double>{0.6, 1.0, 2.0, 3.0, 4.0}
               : std::vector<double>{0.05, 0.1, 0.3, 0.6, 1.0};
    for (double tau : taus) {
      const auto d = discretize(model, tau);
      for (double Dc : dcs) {
        const double Dd = Dc * tau - d.b_bar;
        if (Dd <= 0.0) continue;
        const double R = solve_dt_rate(d, Dd, d.Q_bar).value;
        const double Ic = solve_ct_info(model, Dc).value;
        c.require(R / tau >= Ic - 1e-6, "per-sample ordering violated");
        const auto b = dt_lower_bound(model, Dc, tau);
        c.require(b.rate_lb_dt >= b.rate_lb_ct - 1e-9,
                  "mapped ordering violated");
      }
    }
  }
}

// Small-tau behavior: the per-second rate approaches the CT rate while
// the mapped bound collapses near the stationary budget.
void criterion_4(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = scalar_model();
  const double Dc = 4.7;
  const double Ic = scalar_ct_info(-0.1, 1.0, Dc);

  const auto fine = discretize(model, 1e-4);
  const double R4 = scalar_dt_rate(fine, Dc * 1e-4 - fine.b_bar);
  c.require(std::abs(R4 / 1e-4 - Ic) / Ic < 0.01, "rate limit off at 1e-4");

  const auto finer = discretize(model, 1e-6);
  const double R6 = scalar_dt_rate(finer, Dc * 1e-6 - finer.b_bar);
  c.require(theta_inv(R6) / 1e-6 < 1e-3, "mapped bound not vacuous at 1e-6");
  c.require(seconds_since(t0) < 5.0, "runtime over 5 s");
}

// Constant-gain sensor: global Riccati convergence and the advertised
// rate/distortion pair.
void criterion_5(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = scalar_model();
  const double D = 1.0;
  const auto sensor = design_ti_sensor(model, D);
  const double Ic = solve_ct_info(model, D).value;
  CounterRng rng(31, 0);
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    Matrix X0(1, 1);
    X0 << 0.05 + 20.0 * rng.uniform(trial);
    const auto traj = run_riccati(model, sensor, X0, 500.0, 0.01);
    c.require((traj.X_final - sensor.X_target).norm() <= 1e-4,
              "no convergence from X0 = " + std::to_string(X0(0, 0)));
    c.require(std::abs(traj.mi_rate - Ic) / Ic < 0.01, "mi rate off");
    c.require(traj.mse_rate <= 1.01 * D, "mse rate off");
  }
  c.require(seconds_since(t0) < 30.0, "runtime over 30 s");
}

// Periodic sample-and-ramp policy approaches the sampled optimum.
void criterion_6(Checker& c) {
  const auto model = scalar_model();
  const auto dmodel = discretize(model, 1.0);
  const auto rep = periodic_policy_check(model, dmodel, 1.0, 1e-3, 1e-3);
  c.require(rep.gain_psd_ok, "ramp gain not PSD");
  c.require(std::abs(rep.mse_rate - 1.0) < 0.02, "period mse off");
  c.require(std::abs(rep.mi_rate - rep.rate_target) / rep.rate_target < 0.05,
            "period mi off");
  double prev = 1e300;
  for (double delta : {1e-3, 5e-4, 2.5e-4}) {
    const auto r = periodic_policy_check(model, dmodel, 1.0, 1e-3, delta);
    c.require(r.gain_psd_ok, "ramp gain not PSD at halved delta");
    const double gap = std::abs(r.mi_rate - r.rate_target);
    c.require(gap < prev, "no improvement as delta halves");
    prev = gap;
  }
}

// One-bit threshold scheme: dominance and rate saturation in tau.
void criterion_7(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = scalar_model();
  const std::vector<double> taus = {1e-1, 1e-2, 1e-3};
  for (double d : {0.5, 1.0, 1.5, 2.0, 2.5}) {
    double prev_rate = 0.0, prev_se = 0.0;
    double rate_1e2 = 0.0, rate_1e3 = 0.0;
    for (double tau : taus) {  // descending tau: rate may only rise
      ABConfig cfg;
      cfg.A = -0.1;
      cfg.B = 1.0;
      cfg.d = d;
      cfg.tau = tau;
      cfg.horizon = 10000.0 * d * d;
      cfg.seed = 2026;
      const auto pt = run_ab(cfg);
      const auto b = ct_lower_bound(model, pt.mse, tau);
      c.require(pt.rate >= b.rate_lb_ct - 3.0 * pt.rate_stderr,
                "bound violated at d = " + std::to_string(d) +
                    ", tau = " + std::to_string(tau));
      c.require(pt.rate >= prev_rate - 3.0 * (pt.rate_stderr + prev_se),
                "rate not non-increasing in tau");
      prev_rate = pt.rate;
      prev_se = pt.rate_stderr;
      if (tau == 1e-2) rate_1e2 = pt.rate;
      if (tau == 1e-3) rate_1e3 = pt.rate;
    }
    c.require(std::abs(rate_1e3 - rate_1e2) / rate_1e2 <= 0.05,
              "rate still moving below tau = 1e-2 at d = " +
                  std::to_string(d));
  }
  c.require(seconds_since(t0) < 180.0, "runtime over 3 min");
}

// Codec synchrony: the decoder reproduces the encoder replica bit for
// bit, including across truncation recoveries.
void criterion_8(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = planar_model();
  const double tau = 1.0, Dc = 0.3;
  const auto dmodel = discretize(model, tau);
  const auto dd = ct_to_dt_distortion(dmodel, Dc);
  c.require(dd.feasible, "distortion below the sampling floor");

  CodecConfig cfg;
  cfg.dmodel = dmodel;
  cfg.C_tau = design_quantizer_sensor(dmodel, dd.value, dmodel.Q_bar);
  cfg.Sigma0 = model.Sigma0;
  cfg.cutoffs = {1, 1};  // tight alphabet so escapes actually occur
  cfg.seed = 77;

  DiqEncoder enc(cfg);
  DiqDecoder dec(cfg);
  CounterRng w0(cfg.seed, 2), w1(cfg.seed, 3);
  Vector x = Vector::Zero(2);
  long truncations = 0;
  for (long k = 0; k < 10000; ++k) {
    const Packet pkt = enc.encode_step(x);
    const Vector est = dec.decode_step(pkt);
    c.require(est(0) == enc.replica_estimate()(0) &&
                  est(1) == enc.replica_estimate()(1),
              "estimate mismatch at step " + std::to_string(k));
    c.require(enc.pmf().counts() == dec.pmf().counts(),
              "pmf state mismatch at step " + std::to_string(k));
    if (enc.last_trace().truncated) ++truncations;
    if (!c.ok) break;
    Vector w(2);
    w << w0.normal(k), w1.normal(k);
    x = dmodel.A_tau * x + dmodel.B_tau * w;
  }
  c.require(truncations > 0, "no truncation exercised");
  c.require(seconds_since(t0) < 30.0, "runtime over 30 s");
}

// Codec points sit above both bound curves; the sampled bound blows up
// at the critical distortion.
void criterion_9(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = planar_model();
  for (double tau : {0.5, 1.0, 2.0}) {
    CodecRunOptions opts;
    opts.steps = 10000;
    opts.seed = 5;
    const auto pt = run_codec(model, 0.3, tau, opts);
    const auto b = dt_lower_bound(model, pt.mse, tau);
    c.require(!b.flags.dt_infeasible, "achieved mse below the floor");
    c.require(pt.rate >= b.rate_lb_dt,
              "dt bound violated at tau = " + std::to_string(tau));
    c.require(pt.rate >= b.rate_lb_ct,
              "ct bound violated at tau = " + std::to_string(tau));
  }

  const double tau = 1.0;
  const double critical = discretize(model, tau).b_bar / tau;
  bool diverged = false;
  for (int k = 1; k <= 40 && !diverged; ++k) {
    const double Dc = critical * (1.0 + std::ldexp(1.0, -k));
    const auto b = dt_lower_bound(model, Dc, tau);
    if (b.flags.dt_infeasible) break;
    if (b.rate_lb_dt >= 10.0 * b.rate_lb_ct) diverged = true;
  }
  c.require(diverged, "dt bound never reached 10x the ct bound");
  c.require(seconds_since(t0) < 300.0, "runtime over 5 min");
}

// Dither statistics: uniform reconstruction noise with covariance I/12
// and the designed steady-state posterior.
void criterion_10(Checker& c) {
  const auto model = planar_model();
  const double tau = 1.0, Dc = 0.3;
  const auto dmodel = discretize(model, tau);
  const double Dd = ct_to_dt_distortion(dmodel, Dc).value;
  const Matrix C = design_quantizer_sensor(dmodel, Dd, dmodel.Q_bar);
  const auto sol = solve_dt_rate(dmodel, Dd, dmodel.Q_bar);

  detail::KalmanChain chain;
  chain.init(dmodel, C, model.Sigma0);
  CounterRng d0(3, 0), d1(3, 1), w0(3, 2), w1(3, 3);
  Vector x = Vector::Zero(2);
  const long n = 10000;
  Matrix vcov = Matrix::Zero(2, 2);
  for (long k = 0; k < n; ++k) {
    Vector dith(2);
    dith << d0.uniform_centered(k), d1.uniform_centered(k);
    const Vector z = C * (x - chain.x_prior) + dith;
    Vector v(2), q(2);
    for (int i = 0; i < 2; ++i) {
      q(i) = std::floor(z(i) + 0.5);
      v(i) = z(i) - q(i);
    }
    vcov += v * v.transpose();
    chain.refresh_gain();
    const Vector post = chain.posterior(q - dith);
    chain.advance(post);
    Vector w(2);
    w << w0.normal(k), w1.normal(k);
    x = dmodel.A_tau * x + dmodel.B_tau * w;
  }
  vcov /= double(n);
  const double se_diag = std::sqrt(1.0 / 180.0 / n);
  const double se_off = std::sqrt(1.0 / 144.0 / n);
  for (int i = 0; i < 2; ++i) {
    c.require(std::abs(vcov(i, i) - 1.0 / 12.0) < 3.0 * se_diag,
              "v variance off in component " + std::to_string(i));
  }
  c.require(std::abs(vcov(0, 1)) < 3.0 * se_off, "v components correlated");

  // after 1e4 data-independent updates the posterior sits at P*
  chain.refresh_gain();
  const Matrix I = Matrix::Identity(2, 2);
  const Matrix IKC = I - chain.K * C;
  const Matrix P_post = IKC * chain.P_prior * IKC.transpose() +
                        chain.K * (I / 12.0) * chain.K.transpose();
  c.require((P_post - sol.P_star).norm() < 1e-4, "posterior far from P*");
}

}  // namespace

int main() {
  int fails = 0;
  fails += run_criterion(1, criterion_1);
  fails += run_criterion(2, criterion_2);
  fails += run_criterion(3, criterion_3);
  fails += run_criterion(4, criterion_4);
  fails += run_criterion(5, criterion_5);
  fails += run_criterion(6, criterion_6);
  fails += run_criterion(7, criterion_7);
  fails += run_criterion(8, criterion_8);
  fails += run_criterion(9, criterion_9);
  fails += run_criterion(10, criterion_10);
  return fails;
}
