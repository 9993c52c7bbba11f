// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Statistical criteria use fixed seeds so the suite is repeatable.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtrvm/dictionary.hpp"
#include "mtrvm/evaluation.hpp"
#include "mtrvm/experiments.hpp"
#include "mtrvm/gig.hpp"
#include "mtrvm/inference.hpp"
#include "mtrvm/signals.hpp"
#include "mtrvm/simulator.hpp"

using namespace mtrvm;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok,
            const std::string& detail) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": "
            << name;
  if (!detail.empty()) std::cout << "  (" << detail << ")";
  std::cout << std::endl;
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Frozen-variance Gibbs draws match the analytic Gaussian conditional.

void criterion_1() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 60, m = 4;
  TaskData task;
  task.design.basis.labels = {"a", "b", "c", "d"};
  task.design.values = Eigen::MatrixXd::NullaryExpr(
      n, m, [&](Eigen::Index, Eigen::Index) { return g(rng); });
  const Eigen::VectorXd w_star =
      (Eigen::VectorXd(m) << 1.0, -0.5, 0.0, 2.0).finished();
  task.force = Eigen::VectorXd::NullaryExpr(
      n, [&](Eigen::Index) { return g(rng); });
  task.target = task.design.values * w_star + task.force +
                0.3 * Eigen::VectorXd::NullaryExpr(
                          n, [&](Eigen::Index) { return g(rng); });

  const Eigen::VectorXd alpha2 =
      (Eigen::VectorXd(m) << 2.0, 0.5, 1.0, 4.0).finished();
  const Eigen::VectorXd sigma2 = Eigen::VectorXd::Constant(1, 0.09);

  ChainConfig cfg;
  cfg.n_iterations = 20000;
  cfg.n_burn_in = 0;
  cfg.seed = 99;
  cfg.update_alpha2 = false;
  cfg.update_sigma2 = false;
  cfg.init_alpha2 = alpha2;
  cfg.init_sigma2 = sigma2;
  const PosteriorChain chain = run_gibbs({task}, Hyperparameters{}, cfg);

  const GaussianMoments exact =
      weights_conditional_moments({task}, alpha2, sigma2);
  const double s = double(chain.w_draws.rows());
  const Eigen::VectorXd mean = chain.w_draws.colwise().mean();
  const Eigen::MatrixXd centered =
      chain.w_draws.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / (s - 1.0);

  double worst_z = 0.0;
  for (int j = 0; j < m; ++j) {
    const double se = std::sqrt(exact.covariance(j, j) / s);
    worst_z = std::max(worst_z, std::abs(mean(j) - exact.mean(j)) / se);
  }
  const double frob =
      (cov - exact.covariance).norm() / exact.covariance.norm();
  const bool ok = worst_z < 3.0 && frob < 0.05;
  report(1, "frozen-variance Gibbs matches the analytic conditional", ok,
         "max |z|=" + fmt(worst_z) + ", rel Frobenius=" + fmt(frob));
}

// ---------------------------------------------------------------------------
// 2. Inverse-gamma and GIG samplers match closed-form moments at 1e5 draws.

void criterion_2() {
  std::mt19937_64 rng(22);
  const int s = 100000;

  // inverse gamma, shape 5 scale 3: mean 3/4, E[X^2] = 9/(16*3/4)... use
  // closed forms mean = b/(a-1), var = b^2/((a-1)^2 (a-2)).
  const double a = 5.0, b = 3.0;
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < s; ++i) {
    const double x = sample_inverse_gamma(rng, a, b);
    m1 += x;
    m2 += x * x;
  }
  m1 /= s;
  m2 /= s;
  const double ig_mean = b / (a - 1.0);
  const double ig_m2 = b * b / ((a - 1.0) * (a - 2.0));
  const double ig_err = std::max(std::abs(m1 / ig_mean - 1.0),
                                 std::abs(m2 / ig_m2 - 1.0));

  // GIG(p, chi, psi): E[X^k] = (chi/psi)^{k/2} K_{p+k}(eta) / K_p(eta).
  auto bessel_ratio = [](double p, double k, double eta) {
    return std::cyl_bessel_k(std::abs(p + k), eta) /
           std::cyl_bessel_k(std::abs(p), eta);
  };
  double gig_err = 0.0;
  const double cases[][3] = {
      {-0.5, 2.0, 3.0}, {1.5, 1.0, 4.0}, {-4.0, 5.0, 0.5}};
  for (const auto& c : cases) {
    const double p = c[0], chi = c[1], psi = c[2];
    const double eta = std::sqrt(chi * psi);
    double e1 = 0.0, einv = 0.0;
    for (int i = 0; i < s; ++i) {
      const double x = sample_gig(rng, p, chi, psi);
      e1 += x;
      einv += 1.0 / x;
    }
    e1 /= s;
    einv /= s;
    const double mean = std::sqrt(chi / psi) * bessel_ratio(p, 1.0, eta);
    const double meaninv =
        std::sqrt(psi / chi) * bessel_ratio(p, -1.0, eta);
    gig_err = std::max(gig_err, std::abs(e1 / mean - 1.0));
    gig_err = std::max(gig_err, std::abs(einv / meaninv - 1.0));
  }
  const bool ok = ig_err < 0.02 && gig_err < 0.02;
  report(2, "inverse-gamma and GIG samplers match closed-form moments", ok,
         "IG rel err=" + fmt(ig_err) + ", GIG rel err=" + fmt(gig_err));
}

// ---------------------------------------------------------------------------
// 3. Simulation fidelity: order-4 convergence, energy drift, ODE residual.

double linear_endpoint_error(double dt, double t_end) {
  OscillatorParams p;
  p.c = 0.0;
  p.k3 = 0.0;
  const auto n = static_cast<std::size_t>(std::llround(t_end / dt)) + 1;
  const std::vector<double> zero(n, 0.0);
  const auto traj = rk4_integrate(p, zero, dt, 1.0, 0.0);
  return std::abs(traj.y.back() - std::cos(double(n - 1) * dt));
}

void criterion_3() {
  const double e1 = linear_endpoint_error(1.6e-2, 6.4);
  const double e2 = linear_endpoint_error(8e-3, 6.4);
  const double ratio = e1 / e2;
  const bool order_ok = std::abs(ratio - 16.0) <= 3.0;

  OscillatorParams und;
  und.c = 0.0;
  const std::size_t n = 1000001;
  const std::vector<double> zero(n, 0.0);
  const auto traj = rk4_integrate(und, zero, 1e-5, 1.0, 0.0);
  auto energy = [&](double y, double v) {
    return 0.5 * v * v + 0.5 * und.k1 * y * y +
           0.25 * und.k3 * y * y * y * y;
  };
  const double h0 = energy(traj.y.front(), traj.ydot.front());
  double drift = 0.0;
  for (std::size_t i = 0; i < n; i += 100)
    drift = std::max(drift,
                     std::abs(energy(traj.y[i], traj.ydot[i]) - h0) / h0);

  ForcingSpec forcing;
  forcing.scale_f = 1e3;
  forcing.seed = 5;
  const OscillatorParams p{};
  const Dataset d = simulate_dataset(p, forcing, SimulationConfig{});
  double ss = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double rhs = (d.force[i] - p.c * d.ydot[i] - p.k1 * d.y[i] -
                        p.k3 * d.y[i] * d.y[i] * d.y[i]) /
                       p.m;
    ss += (d.yddot[i] - rhs) * (d.yddot[i] - rhs);
  }
  const double resid = std::sqrt(ss / double(d.size()));

  const bool ok = order_ok && drift < 1e-6 && resid < 1e-8;
  report(3, "RK4 order-4, energy drift < 1e-6, ODE residual < 1e-8 RMS", ok,
         "ratio=" + fmt(ratio) + ", drift=" + fmt(drift) +
             ", resid RMS=" + fmt(resid));
}

// ---------------------------------------------------------------------------
// 4. Filter fidelity at fs = 100 kHz: DC gain, -3 dB point, 30 Hz roll-off.

double filter_gain(double freq_hz, double fs) {
  const FilterSpec spec{};
  const double t_settle = 4.0, t_measure = 2.0;
  const auto n = static_cast<std::size_t>((t_settle + t_measure) * fs);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = std::sin(2.0 * M_PI * freq_hz * double(i) / fs);
  const auto y = butterworth_lowpass(x, spec, fs);
  // quadrature demodulation over an integer number of periods
  const auto skip = static_cast<std::size_t>(t_settle * fs);
  const auto periods = std::floor(t_measure * freq_hz);
  const auto len = static_cast<std::size_t>(periods * fs / freq_hz);
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double ph = 2.0 * M_PI * freq_hz * double(skip + i) / fs;
    re += y[skip + i] * std::sin(ph);
    im += y[skip + i] * std::cos(ph);
  }
  return 2.0 * std::hypot(re, im) / double(len);
}

void criterion_4() {
  const double fs = 1e5;
  std::vector<double> ones(static_cast<std::size_t>(4.0 * fs), 1.0);
  const double dc = butterworth_lowpass(ones, FilterSpec{}, fs).back();
  const double g3 = filter_gain(3.0, fs);
  const double g30 = filter_gain(30.0, fs);
  const double atten_db = -20.0 * std::log10(g30);
  const bool ok = std::abs(dc - 1.0) < 1e-6 &&
                  std::abs(g3 - 1.0 / std::sqrt(2.0)) < 0.01 / std::sqrt(2.0) &&
                  atten_db >= 75.0;
  report(4, "filter DC gain, -3 dB at 3 Hz, >= 75 dB at 30 Hz", ok,
         "|dc-1|=" + fmt(std::abs(dc - 1.0)) + ", |H(3)|=" + fmt(g3) +
             ", atten(30)=" + fmt(atten_db) + " dB");
}

// ---------------------------------------------------------------------------
// 5. High-excitation recovery over 10 seeded replicates at f = 1e3.

void criterion_5() {
  ScenarioConfig cfg;
  cfg.mode = TaskMode::single_task;
  cfg.excitation_scales = {1e3};
  cfg.master_seed = 2024;
  cfg.label = "accept-st-high";

  const auto& labels = BasisSpec::standard().labels;
  auto index_of = [&](const std::string& s) {
    for (std::size_t j = 0; j < labels.size(); ++j)
      if (labels[j] == s) return j;
    return labels.size();
  };
  const std::size_t iy = index_of("y"), iyd = index_of("ydot"),
                    iy3 = index_of("y^3");
  const std::vector<std::size_t> inactive = {
      index_of("y^2"), index_of("ydot^2"), index_of("ydot^3"),
      index_of("1")};

  int sign_ok = 0, wy_ok = 0, wyd_ok = 0, ci_ok = 0;
  for (std::size_t r = 0; r < 10; ++r) {
    const ScenarioResult res = run_scenario(cfg, r);
    const auto& t = res.summary.terms;
    if (t[iy].mean < 0.0 && t[iyd].mean < 0.0 && t[iy3].mean < 0.0)
      ++sign_ok;
    if (std::abs(t[iy].mean + 1.0) < 0.3) ++wy_ok;
    if (std::abs(t[iyd].mean + 0.2) < 0.1) ++wyd_ok;
    bool all_contain = true;
    for (std::size_t j : inactive)
      if (t[j].q2_5 > 0.0 || t[j].q97_5 < 0.0) all_contain = false;
    if (all_contain) ++ci_ok;
  }
  const bool ok =
      sign_ok == 10 && wy_ok == 10 && wyd_ok == 10 && ci_ok >= 8;
  report(5, "single-task recovery at f=1e3 over 10 replicates", ok,
         "sign " + std::to_string(sign_ok) + "/10, |w_y+1|<0.3 " +
             std::to_string(wy_ok) + "/10, |w_ydot+0.2|<0.1 " +
             std::to_string(wyd_ok) + "/10, inactive CIs contain 0 " +
             std::to_string(ci_ok) + "/10");
}

// ---------------------------------------------------------------------------
// 6 & 7. Paired study, R = 20, scales {1e1, 1e2, 1e3}.

void criteria_6_7() {
  ScenarioConfig cfg;
  cfg.mode = TaskMode::multi_task;
  cfg.excitation_scales = {1e1, 1e2, 1e3};
  cfg.replicates = 20;
  cfg.master_seed = 4242;
  cfg.holdout_nmse = true;
  cfg.label = "accept-study";
  const StudyResult study = run_nmse_study(cfg);

  const std::size_t medium = 1, low = 0, high = 2;
  const auto& agg = study.aggregates;

  int lo_better = 0, lo_valid = 0, mid_better = 0, mid_valid = 0;
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    if (!study.st[r][low].failed && !study.mt[r][low].failed) {
      ++lo_valid;
      if (study.mt[r][low].recovery_l2 < study.st[r][low].recovery_l2)
        ++lo_better;
    }
    if (!study.st[r][medium].failed && !study.mt[r][medium].failed) {
      ++mid_valid;
      if (study.mt[r][medium].recovery_l2 < study.st[r][medium].recovery_l2)
        ++mid_better;
    }
  }
  const bool nmse_ok = agg[medium].mt_mean <= agg[medium].st_mean &&
                       agg[medium].mt_std <= agg[medium].st_std;
  const bool rec_ok =
      lo_valid > 0 && mid_valid > 0 &&
      double(lo_better) / double(lo_valid) >= 0.70 &&
      double(mid_better) / double(mid_valid) >= 0.70;
  report(6, "multi-task improves medium-excitation NMSE and recovery",
         nmse_ok && rec_ok && study.failure_count == 0,
         "NMSE mean MT/ST=" + fmt(agg[medium].mt_mean) + "/" +
             fmt(agg[medium].st_mean) + ", std MT/ST=" +
             fmt(agg[medium].mt_std) + "/" + fmt(agg[medium].st_std) +
             ", recovery wins f=1e1 " + std::to_string(lo_better) + "/" +
             std::to_string(lo_valid) + ", f=1e2 " +
             std::to_string(mid_better) + "/" + std::to_string(mid_valid));

  const double pooled = std::sqrt(
      0.5 * (agg[high].st_std * agg[high].st_std +
             agg[high].mt_std * agg[high].mt_std));
  const double gap = std::abs(agg[high].mt_mean - agg[high].st_mean);
  report(7, "no negative transfer at f=1e3", gap <= pooled,
         "|mean gap|=" + fmt(gap) + ", pooled std=" + fmt(pooled));
}

// ---------------------------------------------------------------------------
// 8. NMSE worked examples are exact to 1e-10.

void criterion_8() {
  const Eigen::VectorXd z = (Eigen::VectorXd(3) << 1, 2, 3).finished();
  const double perfect = nmse(z, z).value;
  const Eigen::VectorXd mean_pred = Eigen::VectorXd::Constant(3, z.mean());
  const double at_mean = nmse(z, mean_pred).value;
  const Eigen::VectorXd off = (Eigen::VectorXd(3) << 1, 2, 4).finished();
  const double half = nmse(z, off).value;
  const bool ok = std::abs(perfect) < 1e-10 &&
                  std::abs(at_mean - 100.0) < 1e-10 &&
                  std::abs(half - 50.0) < 1e-10;
  report(8, "NMSE examples 0 / 100 / 50 exact to 1e-10", ok,
         fmt(perfect) + ", " + fmt(at_mean) + ", " + fmt(half));
}

// ---------------------------------------------------------------------------
// 9. reproduce is byte-deterministic across runs.

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void criterion_9() {
  ScenarioConfig cfg;
  cfg.mode = TaskMode::multi_task;
  cfg.excitation_scales = {1e1, 1e2, 1e3};
  cfg.sim.duration = 2.0;
  cfg.chain.n_iterations = 700;
  cfg.chain.n_burn_in = 200;
  cfg.replicates = 2;
  cfg.master_seed = 77;

  const fs::path a = fs::temp_directory_path() / "mtrvm_accept_repro_a";
  const fs::path b = fs::temp_directory_path() / "mtrvm_accept_repro_b";
  fs::remove_all(a);
  fs::remove_all(b);
  reproduce_paper(a.string(), cfg);
  reproduce_paper(b.string(), cfg);

  int csvs = 0;
  bool identical = true;
  std::string first_diff;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv")
      continue;
    ++csvs;
    const fs::path rel = fs::relative(entry.path(), a);
    if (!fs::exists(b / rel) || slurp(entry.path()) != slurp(b / rel)) {
      identical = false;
      if (first_diff.empty()) first_diff = rel.string();
    }
  }
  const bool ok = identical && csvs > 0;
  report(9, "reproduce is byte-identical across runs", ok,
         std::to_string(csvs) + " CSV files compared" +
             (first_diff.empty() ? "" : ", first diff: " + first_diff));
  fs::remove_all(a);
  fs::remove_all(b);
}

}  // namespace

int main() {
  try {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criteria_6_7();
    criterion_8();
    criterion_9();
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance suite aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                : std::to_string(g_failures) +
                                      " criterion(s) failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
