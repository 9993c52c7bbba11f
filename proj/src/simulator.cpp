#include "mtrvm/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "mtrvm/errors.hpp"

namespace mtrvm {

void OscillatorParams::validate() const {
  if (m <= 0.0) throw ConfigError("OscillatorParams: mass must be > 0");
  if (c < 0.0) throw ConfigError("OscillatorParams: damping must be >= 0");
}

void SimulationConfig::validate() const {
  if (dt_fast <= 0.0) throw ConfigError("SimulationConfig: dt_fast must be > 0");
  if (duration <= 0.0) throw ConfigError("SimulationConfig: duration must be > 0");
  if (decimation < 1) throw ConfigError("SimulationConfig: decimation must be >= 1");
  const double n = duration / dt_fast;
  if (std::abs(n - std::round(n)) > 1e-3)
    throw ConfigError("SimulationConfig: duration/dt_fast is not an integer");
  if (measurement_noise_std < 0.0)
    throw ConfigError("SimulationConfig: negative noise std");
  if (trim_s < 0.0 || trim_s >= duration)
    throw ConfigError("SimulationConfig: trim_s out of range");
}

std::size_t SimulationConfig::fast_sample_count() const {
  return static_cast<std::size_t>(std::llround(duration / dt_fast));
}

void Dataset::validate() const {
  const std::size_t n = t.size();
  if (n < 1) throw ConfigError("Dataset: empty");
  if (y.size() != n || ydot.size() != n || yddot.size() != n ||
      force.size() != n)
    throw ConfigError("Dataset: series length mismatch");
  if (fs <= 0.0) throw ConfigError("Dataset: fs must be > 0");
  const double dt = 1.0 / fs;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i]) ||
        !std::isfinite(ydot[i]) || !std::isfinite(yddot[i]) ||
        !std::isfinite(force[i]))
      throw NumericalError("Dataset: non-finite value at index " +
                           std::to_string(i));
    if (i > 0 && std::abs(t[i] - t[i - 1] - dt) > 1e-9 * (1.0 + std::abs(t[i])))
      throw ConfigError("Dataset: non-uniform time stamps at index " +
                        std::to_string(i));
  }
}

namespace {

inline double accel(const OscillatorParams& p, double y, double ydot,
                    double force) {
  return (force - p.c * ydot - p.k1 * y - p.k3 * y * y * y) / p.m;
}

}  // namespace

Trajectory rk4_integrate(const OscillatorParams& params,
                         const std::vector<double>& forcing, double dt,
                         double y0, double ydot0) {
  params.validate();
  if (forcing.size() < 2)
    throw ConfigError("rk4_integrate: need at least 2 forcing samples");
  if (dt <= 0.0) throw ConfigError("rk4_integrate: dt must be > 0");

  const std::size_t n = forcing.size();
  Trajectory traj;
  traj.y.resize(n);
  traj.ydot.resize(n);
  traj.yddot.resize(n);

  double y = y0, v = ydot0;
  traj.y[0] = y;
  traj.ydot[0] = v;
  traj.yddot[0] = accel(params, y, v, forcing[0]);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double f0 = forcing[i];
    const double f1 = forcing[i + 1];
    const double fm = 0.5 * (f0 + f1);

    const double k1y = v;
    const double k1v = accel(params, y, v, f0);
    const double k2y = v + 0.5 * dt * k1v;
    const double k2v = accel(params, y + 0.5 * dt * k1y, k2y, fm);
    const double k3y = v + 0.5 * dt * k2v;
    const double k3v = accel(params, y + 0.5 * dt * k2y, k3y, fm);
    const double k4y = v + dt * k3v;
    const double k4v = accel(params, y + dt * k3y, k4y, f1);

    y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

    if (!std::isfinite(y) || !std::isfinite(v))
      throw NumericalError("rk4_integrate: divergence at step " +
                           std::to_string(i + 1));

    traj.y[i + 1] = y;
    traj.ydot[i + 1] = v;
    traj.yddot[i + 1] = accel(params, y, v, f1);
  }
  return traj;
}

Dataset simulate_dataset(const OscillatorParams& params,
                         const ForcingSpec& forcing_spec,
                         const SimulationConfig& sim,
                         const std::string& label) {
  params.validate();
  forcing_spec.validate();
  sim.validate();

  const double fast_rate = 1.0 / sim.dt_fast;
  if (std::abs(forcing_spec.rate_hz - fast_rate) > 1e-6 * fast_rate)
    throw ConfigError("simulate_dataset: forcing rate != 1/dt_fast");

  const std::size_t n = sim.fast_sample_count();
  std::vector<double> force = generate_forcing(forcing_spec, n);
  if (sim.filter_target == FilterTarget::forcing)
    force = butterworth_lowpass(force, sim.filter, fast_rate);

  Trajectory traj = rk4_integrate(params, force, sim.dt_fast, sim.initial_y,
                                  sim.initial_ydot);

  if (sim.filter_target == FilterTarget::response) {
    traj.y = butterworth_lowpass(traj.y, sim.filter, fast_rate);
    traj.ydot = butterworth_lowpass(traj.ydot, sim.filter, fast_rate);
    traj.yddot = butterworth_lowpass(traj.yddot, sim.filter, fast_rate);
  }

  Dataset data;
  data.label = label;
  data.fs = fast_rate / static_cast<double>(sim.decimation);
  data.y = decimate(traj.y, sim.decimation);
  data.ydot = decimate(traj.ydot, sim.decimation);
  data.yddot = decimate(traj.yddot, sim.decimation);
  data.force = decimate(force, sim.decimation);
  data.t.resize(data.y.size());
  for (std::size_t i = 0; i < data.t.size(); ++i)
    data.t[i] = static_cast<double>(i) / data.fs;

  if (sim.trim_s > 0.0) {
    const auto skip =
        static_cast<std::size_t>(std::llround(sim.trim_s * data.fs));
    if (skip >= data.size())
      throw ConfigError("simulate_dataset: trim removes the whole record");
    auto drop = [skip](std::vector<double>& v) {
      v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(skip));
    };
    drop(data.t);
    drop(data.y);
    drop(data.ydot);
    drop(data.yddot);
    drop(data.force);
  }

  if (sim.measurement_noise_std > 0.0)
    add_measurement_noise(data, sim.measurement_noise_std,
                          forcing_spec.seed ^ 0x9e3779b97f4a7c15ULL);

  data.validate();
  return data;
}

void add_measurement_noise(Dataset& data, double noise_std,
                           std::uint64_t seed) {
  if (noise_std < 0.0) throw ConfigError("add_measurement_noise: negative std");
  if (noise_std == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise_std);
  for (auto& v : data.yddot) v += gauss(rng);
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  os << "t,y,ydot,yddot,F\n";
  char buf[160];
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  data.t[i], data.y[i], data.ydot[i], data.yddot[i],
                  data.force[i]);
    os << buf;
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  write_dataset_csv(os, data);
  if (!os.good()) throw ConfigError("write failed: " + path);
}

Dataset read_dataset_csv(std::istream& is, const std::string& label) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t,y,ydot,yddot,F", 0) != 0)
    throw ConfigError("dataset CSV: bad or missing header");

  Dataset data;
  data.label = label;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double t, y, yd, ydd, f;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &t, &y, &yd, &ydd,
                    &f) != 5)
      throw ConfigError("dataset CSV: unparseable row: " + line);
    data.t.push_back(t);
    data.y.push_back(y);
    data.ydot.push_back(yd);
    data.yddot.push_back(ydd);
    data.force.push_back(f);
  }
  if (data.t.size() < 2) throw ConfigError("dataset CSV: too few rows");
  data.fs = 1.0 / (data.t[1] - data.t[0]);
  data.validate();
  return data;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open for reading: " + path);
  Dataset d = read_dataset_csv(is, path);
  return d;
}

}  // namespace mtrvm
