#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mtrvm/signals.hpp"

namespace mtrvm {

// SDOF oscillator with linear and cubic stiffness:
//   m*yddot + c*ydot + k1*y + k3*y^3 = F
struct OscillatorParams {
  double m = 1.0;
  double c = 0.2;
  double k1 = 1.0;
  double k3 = 1.0;

  void validate() const;
};

enum class FilterTarget { forcing, response, none };

struct SimulationConfig {
  double dt_fast = 1e-5;      // 100 kHz integration rate
  double duration = 10.0;     // seconds
  std::size_t decimation = 1000;
  FilterSpec filter{};
  FilterTarget filter_target = FilterTarget::forcing;
  double initial_y = 0.0;
  double initial_ydot = 0.0;
  double measurement_noise_std = 0.0;  // additive Gaussian on recorded yddot
  double trim_s = 0.0;                 // seconds dropped from the start

  void validate() const;
  std::size_t fast_sample_count() const;
};

// One task's time series at the effective (decimated) sample rate.
struct Dataset {
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> ydot;
  std::vector<double> yddot;
  std::vector<double> force;
  double fs = 0.0;
  std::string label;

  std::size_t size() const { return t.size(); }
  void validate() const;
};

struct Trajectory {
  std::vector<double> y;
  std::vector<double> ydot;
  std::vector<double> yddot;
};

// Classic RK4 on x1' = x2, x2' = (F - c*x2 - k1*x1 - k3*x1^3)/m.
// Forcing is sampled at 1/dt; within a step the midpoint force is the linear
// interpolation of the neighbouring samples. yddot is the ODE right-hand side
// evaluated at each stored state, not a finite difference.
Trajectory rk4_integrate(const OscillatorParams& params,
                         const std::vector<double>& forcing, double dt,
                         double y0 = 0.0, double ydot0 = 0.0);

// Full pipeline: forcing -> optional filter -> RK4 -> decimate -> optional
// measurement noise on yddot.
Dataset simulate_dataset(const OscillatorParams& params,
                         const ForcingSpec& forcing_spec,
                         const SimulationConfig& sim,
                         const std::string& label = "");

// Adds seeded Gaussian noise to the recorded acceleration in place.
void add_measurement_noise(Dataset& data, double noise_std,
                           std::uint64_t seed);

// CSV round trip; header "t,y,ydot,yddot,F", 17 significant digits.
void write_dataset_csv(std::ostream& os, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(std::istream& is, const std::string& label = "");
Dataset read_dataset_csv(const std::string& path);

}  // namespace mtrvm
