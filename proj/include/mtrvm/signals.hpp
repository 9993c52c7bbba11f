#pragma once

#include <cstdint>
#include <vector>

namespace mtrvm {

// Uniform random forcing, F = scale_f * U(lower, upper), generated at rate_hz.
struct ForcingSpec {
  double scale_f = 1.0;
  double lower = -0.5;
  double upper = 0.5;
  std::uint64_t seed = 0;
  double rate_hz = 1e5;

  void validate() const;
};

enum class FilterKind { low_pass };

struct FilterSpec {
  double cutoff_hz = 3.0;
  int order = 4;
  FilterKind kind = FilterKind::low_pass;

  void validate() const;
};

// n i.i.d. draws of scale_f * U(lower, upper). Same seed, same series.
std::vector<double> generate_forcing(const ForcingSpec& spec, std::size_t n);

// Causal Butterworth low-pass, bilinear transform with frequency pre-warping,
// run as cascaded second-order sections. Output length equals input length.
std::vector<double> butterworth_lowpass(const std::vector<double>& signal,
                                        const FilterSpec& spec, double fs_hz);

// Zero-phase variant: forward pass then time-reversed pass.
std::vector<double> butterworth_lowpass_zero_phase(
    const std::vector<double>& signal, const FilterSpec& spec, double fs_hz);

// Pure index selection: elements 0, factor, 2*factor, ...
std::vector<double> decimate(const std::vector<double>& signal,
                             std::size_t factor);

}  // namespace mtrvm
