#include "mtrvm/signals.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "mtrvm/errors.hpp"

namespace mtrvm {

void ForcingSpec::validate() const {
  if (scale_f <= 0.0) throw ConfigError("ForcingSpec: scale_f must be > 0");
  if (lower >= upper) throw ConfigError("ForcingSpec: lower must be < upper");
  if (rate_hz <= 0.0) throw ConfigError("ForcingSpec: rate_hz must be > 0");
}

void FilterSpec::validate() const {
  if (cutoff_hz <= 0.0) throw ConfigError("FilterSpec: cutoff_hz must be > 0");
  if (order < 1) throw ConfigError("FilterSpec: order must be >= 1");
}

std::vector<double> generate_forcing(const ForcingSpec& spec, std::size_t n) {
  spec.validate();
  if (n == 0) throw ConfigError("generate_forcing: requested 0 samples");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(spec.lower, spec.upper);
  std::vector<double> out(n);
  for (auto& v : out) v = spec.scale_f * unif(rng);
  return out;
}

namespace {

// One biquad (or first-order, with a2 = b2 = 0), direct form II transposed.
struct Sos {
  double b0, b1, b2;
  double a1, a2;
};

// Low-pass Butterworth as second-order sections: analog prototype poles on the
// Butterworth circle at the pre-warped cutoff, mapped by the bilinear
// transform. All zeros land at z = -1; each section is normalized to unit DC
// gain so the cascade has exactly unit gain at z = 1.
std::vector<Sos> design_lowpass(const FilterSpec& spec, double fs_hz) {
  spec.validate();
  if (spec.cutoff_hz >= 0.5 * fs_hz)
    throw ConfigError("butterworth_lowpass: cutoff at or above Nyquist");

  const int n = spec.order;
  const double k = 2.0 * fs_hz;
  const double warped = k * std::tan(M_PI * spec.cutoff_hz / fs_hz);

  std::vector<Sos> sections;
  for (int i = 0; i < n / 2; ++i) {
    const double theta = M_PI * (2.0 * i + 1.0 + n) / (2.0 * n);
    const std::complex<double> p =
        warped * std::complex<double>(std::cos(theta), std::sin(theta));
    const std::complex<double> zp = (k + p) / (k - p);
    Sos s{};
    s.a1 = -2.0 * zp.real();
    s.a2 = std::norm(zp);
    s.b0 = (1.0 + s.a1 + s.a2) / 4.0;
    s.b1 = 2.0 * s.b0;
    s.b2 = s.b0;
    sections.push_back(s);
  }
  if (n % 2 == 1) {
    const double p = -warped;  // real pole
    const double zp = (k + p) / (k - p);
    Sos s{};
    s.a1 = -zp;
    s.a2 = 0.0;
    s.b0 = (1.0 + s.a1) / 2.0;
    s.b1 = s.b0;
    s.b2 = 0.0;
    sections.push_back(s);
  }
  return sections;
}

std::vector<double> run_cascade(const std::vector<double>& x,
                                const std::vector<Sos>& sections) {
  std::vector<double> y = x;
  for (const auto& s : sections) {
    double z1 = 0.0, z2 = 0.0;
    for (auto& v : y) {
      const double in = v;
      v = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * v + z2;
      z2 = s.b2 * in - s.a2 * v;
    }
  }
  return y;
}

}  // namespace

std::vector<double> butterworth_lowpass(const std::vector<double>& signal,
                                        const FilterSpec& spec, double fs_hz) {
  return run_cascade(signal, design_lowpass(spec, fs_hz));
}

std::vector<double> butterworth_lowpass_zero_phase(
    const std::vector<double>& signal, const FilterSpec& spec, double fs_hz) {
  const auto sections = design_lowpass(spec, fs_hz);
  std::vector<double> y = run_cascade(signal, sections);
  std::reverse(y.begin(), y.end());
  y = run_cascade(y, sections);
  std::reverse(y.begin(), y.end());
  return y;
}

std::vector<double> decimate(const std::vector<double>& signal,
                             std::size_t factor) {
  if (factor == 0) throw ConfigError("decimate: factor must be >= 1");
  if (signal.empty()) throw ConfigError("decimate: empty signal");
  std::vector<double> out;
  out.reserve(signal.size() / factor + 1);
  for (std::size_t i = 0; i < signal.size(); i += factor)
    out.push_back(signal[i]);
  return out;
}

}  // namespace mtrvm
