#include "mtrvm/gig.hpp"

#include <cmath>
#include <string>

#include "mtrvm/errors.hpp"

namespace mtrvm {

double sample_inverse_gamma(std::mt19937_64& rng, double shape, double scale) {
  if (shape <= 0.0 || scale <= 0.0)
    throw ConfigError("sample_inverse_gamma: shape and scale must be > 0");
  std::gamma_distribution<double> gamma(shape, 1.0);
  double g = gamma(rng);
  while (g == 0.0) g = gamma(rng);  // guard against underflow at tiny shape
  return scale / g;
}

namespace {

// Standardized two-parameter form: density ∝ x^{lam-1} exp(-omega*(x+1/x)/2)
// with lam >= 0, omega > 0. Log-density relative to the mode.
struct GigCore {
  double lam, omega, xm, hm;

  double h(double x) const {
    return (lam - 1.0) * std::log(x) - 0.5 * omega * (x + 1.0 / x);
  }
  double hprime(double x) const {
    return (lam - 1.0) / x - 0.5 * omega + 0.5 * omega / (x * x);
  }
};

// Root of (x - xm)*h'(x) + 2 = 0 on one side of the mode, by bisection.
// g is +2 at the mode and -> -inf toward both ends of the support.
double u_extremum(const GigCore& c, bool upper) {
  auto g = [&](double x) { return (x - c.xm) * c.hprime(x) + 2.0; };
  double inner = c.xm, outer = c.xm;
  double step = c.xm > 0.0 ? c.xm : 1.0;
  for (int i = 0; i < 400; ++i) {
    outer = upper ? outer + step : outer * 0.5;
    if (g(outer) < 0.0) break;
    if (upper) step *= 2.0;
  }
  if (g(outer) >= 0.0)
    throw NumericalError("sample_gig: failed to bracket envelope extremum");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (inner + outer);
    (g(mid) > 0.0 ? inner : outer) = mid;
  }
  return 0.5 * (inner + outer);
}

double sample_gig_core(std::mt19937_64& rng, double lam, double omega) {
  GigCore c{};
  c.lam = lam;
  c.omega = omega;
  c.xm = ((lam - 1.0) + std::hypot(lam - 1.0, omega)) / omega;
  if (!(c.xm > 0.0))  // lam < 1: mode formula can underflow; solve from 1/xm
    c.xm = omega / (std::hypot(lam - 1.0, omega) - (lam - 1.0));
  c.hm = c.h(c.xm);

  const double xlo = u_extremum(c, false);
  const double xhi = u_extremum(c, true);
  const double ulo = (xlo - c.xm) * std::exp(0.5 * (c.h(xlo) - c.hm));
  const double uhi = (xhi - c.xm) * std::exp(0.5 * (c.h(xhi) - c.hm));

  std::uniform_real_distribution<double> unif_u(ulo, uhi);
  std::uniform_real_distribution<double> unif_v(0.0, 1.0);
  for (long attempt = 0; attempt < 1000000; ++attempt) {
    const double v = unif_v(rng);
    if (v == 0.0) continue;
    const double x = unif_u(rng) / v + c.xm;
    if (x <= 0.0) continue;
    if (2.0 * std::log(v) <= c.h(x) - c.hm) return x;
  }
  throw NumericalError("sample_gig: rejection loop did not terminate");
}

}  // namespace

double sample_gig(std::mt19937_64& rng, double p, double chi, double psi) {
  if (chi < 0.0 || psi < 0.0)
    throw ConfigError("sample_gig: chi and psi must be >= 0");
  if (psi == 0.0) {
    if (p >= 0.0)
      throw ConfigError("sample_gig: psi = 0 requires p < 0 (inverse gamma)");
    return sample_inverse_gamma(rng, -p, 0.5 * chi);
  }
  if (chi == 0.0) {
    if (p <= 0.0)
      throw ConfigError(
          "sample_gig: degenerate case chi = 0 with p <= 0; the posterior "
          "collapses at 0 — add measurement noise or apply a variance floor");
    std::gamma_distribution<double> gamma(p, 2.0 / psi);
    return gamma(rng);
  }

  const double alpha = std::sqrt(chi / psi);
  const double omega = std::sqrt(chi * psi);
  if (!std::isfinite(alpha) || !std::isfinite(omega) || omega == 0.0)
    throw NumericalError("sample_gig: parameters out of double range (p=" +
                         std::to_string(p) + ")");

  // X ~ GIG(p, chi, psi) <=> X = alpha * Z, Z ~ gig(p, omega);
  // and gig(-p, omega) draws are reciprocals of gig(p, omega) draws.
  if (p >= 0.0) return alpha * sample_gig_core(rng, p, omega);
  return alpha / sample_gig_core(rng, -p, omega);
}

}  // namespace mtrvm
