#pragma once

#include <random>

namespace mtrvm {

// One draw from the generalized inverse Gaussian distribution with density
//   p(x) ∝ x^{p-1} exp(-(chi/x + psi*x)/2),  x > 0.
// Boundary cases: psi = 0 requires p < 0 (inverse gamma), chi = 0 requires
// p > 0 (gamma). Uses ratio-of-uniforms with mode shift; exact, no tuning.
double sample_gig(std::mt19937_64& rng, double p, double chi, double psi);

// Inverse gamma with shape/scale parameters, via 1/Gamma.
double sample_inverse_gamma(std::mt19937_64& rng, double shape, double scale);

}  // namespace mtrvm
