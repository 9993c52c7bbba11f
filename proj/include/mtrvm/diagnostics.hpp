#pragma once

#include <Eigen/Dense>

namespace mtrvm {

// Effective sample size of one chain via Geyer's initial positive sequence.
double effective_sample_size(const Eigen::VectorXd& draws);

// Split-R̂: the chain is halved and the two halves compared. Near 1 when
// the chain is stationary and well mixed.
double split_rhat(const Eigen::VectorXd& draws);

}  // namespace mtrvm
