#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mtrvm/simulator.hpp"

namespace mtrvm {

// Ordered list of candidate-term labels. Supported labels:
//   y, ydot, y^2, ydot^2, y^3, ydot^3, 1
struct BasisSpec {
  std::vector<std::string> labels;

  static BasisSpec standard();  // [y, ydot, y^2, ydot^2, y^3, ydot^3, 1]
  std::size_t term_count() const { return labels.size(); }
  void validate() const;
};

// N x M evaluation of the candidate terms on one dataset's states.
struct DesignMatrix {
  Eigen::MatrixXd values;
  BasisSpec basis;
  std::string task_label;

  void validate() const;
};

DesignMatrix build_design_matrix(const Dataset& data, const BasisSpec& basis);

// Ground-truth weights for the oscillator under the m-division convention:
// yddot = F/m - (c/m)*ydot - (k1/m)*y - (k3/m)*y^3.
Eigen::VectorXd true_weight_vector(const OscillatorParams& params,
                                   const BasisSpec& basis);

void write_design_matrix_csv(const std::string& path, const DesignMatrix& dm);

}  // namespace mtrvm
