#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mtrvm/dictionary.hpp"

namespace mtrvm {

// Fixed knobs of the hierarchical model: inverse-gamma (a, b) on the
// per-term weight variances, exponential rate lambda on the noise variances.
struct Hyperparameters {
  double a = 1e-3;
  double b = 1e-3;
  double lambda = 1.0;

  void validate() const;
};

// One task's regression data. target is the recorded acceleration; the
// regression response is target - force (the force enters with unit
// coefficient and is not a dictionary column).
struct TaskData {
  DesignMatrix design;
  Eigen::VectorXd target;
  Eigen::VectorXd force;

  std::size_t n() const { return static_cast<std::size_t>(target.size()); }
  void validate() const;
};

TaskData make_task_data(const Dataset& data, const BasisSpec& basis);

enum class InitStrategy { ridge, zeros };

struct ChainConfig {
  std::size_t n_iterations = 4000;
  std::size_t n_burn_in = 2000;
  std::size_t thinning = 1;
  std::uint64_t seed = 0;
  InitStrategy init_strategy = InitStrategy::ridge;
  double sigma2_floor = 1e-12;   // SSE clamp guarding the degenerate case
  double ess_warn_floor = 100.0;

  // Test hooks: freeze part of the sampler at its initial values.
  bool update_alpha2 = true;
  bool update_sigma2 = true;
  Eigen::VectorXd init_alpha2;  // optional override, size M
  Eigen::VectorXd init_sigma2;  // optional override, size L

  std::size_t n_kept() const {
    return (n_iterations - n_burn_in) / thinning;
  }
  void validate() const;
};

struct ChainDiagnostics {
  Eigen::VectorXd ess_w, ess_alpha2, ess_sigma2;
  Eigen::VectorXd rhat_w, rhat_alpha2, rhat_sigma2;
  bool low_ess_warning = false;
};

// Post-burn-in, thinned draws. Rows are kept iterations.
struct PosteriorChain {
  Eigen::MatrixXd w_draws;       // S x M, shared across tasks
  Eigen::MatrixXd alpha2_draws;  // S x M
  Eigen::MatrixXd sigma2_draws;  // S x L
  BasisSpec basis;
  ChainDiagnostics diagnostics;
};

// Closed-form mean and covariance of the weight full conditional:
//   Sigma = (sum_l D_l^T D_l / sigma_l^2 + diag(alpha^2)^{-1})^{-1}
//   mu    = Sigma * sum_l D_l^T (y_l - F_l) / sigma_l^2
struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

GaussianMoments weights_conditional_moments(const std::vector<TaskData>& tasks,
                                            const Eigen::VectorXd& alpha2,
                                            const Eigen::VectorXd& sigma2);

// Full conditionals. All draws consume the passed RNG.
Eigen::VectorXd sample_weights_conditional(const std::vector<TaskData>& tasks,
                                           const Eigen::VectorXd& alpha2,
                                           const Eigen::VectorXd& sigma2,
                                           std::mt19937_64& rng);

Eigen::VectorXd sample_alpha2_conditional(const Eigen::VectorXd& w,
                                          const Hyperparameters& hyper,
                                          std::mt19937_64& rng);

double sample_sigma2_conditional(const TaskData& task,
                                 const Eigen::VectorXd& w,
                                 const Hyperparameters& hyper,
                                 std::mt19937_64& rng);

// Blocked Gibbs over (w | alpha2, sigma2), (alpha2 | w), (sigma2_l | w).
// Single-task inference is the L = 1 case of the same code path.
PosteriorChain run_gibbs(const std::vector<TaskData>& tasks,
                         const Hyperparameters& hyper,
                         const ChainConfig& config);

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;  // 2.5% pointwise
  Eigen::VectorXd upper;  // 97.5% pointwise
};

Prediction predict_response(const PosteriorChain& chain, const TaskData& task);
Eigen::VectorXd predict_response(const Eigen::VectorXd& weights,
                                 const TaskData& task);

// JSON export of a chain (full draws, or quantile summaries only).
std::string chain_to_json(const PosteriorChain& chain,
                          const ChainConfig& config, bool summary_only);

}  // namespace mtrvm
