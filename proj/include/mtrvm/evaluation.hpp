#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mtrvm/inference.hpp"

namespace mtrvm {

// Normalised mean-square error, in percent: 100/(N*var(z)) * sum (z - zhat)^2
// with population (1/N) variance, so predicting the mean scores exactly 100.
struct NmseResult {
  double value = 0.0;
  std::size_t n = 0;
  double target_variance = 0.0;
};

NmseResult nmse(const Eigen::VectorXd& z, const Eigen::VectorXd& z_hat);

struct TermSummary {
  std::string label;
  double mean, std_dev;
  double q2_5, q25, q50, q75, q97_5;
  bool active;  // 95% credible interval excludes 0
};

struct PosteriorSummary {
  std::vector<TermSummary> terms;
  std::vector<TermSummary> sigma2;  // per task, label = task index
};

PosteriorSummary summarize_posterior(const PosteriorChain& chain);

struct RecoveryReport {
  Eigen::VectorXd signed_error;     // posterior mean - true weight
  double l2_distance = 0.0;
  std::vector<bool> active_match;   // per-term: active flag == (truth != 0)
  bool full_active_match = false;
};

RecoveryReport recovery_report(const PosteriorSummary& summary,
                               const Eigen::VectorXd& truth);

// Plot-ready CSV emitters.
void write_weight_summary_csv(const std::string& path,
                              const PosteriorSummary& summary);

struct NmseRecord {
  std::string scenario;
  std::size_t replicate;
  double excitation_scale;
  double value;
};
void write_nmse_csv(const std::string& path,
                    const std::vector<NmseRecord>& rows);

}  // namespace mtrvm
