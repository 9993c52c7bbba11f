#include "mtrvm/diagnostics.hpp"

#include <cmath>
#include <limits>

namespace mtrvm {

double effective_sample_size(const Eigen::VectorXd& draws) {
  const auto n = draws.size();
  if (n < 4) return static_cast<double>(n);

  const double mean = draws.mean();
  const Eigen::VectorXd centred = draws.array() - mean;
  const double var = centred.squaredNorm() / static_cast<double>(n);
  if (var <= 0.0) return static_cast<double>(n);  // constant chain

  // Autocovariances, summed in Geyer pairs while positive.
  double tail = 0.0;
  for (Eigen::Index lag = 1; lag + 1 < n; lag += 2) {
    double g0 = centred.head(n - lag).dot(centred.tail(n - lag)) /
                static_cast<double>(n);
    double g1 = centred.head(n - lag - 1).dot(centred.tail(n - lag - 1)) /
                static_cast<double>(n);
    const double pair = (g0 + g1) / var;
    if (pair <= 0.0) break;
    tail += pair;
  }
  const double ess = static_cast<double>(n) / (1.0 + 2.0 * tail);
  return std::min(ess, static_cast<double>(n));
}

double split_rhat(const Eigen::VectorXd& draws) {
  const auto n = draws.size();
  if (n < 8) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::Index half = n / 2;
  const Eigen::VectorXd a = draws.head(half);
  const Eigen::VectorXd b = draws.segment(half, half);

  const double ma = a.mean(), mb = b.mean();
  const double va = (a.array() - ma).square().sum() / double(half - 1);
  const double vb = (b.array() - mb).square().sum() / double(half - 1);
  const double w = 0.5 * (va + vb);
  if (w <= 0.0) return 1.0;
  const double mu = 0.5 * (ma + mb);
  const double bvar =
      double(half) * ((ma - mu) * (ma - mu) + (mb - mu) * (mb - mu));
  const double var_plus = (double(half - 1) / double(half)) * w +
                          bvar / double(half);
  return std::sqrt(var_plus / w);
}

}  // namespace mtrvm
