#include "mtrvm/inference.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "mtrvm/diagnostics.hpp"
#include "mtrvm/errors.hpp"
#include "mtrvm/gig.hpp"

namespace mtrvm {

void Hyperparameters::validate() const {
  if (a <= 0.0 || b <= 0.0 || lambda <= 0.0)
    throw ConfigError("Hyperparameters: a, b, lambda must all be > 0");
}

void TaskData::validate() const {
  design.validate();
  if (target.size() != design.values.rows() ||
      force.size() != design.values.rows())
    throw ConfigError("TaskData: design rows != target/force length");
}

TaskData make_task_data(const Dataset& data, const BasisSpec& basis) {
  TaskData task;
  task.design = build_design_matrix(data, basis);
  task.target = Eigen::Map<const Eigen::VectorXd>(
      data.yddot.data(), static_cast<Eigen::Index>(data.yddot.size()));
  task.force = Eigen::Map<const Eigen::VectorXd>(
      data.force.data(), static_cast<Eigen::Index>(data.force.size()));
  task.validate();
  return task;
}

void ChainConfig::validate() const {
  if (n_iterations == 0) throw ConfigError("ChainConfig: n_iterations == 0");
  if (n_burn_in >= n_iterations)
    throw ConfigError("ChainConfig: n_burn_in must be < n_iterations");
  if (thinning < 1) throw ConfigError("ChainConfig: thinning must be >= 1");
  if (sigma2_floor < 0.0) throw ConfigError("ChainConfig: negative sigma2_floor");
}

namespace {

struct TaskPrecomp {
  Eigen::MatrixXd gram;       // D^T D
  Eigen::VectorXd cross;      // D^T (y - F)
  Eigen::VectorXd response;   // y - F
};

std::vector<TaskPrecomp> precompute(const std::vector<TaskData>& tasks) {
  std::vector<TaskPrecomp> pre;
  pre.reserve(tasks.size());
  for (const auto& t : tasks) {
    TaskPrecomp p;
    p.response = t.target - t.force;
    p.gram = t.design.values.transpose() * t.design.values;
    p.cross = t.design.values.transpose() * p.response;
    pre.push_back(std::move(p));
  }
  return pre;
}

// Cholesky of the posterior precision with escalating jitter on failure.
Eigen::LLT<Eigen::MatrixXd> factor_precision(Eigen::MatrixXd precision) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() == Eigen::Success) return llt;
  double jitter = 1e-10 * precision.diagonal().mean();
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::MatrixXd bumped = precision;
    bumped.diagonal().array() += jitter;
    llt.compute(bumped);
    if (llt.info() == Eigen::Success) return llt;
    jitter *= 10.0;
  }
  throw NumericalError(
      "sample_weights_conditional: posterior precision not SPD after jitter");
}

Eigen::VectorXd draw_weights(const std::vector<TaskPrecomp>& pre,
                             const Eigen::VectorXd& alpha2,
                             const Eigen::VectorXd& sigma2,
                             std::mt19937_64& rng) {
  const Eigen::Index m = alpha2.size();
  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t l = 0; l < pre.size(); ++l) {
    precision += pre[l].gram / sigma2(static_cast<Eigen::Index>(l));
    rhs += pre[l].cross / sigma2(static_cast<Eigen::Index>(l));
  }
  precision += alpha2.cwiseInverse().asDiagonal();

  const auto llt = factor_precision(std::move(precision));
  const Eigen::VectorXd mu = llt.solve(rhs);

  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd z(m);
  for (Eigen::Index j = 0; j < m; ++j) z(j) = gauss(rng);
  // w = mu + L^{-T} z has covariance P^{-1}
  return mu + llt.matrixU().solve(z);
}

}  // namespace

GaussianMoments weights_conditional_moments(const std::vector<TaskData>& tasks,
                                            const Eigen::VectorXd& alpha2,
                                            const Eigen::VectorXd& sigma2) {
  if (tasks.empty())
    throw ConfigError("weights_conditional_moments: no tasks");
  const auto pre = precompute(tasks);
  const Eigen::Index m = alpha2.size();
  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t l = 0; l < pre.size(); ++l) {
    precision += pre[l].gram / sigma2(static_cast<Eigen::Index>(l));
    rhs += pre[l].cross / sigma2(static_cast<Eigen::Index>(l));
  }
  precision += alpha2.cwiseInverse().asDiagonal();
  const auto llt = factor_precision(precision);
  GaussianMoments mom;
  mom.mean = llt.solve(rhs);
  mom.covariance = llt.solve(Eigen::MatrixXd::Identity(m, m));
  return mom;
}

Eigen::VectorXd sample_weights_conditional(const std::vector<TaskData>& tasks,
                                           const Eigen::VectorXd& alpha2,
                                           const Eigen::VectorXd& sigma2,
                                           std::mt19937_64& rng) {
  if (tasks.empty()) throw ConfigError("sample_weights_conditional: no tasks");
  if (sigma2.size() != static_cast<Eigen::Index>(tasks.size()))
    throw ConfigError("sample_weights_conditional: sigma2 size != task count");
  if ((alpha2.array() <= 0.0).any() || (sigma2.array() <= 0.0).any())
    throw ConfigError("sample_weights_conditional: variances must be > 0");
  for (const auto& t : tasks) {
    t.validate();
    if (t.design.values.cols() != alpha2.size())
      throw ConfigError("sample_weights_conditional: alpha2 size != M");
  }
  return draw_weights(precompute(tasks), alpha2, sigma2, rng);
}

Eigen::VectorXd sample_alpha2_conditional(const Eigen::VectorXd& w,
                                          const Hyperparameters& hyper,
                                          std::mt19937_64& rng) {
  hyper.validate();
  Eigen::VectorXd alpha2(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j)
    alpha2(j) = sample_inverse_gamma(rng, hyper.a + 0.5,
                                     hyper.b + 0.5 * w(j) * w(j));
  return alpha2;
}

double sample_sigma2_conditional(const TaskData& task,
                                 const Eigen::VectorXd& w,
                                 const Hyperparameters& hyper,
                                 std::mt19937_64& rng) {
  hyper.validate();
  task.validate();
  const Eigen::VectorXd resid = task.target - task.force - task.design.values * w;
  const double sse = resid.squaredNorm();
  const double n_l = static_cast<double>(task.n());
  if (sse == 0.0 && n_l > 2)
    throw ConfigError(
        "sample_sigma2_conditional: zero residual, posterior degenerate at 0; "
        "add measurement noise or use the sampler's sigma2 floor");
  return sample_gig(rng, 1.0 - 0.5 * n_l, sse, 2.0 * hyper.lambda);
}

PosteriorChain run_gibbs(const std::vector<TaskData>& tasks,
                         const Hyperparameters& hyper,
                         const ChainConfig& config) {
  hyper.validate();
  config.validate();
  if (tasks.empty()) throw ConfigError("run_gibbs: no tasks");
  const Eigen::Index m = tasks.front().design.values.cols();
  for (const auto& t : tasks) {
    t.validate();
    if (t.design.values.cols() != m)
      throw ConfigError("run_gibbs: tasks disagree on dictionary size");
    if (t.design.basis.labels != tasks.front().design.basis.labels)
      throw ConfigError("run_gibbs: tasks disagree on basis labels");
  }
  const auto n_tasks = static_cast<Eigen::Index>(tasks.size());

  const auto pre = precompute(tasks);
  std::mt19937_64 rng(config.seed);

  // Initial state
  Eigen::VectorXd w(m), alpha2(m), sigma2(n_tasks);
  if (config.init_strategy == InitStrategy::ridge) {
    Eigen::MatrixXd reg = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (const auto& p : pre) {
      reg += p.gram;
      rhs += p.cross;
    }
    w = factor_precision(std::move(reg)).solve(rhs);
    alpha2 = w.array().square().max(1e-6);
    for (Eigen::Index l = 0; l < n_tasks; ++l) {
      const auto& t = tasks[static_cast<std::size_t>(l)];
      const Eigen::VectorXd r = t.target - t.force - t.design.values * w;
      sigma2(l) = std::max(r.squaredNorm() / std::max(1.0, double(t.n())),
                           config.sigma2_floor);
    }
  } else {
    w.setZero();
    alpha2.setOnes();
    sigma2.setOnes();
  }
  if (config.init_alpha2.size() > 0) {
    if (config.init_alpha2.size() != m)
      throw ConfigError("run_gibbs: init_alpha2 size != M");
    alpha2 = config.init_alpha2;
  }
  if (config.init_sigma2.size() > 0) {
    if (config.init_sigma2.size() != n_tasks)
      throw ConfigError("run_gibbs: init_sigma2 size != L");
    sigma2 = config.init_sigma2;
  }
  if ((alpha2.array() <= 0.0).any() || (sigma2.array() <= 0.0).any())
    throw ConfigError("run_gibbs: initial variances must be > 0");

  const std::size_t kept = config.n_kept();
  PosteriorChain chain;
  chain.basis = tasks.front().design.basis;
  chain.w_draws.resize(static_cast<Eigen::Index>(kept), m);
  chain.alpha2_draws.resize(static_cast<Eigen::Index>(kept), m);
  chain.sigma2_draws.resize(static_cast<Eigen::Index>(kept), n_tasks);

  Eigen::Index row = 0;
  for (std::size_t it = 0; it < config.n_iterations; ++it) {
    w = draw_weights(pre, alpha2, sigma2, rng);

    if (config.update_alpha2) alpha2 = sample_alpha2_conditional(w, hyper, rng);

    if (config.update_sigma2) {
      for (Eigen::Index l = 0; l < n_tasks; ++l) {
        const auto& p = pre[static_cast<std::size_t>(l)];
        const auto& t = tasks[static_cast<std::size_t>(l)];
        const Eigen::VectorXd r = p.response - t.design.values * w;
        const double sse = std::max(r.squaredNorm(), config.sigma2_floor);
        sigma2(l) = std::max(
            sample_gig(rng, 1.0 - 0.5 * double(t.n()), sse,
                       2.0 * hyper.lambda),
            config.sigma2_floor);
      }
    }

    if (!w.allFinite() || !alpha2.allFinite() || !sigma2.allFinite())
      throw NumericalError("run_gibbs: non-finite draw at iteration " +
                           std::to_string(it));

    if (it >= config.n_burn_in &&
        (it - config.n_burn_in) % config.thinning == 0 && row < chain.w_draws.rows()) {
      chain.w_draws.row(row) = w.transpose();
      chain.alpha2_draws.row(row) = alpha2.transpose();
      chain.sigma2_draws.row(row) = sigma2.transpose();
      ++row;
    }
  }

  auto diag_columns = [](const Eigen::MatrixXd& draws, Eigen::VectorXd& ess,
                         Eigen::VectorXd& rhat) {
    ess.resize(draws.cols());
    rhat.resize(draws.cols());
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
      ess(j) = effective_sample_size(draws.col(j));
      rhat(j) = split_rhat(draws.col(j));
    }
  };
  auto& d = chain.diagnostics;
  diag_columns(chain.w_draws, d.ess_w, d.rhat_w);
  diag_columns(chain.alpha2_draws, d.ess_alpha2, d.rhat_alpha2);
  diag_columns(chain.sigma2_draws, d.ess_sigma2, d.rhat_sigma2);
  d.low_ess_warning = d.ess_w.minCoeff() < config.ess_warn_floor;

  return chain;
}

Eigen::VectorXd predict_response(const Eigen::VectorXd& weights,
                                 const TaskData& task) {
  if (weights.size() != task.design.values.cols())
    throw ConfigError("predict_response: weight dimension != task M");
  return task.design.values * weights + task.force;
}

Prediction predict_response(const PosteriorChain& chain,
                            const TaskData& task) {
  if (chain.w_draws.cols() != task.design.values.cols())
    throw ConfigError("predict_response: chain dimension != task M");
  const Eigen::VectorXd w_mean = chain.w_draws.colwise().mean().transpose();

  Prediction p;
  p.mean = predict_response(w_mean, task);

  const Eigen::Index s = chain.w_draws.rows();
  const Eigen::Index n = task.design.values.rows();
  // Per-draw predictions, pointwise 2.5/97.5% quantiles.
  Eigen::MatrixXd preds = chain.w_draws * task.design.values.transpose();
  preds.rowwise() += task.force.transpose();
  p.lower.resize(n);
  p.upper.resize(n);
  std::vector<double> col(static_cast<std::size_t>(s));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < s; ++k)
      col[static_cast<std::size_t>(k)] = preds(k, i);
    std::sort(col.begin(), col.end());
    auto q = [&](double f) {
      const double pos = f * double(s - 1);
      const auto lo = static_cast<std::size_t>(pos);
      const double frac = pos - double(lo);
      return lo + 1 < col.size() ? col[lo] * (1.0 - frac) + col[lo + 1] * frac
                                 : col[lo];
    };
    p.lower(i) = q(0.025);
    p.upper(i) = q(0.975);
  }
  return p;
}

std::string chain_to_json(const PosteriorChain& chain,
                          const ChainConfig& config, bool summary_only) {
  using nlohmann::json;
  json out;
  out["basis"] = chain.basis.labels;
  out["config"] = {{"n_iterations", config.n_iterations},
                   {"n_burn_in", config.n_burn_in},
                   {"thinning", config.thinning},
                   {"seed", config.seed},
                   {"init_strategy", config.init_strategy == InitStrategy::ridge
                                         ? "ridge"
                                         : "zeros"}};

  auto column_summary = [](const Eigen::MatrixXd& draws) {
    json arr = json::array();
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
      std::vector<double> v(draws.rows());
      for (Eigen::Index i = 0; i < draws.rows(); ++i) v[i] = draws(i, j);
      std::sort(v.begin(), v.end());
      auto q = [&](double f) {
        const double pos = f * double(v.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - double(lo);
        return lo + 1 < v.size() ? v[lo] * (1.0 - frac) + v[lo + 1] * frac
                                 : v[lo];
      };
      const double mean = draws.col(j).mean();
      const double sd = std::sqrt(
          (draws.col(j).array() - mean).square().sum() /
          std::max<double>(1.0, double(draws.rows() - 1)));
      arr.push_back({{"mean", mean},
                     {"std", sd},
                     {"q2.5", q(0.025)},
                     {"q50", q(0.5)},
                     {"q97.5", q(0.975)}});
    }
    return arr;
  };

  if (!summary_only) {
    json wd = json::array();
    for (Eigen::Index i = 0; i < chain.w_draws.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < chain.w_draws.cols(); ++j)
        row.push_back(chain.w_draws(i, j));
      wd.push_back(std::move(row));
    }
    out["w_draws"] = std::move(wd);
  }
  out["w_summary"] = column_summary(chain.w_draws);
  out["alpha2_summary"] = column_summary(chain.alpha2_draws);
  out["sigma2_summary"] = column_summary(chain.sigma2_draws);

  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  out["diagnostics"] = {{"ess_w", vec(chain.diagnostics.ess_w)},
                        {"ess_alpha2", vec(chain.diagnostics.ess_alpha2)},
                        {"ess_sigma2", vec(chain.diagnostics.ess_sigma2)},
                        {"rhat_w", vec(chain.diagnostics.rhat_w)},
                        {"rhat_alpha2", vec(chain.diagnostics.rhat_alpha2)},
                        {"rhat_sigma2", vec(chain.diagnostics.rhat_sigma2)},
                        {"low_ess_warning", chain.diagnostics.low_ess_warning}};
  return out.dump(2);
}

}  // namespace mtrvm
