#include "mtrvm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mtrvm/errors.hpp"

namespace mtrvm {

NmseResult nmse(const Eigen::VectorXd& z, const Eigen::VectorXd& z_hat) {
  if (z.size() != z_hat.size()) throw ConfigError("nmse: length mismatch");
  if (z.size() < 2) throw ConfigError("nmse: need at least 2 samples");
  const double n = static_cast<double>(z.size());
  const double mean = z.mean();
  const double var = (z.array() - mean).square().sum() / n;
  if (var <= 0.0)
    throw ConfigError("nmse: constant target, variance undefined");

  NmseResult r;
  r.n = static_cast<std::size_t>(z.size());
  r.target_variance = var;
  r.value = 100.0 / (n * var) * (z - z_hat).squaredNorm();
  return r;
}

namespace {

TermSummary summarize_column(const Eigen::VectorXd& col,
                             const std::string& label) {
  std::vector<double> v(col.data(), col.data() + col.size());
  std::sort(v.begin(), v.end());
  auto q = [&](double f) {
    const double pos = f * double(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - double(lo);
    return lo + 1 < v.size() ? v[lo] * (1.0 - frac) + v[lo + 1] * frac : v[lo];
  };
  TermSummary s;
  s.label = label;
  s.mean = col.mean();
  s.std_dev = col.size() > 1
                  ? std::sqrt((col.array() - s.mean).square().sum() /
                              double(col.size() - 1))
                  : 0.0;
  s.q2_5 = q(0.025);
  s.q25 = q(0.25);
  s.q50 = q(0.5);
  s.q75 = q(0.75);
  s.q97_5 = q(0.975);
  s.active = s.q2_5 > 0.0 || s.q97_5 < 0.0;
  return s;
}

}  // namespace

PosteriorSummary summarize_posterior(const PosteriorChain& chain) {
  if (chain.w_draws.rows() < 100)
    throw ConfigError("summarize_posterior: need at least 100 draws");
  PosteriorSummary out;
  for (Eigen::Index j = 0; j < chain.w_draws.cols(); ++j)
    out.terms.push_back(summarize_column(
        chain.w_draws.col(j),
        chain.basis.labels[static_cast<std::size_t>(j)]));
  for (Eigen::Index l = 0; l < chain.sigma2_draws.cols(); ++l)
    out.sigma2.push_back(summarize_column(chain.sigma2_draws.col(l),
                                          "task" + std::to_string(l)));
  return out;
}

RecoveryReport recovery_report(const PosteriorSummary& summary,
                               const Eigen::VectorXd& truth) {
  if (truth.size() != static_cast<Eigen::Index>(summary.terms.size()))
    throw ConfigError("recovery_report: dimension mismatch");
  RecoveryReport rep;
  rep.signed_error.resize(truth.size());
  rep.active_match.resize(summary.terms.size());
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    const auto& term = summary.terms[static_cast<std::size_t>(j)];
    rep.signed_error(j) = term.mean - truth(j);
    rep.active_match[static_cast<std::size_t>(j)] =
        term.active == (truth(j) != 0.0);
  }
  rep.l2_distance = rep.signed_error.norm();
  rep.full_active_match = std::all_of(rep.active_match.begin(),
                                      rep.active_match.end(),
                                      [](bool b) { return b; });
  return rep;
}

void write_weight_summary_csv(const std::string& path,
                              const PosteriorSummary& summary) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << "term,mean,std,q2.5,q25,q50,q75,q97.5,active\n";
  char buf[256];
  auto row = [&](const TermSummary& s) {
    std::snprintf(buf, sizeof(buf),
                  "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                  s.label.c_str(), s.mean, s.std_dev, s.q2_5, s.q25, s.q50,
                  s.q75, s.q97_5, s.active ? 1 : 0);
    os << buf;
  };
  for (const auto& s : summary.terms) row(s);
  for (const auto& s : summary.sigma2) row(s);
}

void write_nmse_csv(const std::string& path,
                    const std::vector<NmseRecord>& rows) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << "scenario,replicate,excitation_scale,nmse\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.17g,%.17g\n",
                  r.scenario.c_str(), r.replicate, r.excitation_scale,
                  r.value);
    os << buf;
  }
}

}  // namespace mtrvm
