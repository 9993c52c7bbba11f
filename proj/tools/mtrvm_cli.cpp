// Command-line front end: simulate datasets, fit single- or multi-task
// models, evaluate posteriors, and run the full reproduction pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtrvm/errors.hpp"
#include "mtrvm/experiments.hpp"

namespace fs = std::filesystem;
using namespace mtrvm;

namespace {

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<double> scales;
  std::size_t iterations = 0;
  std::size_t burn_in = std::size_t(-1);
  std::vector<double> hyper;  // a,b,lambda
  std::string output;
  bool summary_only = false;
  std::size_t replicates = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "Scenario config file (JSON)");
  cmd->add_option("--seed", o.seed, "Master seed")->each([&](const std::string&) {
    o.seed_set = true;
  });
  cmd->add_option("--scales", o.scales, "Excitation scales")->delimiter(',');
  cmd->add_option("--iterations", o.iterations, "Gibbs iterations");
  cmd->add_option("--burn-in", o.burn_in, "Burn-in iterations");
  cmd->add_option("--hyper", o.hyper, "Hyperparameters a,b,lambda")
      ->delimiter(',')
      ->expected(3);
  cmd->add_option("--output", o.output, "Output path");
  cmd->add_flag("--summary-only", o.summary_only,
                "Export posterior quantiles instead of full draws");
  cmd->add_option("--replicates", o.replicates, "Replicate count");
}

ScenarioConfig build_config(const CommonOpts& o) {
  ScenarioConfig cfg;
  if (!o.config_path.empty()) cfg = load_scenario_file(o.config_path);
  if (o.seed_set) cfg.master_seed = o.seed;
  if (!o.scales.empty()) {
    cfg.excitation_scales = o.scales;
    cfg.mode = o.scales.size() > 1 ? TaskMode::multi_task
                                   : TaskMode::single_task;
  }
  if (o.iterations) cfg.chain.n_iterations = o.iterations;
  if (o.burn_in != std::size_t(-1)) cfg.chain.n_burn_in = o.burn_in;
  if (!o.hyper.empty()) {
    cfg.hyper.a = o.hyper[0];
    cfg.hyper.b = o.hyper[1];
    cfg.hyper.lambda = o.hyper[2];
  }
  if (o.replicates) cfg.replicates = o.replicates;
  return cfg;
}

void write_dataset_with_sidecar(const std::string& path,
                                const ScenarioConfig& cfg, std::size_t index,
                                const Dataset& data) {
  write_dataset_csv(path, data);
  nlohmann::json meta;
  meta["fs"] = data.fs;
  meta["label"] = data.label;
  meta["oscillator"] = {{"m", cfg.oscillator.m},
                       {"c", cfg.oscillator.c},
                       {"k1", cfg.oscillator.k1},
                       {"k3", cfg.oscillator.k3}};
  meta["forcing_seed"] = derive_seed(cfg.master_seed, 0, index);
  meta["noise_seed"] = derive_seed(cfg.master_seed, 0, 1000 + index);
  meta["config_hash"] = config_hash(cfg);
  meta["config"] = nlohmann::json::parse(scenario_to_json(cfg));
  std::ofstream os(path + ".meta.json");
  if (!os) throw ConfigError("cannot write sidecar for " + path);
  os << meta.dump(2) << "\n";
}

int cmd_simulate(const CommonOpts& o) {
  ScenarioConfig cfg = build_config(o);
  cfg.validate();
  const std::string out = o.output.empty() ? "dataset.csv" : o.output;
  for (std::size_t i = 0; i < cfg.excitation_scales.size(); ++i) {
    Dataset data = simulate_task(cfg, 0, i);
    std::string path = out;
    if (cfg.excitation_scales.size() > 1) {
      char tag[48];
      std::snprintf(tag, sizeof(tag), "_f%g", cfg.excitation_scales[i]);
      const auto dot = path.rfind(".csv");
      path = dot == std::string::npos ? path + tag : path.substr(0, dot) + tag + ".csv";
    }
    write_dataset_with_sidecar(path, cfg, i, data);
    std::cout << "wrote " << path << " (" << data.size() << " samples)\n";
  }
  return 0;
}

int cmd_fit(const CommonOpts& o, const std::vector<std::string>& inputs,
            const std::string& mode) {
  if (inputs.empty()) throw ConfigError("fit: no input datasets");
  if (mode != "st" && mode != "mt")
    throw ConfigError("fit: --mode must be st or mt");
  if (mode == "st" && inputs.size() != 1)
    throw ConfigError("fit: st mode takes exactly one dataset");
  if (mode == "mt" && inputs.size() < 2)
    throw ConfigError("fit: mt mode takes at least two datasets");

  ScenarioConfig cfg = build_config(o);
  const BasisSpec basis = BasisSpec::standard();
  std::vector<TaskData> tasks;
  for (const auto& path : inputs)
    tasks.push_back(make_task_data(read_dataset_csv(path), basis));

  ChainConfig chain_cfg = cfg.chain;
  chain_cfg.seed = cfg.master_seed;
  PosteriorChain chain = run_gibbs(tasks, cfg.hyper, chain_cfg);

  const std::string out = o.output.empty() ? "posterior.json" : o.output;
  std::ofstream os(out);
  if (!os) throw ConfigError("cannot open for writing: " + out);
  os << chain_to_json(chain, chain_cfg, o.summary_only) << "\n";
  std::cout << "wrote " << out << "\n";
  if (chain.diagnostics.low_ess_warning)
    std::cerr << "warning: effective sample size below floor; consider more "
                 "iterations\n";
  return 0;
}

int cmd_evaluate(const CommonOpts& o, const std::string& posterior_path,
                 const std::vector<std::string>& inputs) {
  if (inputs.empty()) throw ConfigError("evaluate: no input datasets");
  ScenarioConfig cfg = build_config(o);

  std::ifstream is(posterior_path);
  if (!is) throw ConfigError("cannot open posterior: " + posterior_path);
  nlohmann::json pj;
  try {
    is >> pj;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("posterior parse error: ") + e.what());
  }

  PosteriorSummary summary;
  const auto labels = pj.at("basis").get<std::vector<std::string>>();
  Eigen::VectorXd w_mean(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const auto& s = pj.at("w_summary").at(j);
    TermSummary t;
    t.label = labels[j];
    t.mean = s.at("mean").get<double>();
    t.std_dev = s.at("std").get<double>();
    t.q2_5 = s.at("q2.5").get<double>();
    t.q50 = s.at("q50").get<double>();
    t.q25 = t.q2_5;   // quartiles not exported; carry the CI bounds
    t.q75 = t.q97_5 = s.at("q97.5").get<double>();
    t.active = t.q2_5 > 0.0 || t.q97_5 < 0.0;
    summary.terms.push_back(t);
    w_mean(static_cast<Eigen::Index>(j)) = t.mean;
  }

  const BasisSpec basis{labels};
  const std::string out_dir = o.output.empty() ? "." : o.output;
  fs::create_directories(out_dir);

  std::vector<NmseRecord> rows;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    TaskData task = make_task_data(read_dataset_csv(inputs[i]), basis);
    const auto r = nmse(task.target, predict_response(w_mean, task));
    rows.push_back({inputs[i], 0, 0.0, r.value});
    std::cout << inputs[i] << ": NMSE = " << r.value << "\n";
  }
  write_nmse_csv((fs::path(out_dir) / "nmse.csv").string(), rows);

  const auto report =
      recovery_report(summary, true_weight_vector(cfg.oscillator, basis));
  std::ofstream os(fs::path(out_dir) / "recovery.csv");
  os << "term,posterior_mean,true_weight,signed_error,active_match\n";
  const Eigen::VectorXd truth = true_weight_vector(cfg.oscillator, basis);
  char buf[200];
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%d\n",
                  labels[j].c_str(), summary.terms[j].mean, truth(k),
                  report.signed_error(k), report.active_match[j] ? 1 : 0);
    os << buf;
  }
  std::cout << "recovery L2 distance = " << report.l2_distance << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task Bayesian equation discovery for oscillator data"};
  app.require_subcommand(1);

  CommonOpts sim_o, fit_o, eval_o, rep_o, study_o;
  std::vector<std::string> fit_inputs, eval_inputs;
  std::string fit_mode = "st", eval_posterior;

  auto* sim = app.add_subcommand("simulate", "Generate dataset CSVs");
  add_common(sim, sim_o);

  auto* fit = app.add_subcommand("fit", "Fit a posterior to dataset CSVs");
  add_common(fit, fit_o);
  fit->add_option("datasets", fit_inputs, "Input dataset CSVs");
  fit->add_option("--mode", fit_mode, "st or mt");

  auto* ev = app.add_subcommand("evaluate", "Evaluate a posterior JSON");
  add_common(ev, eval_o);
  ev->add_option("--posterior", eval_posterior, "Posterior JSON")->required();
  ev->add_option("datasets", eval_inputs, "Input dataset CSVs");

  auto* rep = app.add_subcommand("reproduce", "Run the full pipeline");
  add_common(rep, rep_o);

  auto* study = app.add_subcommand("study", "Replicated ST/MT NMSE study");
  add_common(study, study_o);
  bool study_holdout = false;
  study->add_flag("--holdout", study_holdout,
                  "Score NMSE on fresh datasets instead of the training data");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_o);
    if (fit->parsed()) return cmd_fit(fit_o, fit_inputs, fit_mode);
    if (ev->parsed()) return cmd_evaluate(eval_o, eval_posterior, eval_inputs);
    if (rep->parsed()) {
      ScenarioConfig cfg = build_config(rep_o);
      const std::string out = rep_o.output.empty() ? "reproduction" : rep_o.output;
      reproduce_paper(out, cfg);
      std::cout << "wrote " << out << "/\n";
      return 0;
    }
    if (study->parsed()) {
      ScenarioConfig cfg = build_config(study_o);
      if (cfg.excitation_scales.size() < 2)
        cfg.excitation_scales = {1e1, 1e2, 1e3};
      cfg.mode = TaskMode::multi_task;
      if (study_holdout) cfg.holdout_nmse = true;
      if (!study_o.replicates) cfg.replicates = 100;
      StudyResult res = run_nmse_study(cfg);
      const std::string out = study_o.output.empty() ? "study" : study_o.output;
      fs::create_directories(out);
      std::vector<NmseRecord> rows;
      for (std::size_t r = 0; r < res.st.size(); ++r)
        for (std::size_t i = 0; i < res.scales.size(); ++i) {
          if (!res.st[r][i].failed)
            rows.push_back({"st", r, res.scales[i], res.st[r][i].nmse});
          if (!res.mt[r][i].failed)
            rows.push_back({"mt", r, res.scales[i], res.mt[r][i].nmse});
        }
      write_nmse_csv((fs::path(out) / "nmse.csv").string(), rows);
      for (std::size_t i = 0; i < res.scales.size(); ++i) {
        const auto& a = res.aggregates[i];
        std::printf("f=%g  ST %.3f +/- %.3f   MT %.3f +/- %.3f\n",
                    res.scales[i], a.st_mean, a.st_std, a.mt_mean, a.mt_std);
      }
      if (res.failure_count)
        std::cerr << "warning: " << res.failure_count
                  << " replicate(s) failed\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
