#include "mtrvm/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mtrvm/errors.hpp"

namespace mtrvm {

namespace fs = std::filesystem;
using nlohmann::json;

void ScenarioConfig::validate() const {
  if (excitation_scales.empty())
    throw ConfigError("ScenarioConfig: no excitation scales");
  for (double f : excitation_scales)
    if (f <= 0.0) throw ConfigError("ScenarioConfig: scales must be > 0");
  if (mode == TaskMode::single_task && excitation_scales.size() != 1)
    throw ConfigError("ScenarioConfig: single_task requires exactly one scale");
  if (mode == TaskMode::multi_task && excitation_scales.size() < 2)
    throw ConfigError("ScenarioConfig: multi_task requires >= 2 scales");
  if (replicates < 1) throw ConfigError("ScenarioConfig: replicates must be >= 1");
  if (noise_frac < 0.0) throw ConfigError("ScenarioConfig: negative noise_frac");
  oscillator.validate();
  sim.validate();
  hyper.validate();
  chain.validate();
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate,
                          std::uint64_t index) {
  // splitmix64 finalizer over the combined stream id
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (replicate + 1) +
                    0xbf58476d1ce4e5b9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::string scale_tag(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", f);
  return buf;
}

}  // namespace

Dataset simulate_task(const ScenarioConfig& config, std::size_t replicate,
                      std::size_t scale_index, std::uint64_t seed_offset) {
  if (scale_index >= config.excitation_scales.size())
    throw ConfigError("simulate_task: scale index out of range");
  const double f = config.excitation_scales[scale_index];

  ForcingSpec forcing;
  forcing.scale_f = f;
  forcing.rate_hz = 1.0 / config.sim.dt_fast;
  forcing.seed =
      derive_seed(config.master_seed, replicate, seed_offset + scale_index);

  Dataset data =
      simulate_dataset(config.oscillator, forcing, config.sim,
                       "f=" + scale_tag(f));
  if (config.noise_frac > 0.0) {
    const auto n = static_cast<Eigen::Index>(data.yddot.size());
    const double rms = std::sqrt(
        Eigen::Map<const Eigen::VectorXd>(data.yddot.data(), n).squaredNorm() /
        static_cast<double>(n));
    add_measurement_noise(
        data, config.noise_frac * rms,
        derive_seed(config.master_seed, replicate,
                    seed_offset + 1000 + scale_index));
  }
  return data;
}

namespace {

ScenarioResult fit_and_evaluate(const ScenarioConfig& config,
                                std::vector<Dataset> datasets,
                                std::uint64_t chain_seed) {
  const BasisSpec basis = BasisSpec::standard();
  std::vector<TaskData> tasks;
  tasks.reserve(datasets.size());
  for (const auto& d : datasets) tasks.push_back(make_task_data(d, basis));

  ChainConfig chain_cfg = config.chain;
  chain_cfg.seed = chain_seed;

  ScenarioResult result;
  result.chain = run_gibbs(tasks, config.hyper, chain_cfg);
  result.summary = summarize_posterior(result.chain);
  result.recovery = recovery_report(
      result.summary, true_weight_vector(config.oscillator, basis));
  for (const auto& task : tasks) {
    Prediction pred = predict_response(result.chain, task);
    result.nmse_per_task.push_back(nmse(task.target, pred.mean));
    result.predictions.push_back(std::move(pred));
  }
  result.datasets = std::move(datasets);
  return result;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config,
                            std::size_t replicate) {
  config.validate();
  try {
    std::vector<Dataset> datasets;
    for (std::size_t i = 0; i < config.excitation_scales.size(); ++i)
      datasets.push_back(simulate_task(config, replicate, i));
    const std::uint64_t chain_seed =
        derive_seed(config.master_seed, replicate,
                    config.mode == TaskMode::multi_task ? 0xB000 : 0xA000);
    return fit_and_evaluate(config, std::move(datasets), chain_seed);
  } catch (const std::exception& e) {
    throw NumericalError("scenario '" +
                         (config.label.empty() ? std::string("unnamed")
                                               : config.label) +
                         "' replicate " + std::to_string(replicate) + ": " +
                         e.what());
  }
}

namespace {

struct ReplicateOutcome {
  std::vector<StudyCell> st, mt;
  bool failed = false;
  std::string error;
};

ReplicateOutcome run_replicate(const ScenarioConfig& config,
                               std::size_t replicate) {
  const std::size_t n_scales = config.excitation_scales.size();
  ReplicateOutcome out;
  out.st.resize(n_scales);
  out.mt.resize(n_scales);
  try {
    std::vector<Dataset> datasets;
    for (std::size_t i = 0; i < n_scales; ++i)
      datasets.push_back(simulate_task(config, replicate, i));

    // Held-out scoring data, shared by the ST and MT fits of this replicate.
    const BasisSpec basis = BasisSpec::standard();
    std::vector<TaskData> holdout;
    if (config.holdout_nmse)
      for (std::size_t i = 0; i < n_scales; ++i)
        holdout.push_back(
            make_task_data(simulate_task(config, replicate, i, 2000), basis));
    auto score = [&](const PosteriorChain& chain, std::size_t i,
                     double training_nmse) {
      if (!config.holdout_nmse) return training_nmse;
      return nmse(holdout[i].target,
                  predict_response(chain, holdout[i]).mean)
          .value;
    };

    // One ST fit per scale on its own dataset.
    for (std::size_t i = 0; i < n_scales; ++i) {
      ScenarioResult r = fit_and_evaluate(
          config, {datasets[i]},
          derive_seed(config.master_seed, replicate, 0xA000 + i));
      out.st[i].nmse = score(r.chain, i, r.nmse_per_task[0].value);
      out.st[i].recovery_l2 = r.recovery.l2_distance;
    }
    // One joint MT fit over all scales.
    ScenarioResult r = fit_and_evaluate(
        config, datasets, derive_seed(config.master_seed, replicate, 0xB000));
    for (std::size_t i = 0; i < n_scales; ++i) {
      out.mt[i].nmse = score(r.chain, i, r.nmse_per_task[i].value);
      out.mt[i].recovery_l2 = r.recovery.l2_distance;
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
    for (auto& c : out.st) c.failed = true;
    for (auto& c : out.mt) c.failed = true;
  }
  return out;
}

}  // namespace

StudyResult run_nmse_study(const ScenarioConfig& config) {
  ScenarioConfig cfg = config;
  cfg.mode = TaskMode::multi_task;  // the study always compares ST vs MT
  cfg.validate();
  if (cfg.replicates < 2)
    throw ConfigError("run_nmse_study: need at least 2 replicates");

  const std::size_t n_rep = cfg.replicates;
  std::vector<ReplicateOutcome> outcomes(n_rep);

  const std::size_t workers =
      std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::vector<std::future<void>> futures;
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < std::min(workers, n_rep); ++w) {
    futures.push_back(std::async(std::launch::async, [&] {
      for (std::size_t r = next.fetch_add(1); r < n_rep;
           r = next.fetch_add(1))
        outcomes[r] = run_replicate(cfg, r);
    }));
  }
  for (auto& f : futures) f.get();

  StudyResult study;
  study.scales = cfg.excitation_scales;
  for (auto& o : outcomes) {
    if (o.failed) ++study.failure_count;
    study.st.push_back(std::move(o.st));
    study.mt.push_back(std::move(o.mt));
  }

  const std::size_t n_scales = study.scales.size();
  study.aggregates.resize(n_scales);
  for (std::size_t i = 0; i < n_scales; ++i) {
    std::vector<double> st_vals, mt_vals;
    for (std::size_t r = 0; r < n_rep; ++r) {
      if (study.st[r][i].failed || study.mt[r][i].failed) continue;
      st_vals.push_back(study.st[r][i].nmse);
      mt_vals.push_back(study.mt[r][i].nmse);
    }
    auto mean_std = [](const std::vector<double>& v) {
      double mean = 0.0, sd = 0.0;
      if (v.empty()) return std::pair{mean, sd};
      for (double x : v) mean += x;
      mean /= double(v.size());
      if (v.size() > 1) {
        for (double x : v) sd += (x - mean) * (x - mean);
        sd = std::sqrt(sd / double(v.size() - 1));
      }
      return std::pair{mean, sd};
    };
    auto [sm, ss] = mean_std(st_vals);
    auto [mm, ms] = mean_std(mt_vals);
    study.aggregates[i] = {sm, ss, mm, ms};
  }
  return study;
}

// --- config (de)serialization ------------------------------------------------

std::string scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = 1;
  j["mode"] = c.mode == TaskMode::multi_task ? "multi_task" : "single_task";
  j["excitation_scales"] = c.excitation_scales;
  j["oscillator"] = {{"m", c.oscillator.m},
                     {"c", c.oscillator.c},
                     {"k1", c.oscillator.k1},
                     {"k3", c.oscillator.k3}};
  j["sim"] = {
      {"dt_fast", c.sim.dt_fast},
      {"duration", c.sim.duration},
      {"decimation", c.sim.decimation},
      {"filter",
       {{"cutoff_hz", c.sim.filter.cutoff_hz}, {"order", c.sim.filter.order}}},
      {"filter_target", c.sim.filter_target == FilterTarget::forcing
                            ? "forcing"
                            : c.sim.filter_target == FilterTarget::response
                                  ? "response"
                                  : "none"},
      {"initial_y", c.sim.initial_y},
      {"initial_ydot", c.sim.initial_ydot},
      {"measurement_noise_std", c.sim.measurement_noise_std},
      {"trim_s", c.sim.trim_s}};
  j["hyper"] = {{"a", c.hyper.a}, {"b", c.hyper.b}, {"lambda", c.hyper.lambda}};
  j["chain"] = {{"n_iterations", c.chain.n_iterations},
                {"n_burn_in", c.chain.n_burn_in},
                {"thinning", c.chain.thinning},
                {"init_strategy", c.chain.init_strategy == InitStrategy::ridge
                                      ? "ridge"
                                      : "zeros"},
                {"sigma2_floor", c.chain.sigma2_floor}};
  j["replicates"] = c.replicates;
  j["master_seed"] = c.master_seed;
  j["noise_frac"] = c.noise_frac;
  j["holdout_nmse"] = c.holdout_nmse;
  j["label"] = c.label;
  return j.dump(2);
}

ScenarioConfig scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (j.value("schema_version", 0) != 1)
    throw ConfigError("config: unsupported or missing schema_version");

  ScenarioConfig c;
  const std::string mode = j.value("mode", "single_task");
  if (mode == "single_task") c.mode = TaskMode::single_task;
  else if (mode == "multi_task") c.mode = TaskMode::multi_task;
  else throw ConfigError("config: unknown mode '" + mode + "'");

  if (j.contains("excitation_scales"))
    c.excitation_scales = j["excitation_scales"].get<std::vector<double>>();
  if (j.contains("oscillator")) {
    const auto& o = j["oscillator"];
    c.oscillator.m = o.value("m", c.oscillator.m);
    c.oscillator.c = o.value("c", c.oscillator.c);
    c.oscillator.k1 = o.value("k1", c.oscillator.k1);
    c.oscillator.k3 = o.value("k3", c.oscillator.k3);
  }
  if (j.contains("sim")) {
    const auto& s = j["sim"];
    c.sim.dt_fast = s.value("dt_fast", c.sim.dt_fast);
    c.sim.duration = s.value("duration", c.sim.duration);
    c.sim.decimation = s.value("decimation", c.sim.decimation);
    if (s.contains("filter")) {
      c.sim.filter.cutoff_hz =
          s["filter"].value("cutoff_hz", c.sim.filter.cutoff_hz);
      c.sim.filter.order = s["filter"].value("order", c.sim.filter.order);
    }
    const std::string ft = s.value("filter_target", "forcing");
    if (ft == "forcing") c.sim.filter_target = FilterTarget::forcing;
    else if (ft == "response") c.sim.filter_target = FilterTarget::response;
    else if (ft == "none") c.sim.filter_target = FilterTarget::none;
    else throw ConfigError("config: unknown filter_target '" + ft + "'");
    c.sim.initial_y = s.value("initial_y", c.sim.initial_y);
    c.sim.initial_ydot = s.value("initial_ydot", c.sim.initial_ydot);
    c.sim.measurement_noise_std =
        s.value("measurement_noise_std", c.sim.measurement_noise_std);
    c.sim.trim_s = s.value("trim_s", c.sim.trim_s);
  }
  if (j.contains("hyper")) {
    c.hyper.a = j["hyper"].value("a", c.hyper.a);
    c.hyper.b = j["hyper"].value("b", c.hyper.b);
    c.hyper.lambda = j["hyper"].value("lambda", c.hyper.lambda);
  }
  if (j.contains("chain")) {
    const auto& ch = j["chain"];
    c.chain.n_iterations = ch.value("n_iterations", c.chain.n_iterations);
    c.chain.n_burn_in = ch.value("n_burn_in", c.chain.n_burn_in);
    c.chain.thinning = ch.value("thinning", c.chain.thinning);
    const std::string init = ch.value("init_strategy", "ridge");
    if (init == "ridge") c.chain.init_strategy = InitStrategy::ridge;
    else if (init == "zeros") c.chain.init_strategy = InitStrategy::zeros;
    else throw ConfigError("config: unknown init_strategy '" + init + "'");
    c.chain.sigma2_floor = ch.value("sigma2_floor", c.chain.sigma2_floor);
  }
  c.replicates = j.value("replicates", c.replicates);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.noise_frac = j.value("noise_frac", c.noise_frac);
  c.holdout_nmse = j.value("holdout_nmse", c.holdout_nmse);
  c.label = j.value("label", c.label);
  c.validate();
  return c;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return scenario_from_json(ss.str());
}

std::uint64_t config_hash(const ScenarioConfig& config) {
  const std::string text = scenario_to_json(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// --- reproduce ---------------------------------------------------------------

namespace {

void write_prediction_csv(const std::string& path, const Dataset& data,
                          const Prediction& pred) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << "t,target,mean,lower,upper\n";
  char buf[200];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  data.t[i], data.yddot[i], pred.mean(k), pred.lower(k),
                  pred.upper(k));
    os << buf;
  }
}

void write_scenario_outputs(const fs::path& dir, const ScenarioConfig& cfg,
                            const ScenarioResult& result) {
  fs::create_directories(dir);
  write_weight_summary_csv((dir / "weight_summary.csv").string(),
                           result.summary);
  std::vector<NmseRecord> rows;
  for (std::size_t i = 0; i < result.nmse_per_task.size(); ++i) {
    rows.push_back({cfg.label, 0, cfg.excitation_scales[i],
                    result.nmse_per_task[i].value});
    write_prediction_csv(
        (dir / ("prediction_f" + scale_tag(cfg.excitation_scales[i]) + ".csv"))
            .string(),
        result.datasets[i], result.predictions[i]);
  }
  write_nmse_csv((dir / "nmse.csv").string(), rows);
}

}  // namespace

void reproduce_paper(const std::string& output_dir,
                     const ScenarioConfig& base) {
  ScenarioConfig study_cfg = base;
  study_cfg.mode = TaskMode::multi_task;
  if (study_cfg.excitation_scales.size() < 2)
    study_cfg.excitation_scales = {1e1, 1e2, 1e3};
  study_cfg.validate();

  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" + output_dir +
                      "': " + ec.message());

  json manifest;
  manifest["schema_version"] = 1;
  manifest["config_hash"] = config_hash(study_cfg);
  manifest["base_config"] = json::parse(scenario_to_json(study_cfg));
  json scenario_list = json::array();

  // Single-task scenarios, one per excitation scale; datasets paired with MT.
  for (std::size_t i = 0; i < study_cfg.excitation_scales.size(); ++i) {
    const double f = study_cfg.excitation_scales[i];
    ScenarioConfig st = study_cfg;
    st.mode = TaskMode::single_task;
    st.excitation_scales = {f};
    st.label = "st_f" + scale_tag(f);

    Dataset data = simulate_task(study_cfg, 0, i);
    ScenarioResult result;
    try {
      result = fit_and_evaluate(st, {data},
                                derive_seed(st.master_seed, 0, 0xA000 + i));
    } catch (const std::exception& e) {
      throw NumericalError("scenario '" + st.label + "': " + e.what());
    }
    write_scenario_outputs(fs::path(output_dir) / st.label, st, result);
    scenario_list.push_back(
        {{"label", st.label},
         {"mode", "single_task"},
         {"scales", st.excitation_scales},
         {"dataset_seeds", {derive_seed(st.master_seed, 0, i)}},
         {"noise_seeds", {derive_seed(st.master_seed, 0, 1000 + i)}},
         {"chain_seed", derive_seed(st.master_seed, 0, 0xA000 + i)}});
  }

  // Multi-task scenario over all scales.
  {
    ScenarioConfig mt = study_cfg;
    mt.label = "mt";
    std::vector<Dataset> datasets;
    json dseeds = json::array(), nseeds = json::array();
    for (std::size_t i = 0; i < mt.excitation_scales.size(); ++i) {
      datasets.push_back(simulate_task(study_cfg, 0, i));
      dseeds.push_back(derive_seed(mt.master_seed, 0, i));
      nseeds.push_back(derive_seed(mt.master_seed, 0, 1000 + i));
    }
    ScenarioResult result;
    try {
      result = fit_and_evaluate(mt, std::move(datasets),
                                derive_seed(mt.master_seed, 0, 0xB000));
    } catch (const std::exception& e) {
      throw NumericalError(std::string("scenario 'mt': ") + e.what());
    }
    write_scenario_outputs(fs::path(output_dir) / "mt", mt, result);
    scenario_list.push_back({{"label", "mt"},
                             {"mode", "multi_task"},
                             {"scales", mt.excitation_scales},
                             {"dataset_seeds", dseeds},
                             {"noise_seeds", nseeds},
                             {"chain_seed",
                              derive_seed(mt.master_seed, 0, 0xB000)}});
  }

  // Replicated NMSE study, scored on fresh datasets per replicate.
  {
    ScenarioConfig distribution_cfg = study_cfg;
    distribution_cfg.holdout_nmse = true;
    StudyResult study = run_nmse_study(distribution_cfg);
    const fs::path dir = fs::path(output_dir) / "study";
    fs::create_directories(dir);
    std::vector<NmseRecord> rows;
    for (std::size_t r = 0; r < study.st.size(); ++r)
      for (std::size_t i = 0; i < study.scales.size(); ++i) {
        if (!study.st[r][i].failed)
          rows.push_back({"st", r, study.scales[i], study.st[r][i].nmse});
        if (!study.mt[r][i].failed)
          rows.push_back({"mt", r, study.scales[i], study.mt[r][i].nmse});
      }
    write_nmse_csv((dir / "nmse.csv").string(), rows);

    std::ofstream os(dir / "aggregates.csv");
    os << "excitation_scale,st_mean,st_std,mt_mean,mt_std\n";
    char buf[200];
    for (std::size_t i = 0; i < study.scales.size(); ++i) {
      const auto& a = study.aggregates[i];
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    study.scales[i], a.st_mean, a.st_std, a.mt_mean, a.mt_std);
      os << buf;
    }
    manifest["study"] = {{"replicates", study_cfg.replicates},
                         {"failures", study.failure_count},
                         {"holdout_nmse", true}};
  }

  manifest["scenarios"] = std::move(scenario_list);
  std::ofstream os(fs::path(output_dir) / "manifest.json");
  if (!os) throw ConfigError("cannot write manifest in " + output_dir);
  os << manifest.dump(2) << "\n";
}

}  // namespace mtrvm
