#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtrvm/evaluation.hpp"
#include "mtrvm/inference.hpp"
#include "mtrvm/simulator.hpp"

namespace mtrvm {

enum class TaskMode { single_task, multi_task };

// One scenario: datasets at the given excitation scales, fitted either task
// by task (single_task requires exactly one scale) or jointly (multi_task,
// shared weights, per-task noise).
struct ScenarioConfig {
  TaskMode mode = TaskMode::single_task;
  std::vector<double> excitation_scales{1e3};
  OscillatorParams oscillator{};
  SimulationConfig sim{};
  Hyperparameters hyper{};
  ChainConfig chain{};
  std::size_t replicates = 1;
  std::uint64_t master_seed = 0;
  // Measurement noise std as a fraction of each task's noise-free
  // acceleration RMS; applied on top of sim.measurement_noise_std.
  double noise_frac = 0.05;
  // When set, NMSE is scored on a freshly drawn dataset per (replicate,
  // scale) instead of the training record. The holdout draw is shared
  // between the ST and MT fits so the comparison stays paired.
  bool holdout_nmse = false;
  std::string label;

  void validate() const;
};

// Deterministic stream split: one sub-seed per (master, replicate, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate,
                          std::uint64_t index);

// Simulates the dataset for one (replicate, scale) cell. Identical cells are
// shared between ST and MT runs so comparisons are paired. seed_offset
// selects an independent stream (holdout data uses offset 2000).
Dataset simulate_task(const ScenarioConfig& config, std::size_t replicate,
                      std::size_t scale_index, std::uint64_t seed_offset = 0);

struct ScenarioResult {
  PosteriorChain chain;
  PosteriorSummary summary;
  RecoveryReport recovery;
  std::vector<NmseResult> nmse_per_task;
  std::vector<Prediction> predictions;
  std::vector<Dataset> datasets;
};

ScenarioResult run_scenario(const ScenarioConfig& config,
                            std::size_t replicate = 0);

struct StudyCell {
  double nmse = 0.0;
  double recovery_l2 = 0.0;
  bool failed = false;
};

struct StudyAggregate {
  double st_mean = 0.0, st_std = 0.0;
  double mt_mean = 0.0, mt_std = 0.0;
};

// Paired replicated comparison: per replicate, one ST fit per excitation
// scale plus one joint MT fit over all scales, all on the same datasets.
struct StudyResult {
  std::vector<double> scales;
  std::vector<std::vector<StudyCell>> st;  // [replicate][scale]
  std::vector<std::vector<StudyCell>> mt;  // [replicate][scale]
  std::vector<StudyAggregate> aggregates;  // per scale, over non-failed rows
  std::size_t failure_count = 0;
};

StudyResult run_nmse_study(const ScenarioConfig& config);

// Full pipeline: three ST scenarios, one MT scenario, one replicated study;
// CSV outputs plus a manifest recording every seed and a config hash.
void reproduce_paper(const std::string& output_dir,
                     const ScenarioConfig& base);

// Config file round trip (JSON, schema_version field).
std::string scenario_to_json(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);

// Stable FNV-1a hash of the canonical config serialization.
std::uint64_t config_hash(const ScenarioConfig& config);

}  // namespace mtrvm
