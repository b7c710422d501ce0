#pragma once

#include "gml/dataset.hpp"
#include "gml/evaluate.hpp"
#include "gml/optimizer.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gml {

/// Everything a `run` needs, parsed from a key = value config file. Keys
/// mirror the field names here and in SynthConfig/GmlParams.
struct ExperimentConfig {
  std::string dataset = "synth";  // "synth" or "files"
  std::string train_file;
  std::string test_file;
  SynthConfig synth;
  std::vector<std::uint64_t> seeds = {1};

  GmlParams gml;
  InitKind init = InitKind::kTypical;
  int init_k = kAllNeighbors;
  double lambda = 1.0;
  double mix = 1.0;

  std::vector<std::string> distances = {"l1",
                                        "l2",
                                        "hellinger",
                                        "emd_uniform",
                                        "emd_init_independence",
                                        "emd_init_typical",
                                        "gml"};
  std::vector<int> kappas;  // empty selects default_kappas(train size)
  int threads = 0;          // task worker pool

  void validate() const;
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig read_config_file(const std::string& path);

struct TaskResult {
  std::string distance;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  KnnCurves curves;
};

struct ExperimentReport {
  std::vector<TaskResult> tasks;  // distance-major, seeds in config order
};

/// Runs every (distance, seed) task over a worker pool and writes tasks.csv,
/// summary.csv, and manifest.json into out_dir. Task computation is
/// single-threaded so results are identical for any pool size; a failing
/// task is recorded in the manifest and skipped in the CSVs. pool_threads
/// >= 0 overrides cfg.threads for the pool without touching the manifest,
/// which always echoes the config as given.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir,
                                int pool_threads = -1);

}  // namespace gml
