#pragma once

#include "gml/histogram.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gml {

/// Histograms of a common dimension, one integer class label each.
struct LabeledDataset {
  int d = 0;
  std::vector<Histogram> histograms;
  std::vector<int> labels;

  int size() const { return static_cast<int>(histograms.size()); }
  void validate() const;  // throws std::invalid_argument on shape mismatch
};

/// Planted-block generator: class m concentrates extra mass on feature
/// block (m mod blocks). Within a class, the block pattern is scrambled by
/// a per-histogram permutation of the block with probability weight
/// within_noise, and the off-block background is a Dirichlet draw mixed
/// with the uniform background by the same weight. cross_signal scales the
/// planted block mass against the background; 0 makes classes identical in
/// distribution, and within_noise 0 makes every class a fixed histogram.
struct SynthConfig {
  int d = 16;
  int blocks = 2;
  int classes = 2;
  int train_per_class = 30;
  int test_per_class = 40;
  double within_noise = 0.9;
  double cross_signal = 0.35;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthData {
  LabeledDataset train;
  LabeledDataset test;
};

/// Deterministic in cfg.seed; train is generated before test.
SynthData synth_generate(const SynthConfig& cfg);

/// JSON object {"d": int, "histograms": [[...], ...], "labels": [...]}.
LabeledDataset read_dataset_json(std::istream& is);
void write_dataset_json(std::ostream& os, const LabeledDataset& ds);

/// One histogram per row, integer label in the last column.
LabeledDataset read_dataset_csv(std::istream& is);
void write_dataset_csv(std::ostream& os, const LabeledDataset& ds);

/// Dispatches on the file extension (.json or .csv). Rows whose mass is
/// within 1e-6 of 1 are renormalized exactly; anything further off is an
/// error, as is any negative entry.
LabeledDataset read_dataset_file(const std::string& path);
void write_dataset_file(const std::string& path, const LabeledDataset& ds);

}  // namespace gml
