#include "gml/dataset.hpp"

#include "gml/io.hpp"
#include "gml/random.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace gml {

namespace {

constexpr double kMassTol = 1e-6;

// Accepts a row whose mass drifted by float round-trip, rejects anything
// worse, and returns it exactly renormalized.
Histogram sanitize_row(const Vector& v, size_t row) {
  std::string where = "histogram " + std::to_string(row);
  if (!v.allFinite()) throw std::runtime_error(where + ": non-finite entry");
  if (v.size() < 2) throw std::runtime_error(where + ": dimension < 2");
  if (v.minCoeff() < 0) throw std::runtime_error(where + ": negative mass");
  double sum = v.sum();
  if (std::abs(sum - 1.0) > kMassTol)
    throw std::runtime_error(where + ": mass " + format_sig(sum) +
                             " not within 1e-6 of 1");
  return Histogram::normalized(v);
}

}  // namespace

void LabeledDataset::validate() const {
  if (histograms.empty()) throw std::invalid_argument("dataset: empty");
  if (labels.size() != histograms.size())
    throw std::invalid_argument("dataset: label count mismatch");
  if (d < 2) throw std::invalid_argument("dataset: d < 2");
  for (const Histogram& h : histograms)
    if (h.dim() != d) throw std::invalid_argument("dataset: mixed dimensions");
}

void SynthConfig::validate() const {
  if (d < 2) throw std::invalid_argument("synth: d must be >= 2");
  if (blocks < 1 || blocks > d)
    throw std::invalid_argument("synth: blocks must be in [1, d]");
  if (classes < 2) throw std::invalid_argument("synth: classes must be >= 2");
  if (train_per_class < 1 || test_per_class < 1)
    throw std::invalid_argument("synth: need at least one point per class");
  if (!(within_noise >= 0 && within_noise <= 1))
    throw std::invalid_argument("synth: within_noise must be in [0,1]");
  if (!(cross_signal >= 0 && cross_signal <= 1))
    throw std::invalid_argument("synth: cross_signal must be in [0,1]");
}

namespace {

std::vector<int> block_indices(int d, int blocks, int b) {
  int start = b * d / blocks;
  int end = (b + 1) * d / blocks;
  std::vector<int> idx(end - start);
  std::iota(idx.begin(), idx.end(), start);
  return idx;
}

Histogram synth_histogram(const SynthConfig& cfg, int label, Rng& rng) {
  const int d = cfg.d;
  const double sig = cfg.cross_signal;
  const double noise = cfg.within_noise;

  std::vector<int> block = block_indices(d, cfg.blocks, label % cfg.blocks);
  const int L = static_cast<int>(block.size());
  Vector pattern = Vector::Zero(d);
  double mass = 1.0;
  for (int t = 0; t < L; ++t, mass *= 0.5) pattern[block[t]] = mass;
  pattern /= pattern.sum();

  std::vector<int> perm = block;
  shuffle(rng, perm);
  Vector scrambled = Vector::Zero(d);
  for (int t = 0; t < L; ++t) scrambled[perm[t]] = pattern[block[t]];

  Vector dirichlet(d);
  for (int i = 0; i < d; ++i) dirichlet[i] = exponential(rng);
  dirichlet /= dirichlet.sum();

  Vector v = sig * ((1.0 - noise) * pattern + noise * scrambled) +
             (1.0 - sig) * ((1.0 - noise) * Vector::Constant(d, 1.0 / d) +
                            noise * dirichlet);
  return Histogram::normalized(v);
}

LabeledDataset synth_split(const SynthConfig& cfg, int per_class, Rng& rng) {
  LabeledDataset ds;
  ds.d = cfg.d;
  for (int m = 0; m < cfg.classes; ++m)
    for (int t = 0; t < per_class; ++t) {
      ds.histograms.push_back(synth_histogram(cfg, m, rng));
      ds.labels.push_back(m);
    }
  return ds;
}

}  // namespace

SynthData synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SynthData data;
  data.train = synth_split(cfg, cfg.train_per_class, rng);
  data.test = synth_split(cfg, cfg.test_per_class, rng);
  return data;
}

LabeledDataset read_dataset_json(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("json parse: ") + e.what());
  }
  if (!j.is_object() || !j.contains("d") || !j.contains("histograms") ||
      !j.contains("labels"))
    throw std::runtime_error("expected {\"d\", \"histograms\", \"labels\"}");
  LabeledDataset ds;
  ds.d = j.at("d").get<int>();
  const auto& hists = j.at("histograms");
  const auto& labels = j.at("labels");
  if (!hists.is_array() || !labels.is_array() ||
      hists.size() != labels.size())
    throw std::runtime_error("histograms and labels must be equal-length arrays");
  for (size_t i = 0; i < hists.size(); ++i) {
    std::vector<double> row = hists[i].get<std::vector<double>>();
    if (static_cast<int>(row.size()) != ds.d)
      throw std::runtime_error("histogram " + std::to_string(i) +
                               ": wrong dimension");
    ds.histograms.push_back(
        sanitize_row(Eigen::Map<const Vector>(row.data(), row.size()), i));
    ds.labels.push_back(labels[i].get<int>());
  }
  ds.validate();
  return ds;
}

void write_dataset_json(std::ostream& os, const LabeledDataset& ds) {
  ds.validate();
  nlohmann::json j;
  j["d"] = ds.d;
  auto& hists = j["histograms"] = nlohmann::json::array();
  for (const Histogram& h : ds.histograms) {
    std::vector<double> row(h.values().data(), h.values().data() + h.dim());
    hists.push_back(row);
  }
  j["labels"] = ds.labels;
  os << j.dump(2) << '\n';
}

LabeledDataset read_dataset_csv(std::istream& is) {
  Matrix m = read_csv_matrix(is);
  if (m.cols() < 3)
    throw std::runtime_error("dataset csv needs >= 2 mass columns + label");
  LabeledDataset ds;
  ds.d = static_cast<int>(m.cols()) - 1;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double raw = m(i, m.cols() - 1);
    double rounded = std::round(raw);
    if (std::abs(raw - rounded) > 1e-9)
      throw std::runtime_error("row " + std::to_string(i) +
                               ": non-integer label");
    ds.histograms.push_back(
        sanitize_row(m.row(i).head(ds.d).transpose(), static_cast<size_t>(i)));
    ds.labels.push_back(static_cast<int>(rounded));
  }
  ds.validate();
  return ds;
}

void write_dataset_csv(std::ostream& os, const LabeledDataset& ds) {
  ds.validate();
  for (int i = 0; i < ds.size(); ++i) {
    for (int j = 0; j < ds.d; ++j) os << format_sig(ds.histograms[i][j]) << ',';
    os << ds.labels[i] << '\n';
  }
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

LabeledDataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    if (has_suffix(path, ".json")) return read_dataset_json(in);
    if (has_suffix(path, ".csv")) return read_dataset_csv(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  throw std::runtime_error(path + ": expected a .json or .csv dataset");
}

void write_dataset_file(const std::string& path, const LabeledDataset& ds) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  if (has_suffix(path, ".json"))
    write_dataset_json(out, ds);
  else if (has_suffix(path, ".csv"))
    write_dataset_csv(out, ds);
  else
    throw std::runtime_error(path + ": expected a .json or .csv dataset");
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gml
