#include "gml/experiment.hpp"

#include "gml/io.hpp"
#include "gml/parallel.hpp"
#include "gml/training_set.hpp"
#include "gml/transport.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gml {

namespace {

const std::set<std::string> kDistanceTokens = {
    "l1",          "l2",
    "hellinger",   "emd_uniform",
    "emd_init_independence", "emd_init_typical",
    "gml"};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  size_t pos = 0;
  long long v;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer for " + key);
  }
  if (pos != value.size())
    throw std::runtime_error("config: bad integer for " + key);
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  size_t pos = 0;
  double v;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad number for " + key);
  }
  if (pos != value.size())
    throw std::runtime_error("config: bad number for " + key);
  return v;
}

std::vector<std::uint64_t> parse_seeds(const std::string& value) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& token : split_list(value)) {
    size_t dots = token.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(
          static_cast<std::uint64_t>(parse_int("seeds", token)));
    } else {
      std::uint64_t a = static_cast<std::uint64_t>(
          parse_int("seeds", token.substr(0, dots)));
      std::uint64_t b = static_cast<std::uint64_t>(
          parse_int("seeds", token.substr(dots + 2)));
      if (b < a) throw std::runtime_error("config: empty seed range " + token);
      for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    }
  }
  return seeds;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (dataset != "synth" && dataset != "files")
    throw std::invalid_argument("config: dataset must be synth or files");
  if (dataset == "files" && (train_file.empty() || test_file.empty()))
    throw std::invalid_argument(
        "config: dataset=files needs train_file and test_file");
  if (dataset == "synth") synth.validate();
  if (seeds.empty()) throw std::invalid_argument("config: no seeds");
  if (distances.empty()) throw std::invalid_argument("config: no distances");
  for (const std::string& dist : distances)
    if (!kDistanceTokens.count(dist))
      throw std::invalid_argument("config: unknown distance '" + dist + "'");
  gml.validate();
  if (!(lambda > 0)) throw std::invalid_argument("config: lambda must be > 0");
  if (!(mix >= 0 && mix <= 1))
    throw std::invalid_argument("config: mix must be in [0,1]");
  if (init_k < 1) throw std::invalid_argument("config: init_k must be >= 1");
  for (int k : kappas)
    if (k < 1) throw std::invalid_argument("config: kappas must be >= 1");
  if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");

    if (key == "dataset") cfg.dataset = value;
    else if (key == "train_file") cfg.train_file = value;
    else if (key == "test_file") cfg.test_file = value;
    else if (key == "d") cfg.synth.d = static_cast<int>(parse_int(key, value));
    else if (key == "blocks")
      cfg.synth.blocks = static_cast<int>(parse_int(key, value));
    else if (key == "classes")
      cfg.synth.classes = static_cast<int>(parse_int(key, value));
    else if (key == "train_per_class")
      cfg.synth.train_per_class = static_cast<int>(parse_int(key, value));
    else if (key == "test_per_class")
      cfg.synth.test_per_class = static_cast<int>(parse_int(key, value));
    else if (key == "within_noise") cfg.synth.within_noise = parse_real(key, value);
    else if (key == "cross_signal") cfg.synth.cross_signal = parse_real(key, value);
    else if (key == "seeds") cfg.seeds = parse_seeds(value);
    else if (key == "k") cfg.gml.k = static_cast<int>(parse_int(key, value));
    else if (key == "t0") cfg.gml.t0 = parse_real(key, value);
    else if (key == "p_max")
      cfg.gml.p_max = static_cast<int>(parse_int(key, value));
    else if (key == "q_max")
      cfg.gml.q_max = static_cast<int>(parse_int(key, value));
    else if (key == "progress_eps") cfg.gml.progress_eps = parse_real(key, value);
    else if (key == "progress_window")
      cfg.gml.progress_window = static_cast<int>(parse_int(key, value));
    else if (key == "init") cfg.init = init_kind_from_name(value);
    else if (key == "init_k")
      cfg.init_k = value == "all" ? kAllNeighbors
                                  : static_cast<int>(parse_int(key, value));
    else if (key == "lambda") cfg.lambda = parse_real(key, value);
    else if (key == "mix") cfg.mix = parse_real(key, value);
    else if (key == "distances") cfg.distances = split_list(value);
    else if (key == "kappas") {
      cfg.kappas.clear();
      for (const std::string& token : split_list(value))
        cfg.kappas.push_back(static_cast<int>(parse_int(key, token)));
    } else if (key == "threads")
      cfg.threads = static_cast<int>(parse_int(key, value));
    else
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return parse_config(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

namespace {

DistanceFn make_distance(const ExperimentConfig& cfg, const std::string& token,
                         const LabeledDataset& train) {
  if (token == "l1" || token == "l2" || token == "hellinger") {
    BaselineKind kind = baseline_from_name(token);
    return [kind](const Histogram& r, const Histogram& c) {
      return baseline_distance(kind, r, c);
    };
  }
  MetricMatrix M = uniform_metric(train.d);
  if (token != "emd_uniform") {
    TrainingSet ts = normalize_weights(
        make_training_set(train.histograms, train.labels));
    if (token == "emd_init_independence")
      M = initial_point(ts, InitKind::kIndependence, cfg.init_k, cfg.lambda,
                        cfg.mix, 1);
    else if (token == "emd_init_typical")
      M = initial_point(ts, InitKind::kTypical, cfg.init_k, cfg.lambda,
                        cfg.mix, 1);
    else if (token == "gml") {
      MetricMatrix M0 = initial_point(ts, cfg.init, cfg.init_k, cfg.lambda,
                                      cfg.mix, 1);
      DescentOptions opts;
      opts.threads = 1;
      M = gml_descent(ts, M0, cfg.gml, opts).metric;
    } else {
      throw std::logic_error("unhandled distance token " + token);
    }
  }
  return [M](const Histogram& r, const Histogram& c) { return emd(M, r, c); };
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir,
                                int pool_threads) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  SynthData file_data;
  if (cfg.dataset == "files") {
    file_data.train = read_dataset_file(cfg.train_file);
    file_data.test = read_dataset_file(cfg.test_file);
    if (file_data.train.d != file_data.test.d)
      throw std::runtime_error("train/test dimension mismatch");
  }
  int train_size = cfg.dataset == "files"
                       ? file_data.train.size()
                       : cfg.synth.classes * cfg.synth.train_per_class;
  std::vector<int> kappas =
      cfg.kappas.empty() ? default_kappas(train_size) : cfg.kappas;
  for (int k : kappas)
    if (k > train_size)
      throw std::runtime_error("kappa " + std::to_string(k) +
                               " exceeds train size " +
                               std::to_string(train_size));

  ExperimentReport report;
  for (const std::string& dist : cfg.distances)
    for (std::uint64_t seed : cfg.seeds)
      report.tasks.push_back({dist, seed, false, "", {}});

  parallel_for(
      static_cast<int>(report.tasks.size()),
      [&](int idx) {
        TaskResult& task = report.tasks[idx];
        try {
          SynthData synth_data;
          const SynthData* data = &file_data;
          if (cfg.dataset == "synth") {
            SynthConfig sc = cfg.synth;
            sc.seed = task.seed;
            synth_data = synth_generate(sc);
            data = &synth_data;
          }
          DistanceFn fn = make_distance(cfg, task.distance, data->train);
          task.curves = knn_eval(fn, data->train, data->test, kappas, 1);
          task.ok = true;
        } catch (const std::exception& e) {
          task.ok = false;
          task.error = e.what();
        }
      },
      pool_threads >= 0 ? pool_threads : cfg.threads);

  std::ofstream tasks_csv(out_dir + "/tasks.csv");
  if (!tasks_csv) throw std::runtime_error("cannot write tasks.csv");
  tasks_csv << "distance,seed,kappa,recall,error\n";
  for (const TaskResult& task : report.tasks) {
    if (!task.ok) continue;
    for (size_t a = 0; a < task.curves.kappas.size(); ++a)
      tasks_csv << task.distance << ',' << task.seed << ','
                << task.curves.kappas[a] << ','
                << format_sig(task.curves.recall[a]) << ','
                << format_sig(task.curves.error[a]) << '\n';
  }
  tasks_csv.close();

  std::ofstream summary_csv(out_dir + "/summary.csv");
  if (!summary_csv) throw std::runtime_error("cannot write summary.csv");
  summary_csv << "distance,kappa,mean_recall,mean_error,tasks\n";
  for (const std::string& dist : cfg.distances) {
    for (size_t a = 0; a < kappas.size(); ++a) {
      double recall = 0, error = 0;
      int count = 0;
      for (const TaskResult& task : report.tasks)
        if (task.ok && task.distance == dist) {
          recall += task.curves.recall[a];
          error += task.curves.error[a];
          ++count;
        }
      if (count == 0) continue;
      summary_csv << dist << ',' << kappas[a] << ','
                  << format_sig(recall / count) << ','
                  << format_sig(error / count) << ',' << count << '\n';
    }
  }
  summary_csv.close();

  nlohmann::ordered_json manifest;
  auto& jc = manifest["config"];
  jc["dataset"] = cfg.dataset;
  if (cfg.dataset == "files") {
    jc["train_file"] = cfg.train_file;
    jc["test_file"] = cfg.test_file;
  } else {
    jc["synth"] = {{"d", cfg.synth.d},
                   {"blocks", cfg.synth.blocks},
                   {"classes", cfg.synth.classes},
                   {"train_per_class", cfg.synth.train_per_class},
                   {"test_per_class", cfg.synth.test_per_class},
                   {"within_noise", cfg.synth.within_noise},
                   {"cross_signal", cfg.synth.cross_signal}};
  }
  jc["seeds"] = cfg.seeds;
  jc["gml"] = {{"k", cfg.gml.k},
               {"t0", cfg.gml.t0},
               {"p_max", cfg.gml.p_max},
               {"q_max", cfg.gml.q_max},
               {"progress_eps", cfg.gml.progress_eps},
               {"progress_window", cfg.gml.progress_window}};
  jc["init"] = to_string(cfg.init);
  if (cfg.init_k == kAllNeighbors)
    jc["init_k"] = "all";
  else
    jc["init_k"] = cfg.init_k;
  jc["lambda"] = cfg.lambda;
  jc["mix"] = cfg.mix;
  jc["distances"] = cfg.distances;
  jc["kappas"] = kappas;
  jc["threads"] = cfg.threads;
  auto& jt = manifest["tasks"] = nlohmann::ordered_json::array();
  for (const TaskResult& task : report.tasks) {
    nlohmann::ordered_json row;
    row["distance"] = task.distance;
    row["seed"] = task.seed;
    row["status"] = task.ok ? "ok" : "error";
    if (!task.ok) row["error"] = task.error;
    jt.push_back(row);
  }
  manifest["outputs"] = {"tasks.csv", "summary.csv"};
  std::ofstream manifest_json(out_dir + "/manifest.json");
  if (!manifest_json) throw std::runtime_error("cannot write manifest.json");
  manifest_json << manifest.dump(2) << '\n';

  return report;
}

}  // namespace gml
