#include "gml/dataset.hpp"
#include "gml/evaluate.hpp"
#include "gml/experiment.hpp"
#include "gml/io.hpp"
#include "gml/metric.hpp"
#include "gml/optimizer.hpp"
#include "gml/training_set.hpp"
#include "gml/transport.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <string>

namespace {

using namespace gml;

int parse_neighbor_count(const std::string& s) {
  if (s == "all") return kAllNeighbors;
  size_t pos = 0;
  int k = std::stoi(s, &pos);
  if (pos != s.size() || k < 1)
    throw std::runtime_error("neighbor count must be a positive integer or 'all'");
  return k;
}

void write_matrix_output(const std::string& path, const Matrix& m) {
  if (path.empty())
    write_csv_matrix(std::cout, m);
  else
    write_matrix_file(path, m);
}

TrainingSet load_training_set(const std::string& path) {
  LabeledDataset ds = read_dataset_file(path);
  return normalize_weights(make_training_set(ds.histograms, ds.labels));
}

struct EmdArgs {
  std::string r_file, c_file, metric_file, plan_file;
};

void cmd_emd(const EmdArgs& args) {
  Histogram r = read_histogram_file(args.r_file);
  Histogram c = read_histogram_file(args.c_file);
  MetricMatrix M = args.metric_file.empty()
                       ? uniform_metric(r.dim())
                       : MetricMatrix(read_matrix_file(args.metric_file));
  SolveResult res = solve_transport(M.matrix(), r, c);
  if (!args.plan_file.empty()) write_matrix_file(args.plan_file, res.plan.plan);
  std::cout << format_sig(res.plan.value) << '\n';
}

struct ProjectArgs {
  std::string h_file, out_file;
  double tol = kMetricTol;
  bool ball = false;
};

void cmd_project(const ProjectArgs& args) {
  Matrix h = read_matrix_file(args.h_file);
  MetricMatrix m = args.ball ? project_feasible(h, args.tol)
                             : triangle_fix(h, args.tol);
  write_matrix_output(args.out_file, m.matrix());
}

struct InitArgs {
  std::string train_file, out_file;
  std::string kind = "typical";
  std::string k = "all";
  double lambda = 1.0;
  double mix = 1.0;
  int threads = 0;
};

void cmd_init(const InitArgs& args) {
  TrainingSet train = load_training_set(args.train_file);
  MetricMatrix m =
      initial_point(train, init_kind_from_name(args.kind),
                    parse_neighbor_count(args.k), args.lambda, args.mix,
                    args.threads);
  write_matrix_output(args.out_file, m.matrix());
}

struct TrainArgs {
  std::string train_file, out_file, trace_file;
  GmlParams params;
  std::string init = "typical";
  std::string init_k = "all";
  double lambda = 1.0;
  double mix = 1.0;
  int threads = 0;
  bool cold = false;
};

void cmd_train(const TrainArgs& args) {
  TrainingSet train = load_training_set(args.train_file);
  MetricMatrix m0 =
      initial_point(train, init_kind_from_name(args.init),
                    parse_neighbor_count(args.init_k), args.lambda, args.mix,
                    args.threads);
  DescentOptions opts;
  opts.threads = args.threads;
  opts.use_warm_starts = !args.cold;
  DescentResult res = gml_descent(train, m0, args.params, opts);
  if (!args.trace_file.empty()) {
    std::ofstream trace(args.trace_file);
    if (!trace)
      throw std::runtime_error("cannot open " + args.trace_file +
                               " for writing");
    write_trace_csv(trace, res.trace);
  }
  write_matrix_output(args.out_file, res.metric.matrix());
}

struct SynthArgs {
  SynthConfig cfg;
  std::string train_out, test_out;
};

void cmd_synth(const SynthArgs& args) {
  SynthData data = synth_generate(args.cfg);
  write_dataset_file(args.train_out, data.train);
  write_dataset_file(args.test_out, data.test);
}

struct EvalArgs {
  std::string train_file, test_file, metric_file;
  std::string distance = "l1";
  std::string kappas;
  int threads = 0;
};

void cmd_eval(const EvalArgs& args) {
  LabeledDataset train = read_dataset_file(args.train_file);
  LabeledDataset test = read_dataset_file(args.test_file);

  DistanceFn fn;
  if (!args.metric_file.empty()) {
    MetricMatrix M(read_matrix_file(args.metric_file));
    fn = [M](const Histogram& r, const Histogram& c) { return emd(M, r, c); };
  } else if (args.distance == "emd_uniform") {
    MetricMatrix M = uniform_metric(train.d);
    fn = [M](const Histogram& r, const Histogram& c) { return emd(M, r, c); };
  } else {
    BaselineKind kind = baseline_from_name(args.distance);
    fn = [kind](const Histogram& r, const Histogram& c) {
      return baseline_distance(kind, r, c);
    };
  }

  std::vector<int> kappas;
  if (args.kappas.empty()) {
    kappas = default_kappas(train.size());
  } else {
    std::stringstream ss(args.kappas);
    std::string item;
    while (std::getline(ss, item, ','))
      kappas.push_back(std::stoi(item));
  }

  KnnCurves curves = knn_eval(fn, train, test, kappas, args.threads);
  std::cout << "kappa,recall,error\n";
  for (size_t a = 0; a < curves.kappas.size(); ++a)
    std::cout << curves.kappas[a] << ',' << format_sig(curves.recall[a]) << ','
              << format_sig(curves.error[a]) << '\n';
}

struct RunArgs {
  std::string config_file, out_dir;
  int threads = -1;
};

void cmd_run(const RunArgs& args) {
  ExperimentConfig cfg = read_config_file(args.config_file);
  ExperimentReport report = run_experiment(cfg, args.out_dir, args.threads);
  int failed = 0;
  for (const TaskResult& task : report.tasks)
    if (!task.ok) {
      std::cerr << "task " << task.distance << " seed " << task.seed
                << " failed: " << task.error << '\n';
      ++failed;
    }
  if (failed) throw std::runtime_error(std::to_string(failed) + " task(s) failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ground metric learning for earth mover's distances"};
  app.require_subcommand(1);

  EmdArgs emd_args;
  auto* emd_cmd = app.add_subcommand(
      "emd", "transport distance between two histogram files");
  emd_cmd->add_option("r", emd_args.r_file, "first histogram csv")->required();
  emd_cmd->add_option("c", emd_args.c_file, "second histogram csv")->required();
  emd_cmd->add_option("--metric", emd_args.metric_file,
                      "ground metric csv (default: uniform metric)");
  emd_cmd->add_option("--plan", emd_args.plan_file,
                      "write the optimal plan to this csv");

  ProjectArgs project_args;
  auto* project_cmd = app.add_subcommand(
      "project", "project a matrix onto the metric cone");
  project_cmd->add_option("matrix", project_args.h_file, "input matrix csv")
      ->required();
  project_cmd->add_option("-o,--out", project_args.out_file,
                          "output file (default: stdout)");
  project_cmd->add_option("--tol", project_args.tol, "projection tolerance");
  project_cmd->add_flag("--ball", project_args.ball,
                        "also rescale into the Frobenius unit ball");

  InitArgs init_args;
  auto* init_cmd = app.add_subcommand(
      "init", "starting metric from representative transport tables");
  init_cmd->add_option("train", init_args.train_file, "labeled dataset file")
      ->required();
  init_cmd->add_option("--kind", init_args.kind,
                       "uniform | independence | typical");
  init_cmd->add_option("--k", init_args.k, "neighbors kept per point, or 'all'");
  init_cmd->add_option("--lambda", init_args.lambda, "regularization weight");
  init_cmd->add_option("--mix", init_args.mix,
                       "weight of the table term against the uniform metric");
  init_cmd->add_option("--threads", init_args.threads, "solver workers");
  init_cmd->add_option("-o,--out", init_args.out_file,
                       "output file (default: stdout)");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand(
      "train", "learn a ground metric by projected subgradient descent");
  train_cmd->add_option("train", train_args.train_file, "labeled dataset file")
      ->required();
  train_cmd->add_option("--k", train_args.params.k, "criterion neighborhood");
  train_cmd->add_option("--t0", train_args.params.t0, "base step size");
  train_cmd->add_option("--pmax", train_args.params.p_max, "outer rounds");
  train_cmd->add_option("--qmax", train_args.params.q_max,
                        "inner steps per round");
  train_cmd->add_option("--init", train_args.init,
                        "uniform | independence | typical");
  train_cmd->add_option("--init-k", train_args.init_k,
                        "neighbors for the initial point, or 'all'");
  train_cmd->add_option("--lambda", train_args.lambda,
                        "initial point regularization");
  train_cmd->add_option("--mix", train_args.mix,
                        "initial point mixing weight");
  train_cmd->add_option("--trace", train_args.trace_file,
                        "write the descent trace csv here");
  train_cmd->add_option("--threads", train_args.threads, "solver workers");
  train_cmd->add_flag("--cold", train_args.cold,
                      "disable simplex warm starts");
  train_cmd->add_option("-o,--out", train_args.out_file,
                        "output file (default: stdout)");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand(
      "synth", "generate a planted-block synthetic dataset");
  synth_cmd->add_option("--d", synth_args.cfg.d, "histogram dimension");
  synth_cmd->add_option("--blocks", synth_args.cfg.blocks, "feature blocks");
  synth_cmd->add_option("--classes", synth_args.cfg.classes, "class count");
  synth_cmd->add_option("--train-per-class", synth_args.cfg.train_per_class,
                        "training points per class");
  synth_cmd->add_option("--test-per-class", synth_args.cfg.test_per_class,
                        "test points per class");
  synth_cmd->add_option("--within-noise", synth_args.cfg.within_noise,
                        "within-class scrambling weight in [0,1]");
  synth_cmd->add_option("--cross-signal", synth_args.cfg.cross_signal,
                        "class signal mass in [0,1]");
  synth_cmd->add_option("--seed", synth_args.cfg.seed, "generator seed");
  synth_cmd->add_option("--train-out", synth_args.train_out,
                        "train dataset file (.json or .csv)")
      ->required();
  synth_cmd->add_option("--test-out", synth_args.test_out,
                        "test dataset file (.json or .csv)")
      ->required();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand(
      "eval", "nearest-neighbor recall and error curves");
  eval_cmd->add_option("train", eval_args.train_file, "train dataset file")
      ->required();
  eval_cmd->add_option("test", eval_args.test_file, "test dataset file")
      ->required();
  eval_cmd->add_option("--distance", eval_args.distance,
                       "l1 | l2 | hellinger | emd_uniform");
  eval_cmd->add_option("--metric", eval_args.metric_file,
                       "metric csv; overrides --distance with its emd");
  eval_cmd->add_option("--kappas", eval_args.kappas,
                       "comma-separated neighbor counts (default: odd 1..15)");
  eval_cmd->add_option("--threads", eval_args.threads, "workers");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "run an experiment config");
  run_cmd->add_option("config", run_args.config_file, "key = value config file")
      ->required();
  run_cmd->add_option("-o,--out", run_args.out_dir, "output directory")
      ->required();
  run_cmd->add_option("--threads", run_args.threads,
                      "task pool size (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (emd_cmd->parsed()) cmd_emd(emd_args);
    if (project_cmd->parsed()) cmd_project(project_args);
    if (init_cmd->parsed()) cmd_init(init_args);
    if (train_cmd->parsed()) cmd_train(train_args);
    if (synth_cmd->parsed()) cmd_synth(synth_args);
    if (eval_cmd->parsed()) cmd_eval(eval_args);
    if (run_cmd->parsed()) cmd_run(run_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
