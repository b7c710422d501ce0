#include "gml/criterion.hpp"
#include "gml/dataset.hpp"
#include "gml/evaluate.hpp"
#include "gml/metric.hpp"
#include "gml/optimizer.hpp"
#include "gml/tables.hpp"
#include "gml/training_set.hpp"
#include "gml/transport.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace gml;

namespace {

std::vector<Histogram> rows_to_histograms(const Matrix& rows) {
  std::vector<Histogram> out;
  out.reserve(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    out.emplace_back(Vector(rows.row(i).transpose()));
  return out;
}

TrainingSet build_training_set(const Matrix& rows,
                               const std::vector<int>& labels) {
  return normalize_weights(make_training_set(rows_to_histograms(rows), labels));
}

LabeledDataset build_dataset(const Matrix& rows,
                             const std::vector<int>& labels) {
  LabeledDataset ds;
  ds.d = static_cast<int>(rows.cols());
  ds.histograms = rows_to_histograms(rows);
  ds.labels = labels;
  ds.validate();
  return ds;
}

Matrix histograms_to_rows(const std::vector<Histogram>& hists) {
  Matrix rows(hists.size(), hists.front().dim());
  for (size_t i = 0; i < hists.size(); ++i)
    rows.row(i) = hists[i].values().transpose();
  return rows;
}

int neighbor_count(int k) { return k == 0 ? kAllNeighbors : k; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ground metric learning for earth mover's distances";

  m.def(
      "emd",
      [](const Matrix& metric, const Vector& r, const Vector& c) {
        return emd(MetricMatrix(metric), Histogram(r), Histogram(c));
      },
      py::arg("metric"), py::arg("r"), py::arg("c"),
      "Optimal transport distance under a ground metric.");

  m.def(
      "solve_transport",
      [](const Matrix& cost, const Vector& r, const Vector& c) {
        SolveResult res = solve_transport(cost, Histogram(r), Histogram(c));
        return py::make_tuple(res.plan.value, res.plan.plan);
      },
      py::arg("cost"), py::arg("r"), py::arg("c"),
      "Exact transport LP; returns (value, plan).");

  m.def(
      "uniform_metric", [](int d) { return uniform_metric(d).matrix(); },
      py::arg("d"));

  m.def(
      "is_metric",
      [](const Matrix& h, double tol) {
        MetricCheck check = is_metric(h, tol);
        std::vector<std::string> messages;
        for (const MetricViolation& v : check.violations)
          messages.push_back(v.describe());
        return py::make_tuple(check.ok, messages);
      },
      py::arg("h"), py::arg("tol") = kMetricTol,
      "Returns (ok, list of violation descriptions).");

  m.def(
      "triangle_fix",
      [](const Matrix& h, double tol) { return triangle_fix(h, tol).matrix(); },
      py::arg("h"), py::arg("tol") = kMetricTol,
      "Frobenius projection onto the metric cone.");

  m.def(
      "project_feasible",
      [](const Matrix& h, double tol) {
        return project_feasible(h, tol).matrix();
      },
      py::arg("h"), py::arg("tol") = kMetricTol,
      "Cone projection rescaled into the Frobenius unit ball.");

  m.def(
      "independence_table",
      [](const Vector& r, const Vector& c) {
        return independence_table(Histogram(r), Histogram(c));
      },
      py::arg("r"), py::arg("c"));

  m.def(
      "typical_table",
      [](const Vector& r, const Vector& c, double tol) {
        return typical_table(Histogram(r), Histogram(c), tol);
      },
      py::arg("r"), py::arg("c"), py::arg("tol") = 1e-8);

  m.def(
      "eval_ck",
      [](const Matrix& histograms, const std::vector<int>& labels,
         const Matrix& metric, int k, int threads) {
        TrainingSet ts = build_training_set(histograms, labels);
        return eval_Ck(ts, MetricMatrix(metric), neighbor_count(k), nullptr,
                       nullptr, threads)
            .value;
      },
      py::arg("histograms"), py::arg("labels"), py::arg("metric"),
      py::arg("k") = 3, py::arg("threads") = 0,
      "Criterion value on a labeled set; k=0 means all neighbors.");

  m.def(
      "initial_point",
      [](const Matrix& histograms, const std::vector<int>& labels,
         const std::string& kind, int k, double lambda, double mix,
         int threads) {
        TrainingSet ts = build_training_set(histograms, labels);
        return initial_point(ts, init_kind_from_name(kind), neighbor_count(k),
                             lambda, mix, threads)
            .matrix();
      },
      py::arg("histograms"), py::arg("labels"), py::arg("kind") = "typical",
      py::arg("k") = 0, py::arg("lambda") = 1.0, py::arg("mix") = 1.0,
      py::arg("threads") = 0,
      "Starting metric from representative tables; k=0 means all neighbors.");

  m.def(
      "train",
      [](const Matrix& histograms, const std::vector<int>& labels, int k,
         double t0, int p_max, int q_max, const std::string& init, int init_k,
         double lambda, double mix, bool warm_starts, int threads) {
        TrainingSet ts = build_training_set(histograms, labels);
        MetricMatrix m0 =
            initial_point(ts, init_kind_from_name(init),
                          neighbor_count(init_k), lambda, mix, threads);
        GmlParams params;
        params.k = k;
        params.t0 = t0;
        params.p_max = p_max;
        params.q_max = q_max;
        DescentOptions opts;
        opts.threads = threads;
        opts.use_warm_starts = warm_starts;
        DescentResult res = gml_descent(ts, m0, params, opts);
        py::dict out;
        out["metric"] = res.metric.matrix();
        out["last"] = res.last.matrix();
        out["initial"] = m0.matrix();
        out["best_value"] = res.trace.best_value;
        out["outer_values"] = res.trace.outer_values;
        out["lp_solves"] = res.trace.lp_solves;
        return out;
      },
      py::arg("histograms"), py::arg("labels"), py::arg("k") = 3,
      py::arg("t0") = 0.1, py::arg("p_max") = 8, py::arg("q_max") = 200,
      py::arg("init") = "typical", py::arg("init_k") = 0,
      py::arg("lambda") = 1.0, py::arg("mix") = 1.0,
      py::arg("warm_starts") = true, py::arg("threads") = 0,
      "Learn a ground metric by projected subgradient descent.");

  m.def(
      "knn_curves",
      [](const Matrix& train_h, const std::vector<int>& train_labels,
         const Matrix& test_h, const std::vector<int>& test_labels,
         std::optional<Matrix> metric, const std::string& distance,
         std::vector<int> kappas, int threads) {
        LabeledDataset train = build_dataset(train_h, train_labels);
        LabeledDataset test = build_dataset(test_h, test_labels);
        DistanceFn fn;
        if (metric) {
          MetricMatrix M(*metric);
          fn = [M](const Histogram& r, const Histogram& c) {
            return emd(M, r, c);
          };
        } else {
          BaselineKind kind = baseline_from_name(distance);
          fn = [kind](const Histogram& r, const Histogram& c) {
            return baseline_distance(kind, r, c);
          };
        }
        if (kappas.empty()) kappas = default_kappas(train.size());
        KnnCurves curves = knn_eval(fn, train, test, kappas, threads);
        py::dict out;
        out["kappas"] = curves.kappas;
        out["recall"] = curves.recall;
        out["error"] = curves.error;
        return out;
      },
      py::arg("train_histograms"), py::arg("train_labels"),
      py::arg("test_histograms"), py::arg("test_labels"),
      py::arg("metric") = std::nullopt, py::arg("distance") = "l1",
      py::arg("kappas") = std::vector<int>{}, py::arg("threads") = 0,
      "Recall and error curves; EMD under `metric` if given, else a baseline.");

  m.def(
      "synth",
      [](int d, int blocks, int classes, int train_per_class,
         int test_per_class, double within_noise, double cross_signal,
         std::uint64_t seed) {
        SynthConfig cfg{d,        blocks,       classes,
                        train_per_class, test_per_class, within_noise,
                        cross_signal,    seed};
        SynthData data = synth_generate(cfg);
        py::dict out;
        out["train_histograms"] = histograms_to_rows(data.train.histograms);
        out["train_labels"] = data.train.labels;
        out["test_histograms"] = histograms_to_rows(data.test.histograms);
        out["test_labels"] = data.test.labels;
        return out;
      },
      py::arg("d") = 16, py::arg("blocks") = 2, py::arg("classes") = 2,
      py::arg("train_per_class") = 30, py::arg("test_per_class") = 40,
      py::arg("within_noise") = 0.9, py::arg("cross_signal") = 0.35,
      py::arg("seed") = 1,
      "Planted-block synthetic dataset as numpy arrays.");
}
