#include "gml/evaluate.hpp"

#include "gml/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace gml {

BaselineKind baseline_from_name(const std::string& name) {
  if (name == "l1") return BaselineKind::kL1;
  if (name == "l2") return BaselineKind::kL2;
  if (name == "hellinger") return BaselineKind::kHellinger;
  throw std::invalid_argument("unknown baseline '" + name + "'");
}

double baseline_distance(BaselineKind kind, const Histogram& r,
                         const Histogram& c) {
  require_same_dim(r, c);
  switch (kind) {
    case BaselineKind::kL1:
      return (r.values() - c.values()).lpNorm<1>();
    case BaselineKind::kL2:
      return (r.values() - c.values()).norm();
    case BaselineKind::kHellinger:
      return (r.values().array().sqrt() - c.values().array().sqrt())
          .matrix()
          .norm();
  }
  throw std::logic_error("unreachable");
}

std::vector<int> default_kappas(int train_size) {
  std::vector<int> ks;
  for (int k = 1; k <= 15 && k <= train_size; k += 2) ks.push_back(k);
  return ks;
}

KnnCurves knn_eval(const DistanceFn& dist, const LabeledDataset& train,
                   const LabeledDataset& test, const std::vector<int>& kappas,
                   int threads) {
  train.validate();
  test.validate();
  if (train.d != test.d)
    throw std::invalid_argument("knn_eval: train/test dimension mismatch");
  if (kappas.empty()) throw std::invalid_argument("knn_eval: no kappa values");
  for (int k : kappas)
    if (k < 1 || k > train.size())
      throw std::invalid_argument("knn_eval: kappa " + std::to_string(k) +
                                  " outside [1, train size]");
  std::set<int> train_labels(train.labels.begin(), train.labels.end());
  for (int lab : test.labels)
    if (!train_labels.count(lab))
      throw std::invalid_argument("knn_eval: test label " +
                                  std::to_string(lab) + " absent from train");

  const int n_test = test.size();
  const int n_train = train.size();
  const int n_kappa = static_cast<int>(kappas.size());

  // recall_hits[i*n_kappa + a], correct[i*n_kappa + a] per test point.
  std::vector<double> recall_hits(static_cast<size_t>(n_test) * n_kappa);
  std::vector<char> correct(static_cast<size_t>(n_test) * n_kappa);

  parallel_for(
      n_test,
      [&](int i) {
        std::vector<std::pair<double, int>> ranked(n_train);
        for (int j = 0; j < n_train; ++j)
          ranked[j] = {dist(test.histograms[i], train.histograms[j]), j};
        std::sort(ranked.begin(), ranked.end());

        for (int a = 0; a < n_kappa; ++a) {
          int kappa = kappas[a];
          int same = 0;
          std::map<int, int> votes;
          for (int t = 0; t < kappa; ++t) {
            int label = train.labels[ranked[t].second];
            if (label == test.labels[i]) ++same;
            ++votes[label];
          }
          int best_label = votes.begin()->first;
          int best_count = votes.begin()->second;
          for (const auto& [label, count] : votes)
            if (count > best_count) {
              best_label = label;
              best_count = count;
            }
          recall_hits[static_cast<size_t>(i) * n_kappa + a] =
              static_cast<double>(same) / kappa;
          correct[static_cast<size_t>(i) * n_kappa + a] =
              best_label == test.labels[i];
        }
      },
      threads);

  KnnCurves curves;
  curves.kappas = kappas;
  curves.recall.assign(n_kappa, 0.0);
  curves.error.assign(n_kappa, 0.0);
  for (int i = 0; i < n_test; ++i)
    for (int a = 0; a < n_kappa; ++a) {
      curves.recall[a] += recall_hits[static_cast<size_t>(i) * n_kappa + a];
      if (!correct[static_cast<size_t>(i) * n_kappa + a])
        curves.error[a] += 1.0;
    }
  for (int a = 0; a < n_kappa; ++a) {
    curves.recall[a] /= n_test;
    curves.error[a] /= n_test;
  }
  return curves;
}

}  // namespace gml
