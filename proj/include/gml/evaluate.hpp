#pragma once

#include "gml/dataset.hpp"
#include "gml/histogram.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gml {

enum class BaselineKind { kL1, kL2, kHellinger };

BaselineKind baseline_from_name(const std::string& name);

double baseline_distance(BaselineKind kind, const Histogram& r,
                         const Histogram& c);

using DistanceFn = std::function<double(const Histogram&, const Histogram&)>;

struct KnnCurves {
  std::vector<int> kappas;
  std::vector<double> recall;  // mean same-class share among the k nearest
  std::vector<double> error;   // majority-vote misclassification rate
};

/// Odd values 1,3,...,15, truncated to the train size.
std::vector<int> default_kappas(int train_size);

/// Nearest-neighbor curves of `dist` for classifying test points against the
/// train set. Distance ties rank the smaller train index first; vote ties go
/// to the smaller class label. Throws if a kappa exceeds the train size or a
/// test label never occurs in train.
KnnCurves knn_eval(const DistanceFn& dist, const LabeledDataset& train,
                   const LabeledDataset& test, const std::vector<int>& kappas,
                   int threads = 0);

}  // namespace gml
