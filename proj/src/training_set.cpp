#include "gml/training_set.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace gml {

TrainingSet::TrainingSet(std::vector<Histogram> histograms, Matrix weights)
    : histograms_(std::move(histograms)), weights_(std::move(weights)) {
  const int n = static_cast<int>(histograms_.size());
  if (n < 2) throw std::invalid_argument("TrainingSet: need at least 2 points");
  for (const auto& h : histograms_) require_same_dim(histograms_.front(), h);
  if (weights_.rows() != n || weights_.cols() != n)
    throw std::invalid_argument("TrainingSet: weight matrix must be n x n");
  if (!weights_.allFinite())
    throw std::invalid_argument("TrainingSet: non-finite weight");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(weights_(i, j) - weights_(j, i)) > 1e-9)
        throw std::invalid_argument("TrainingSet: weights must be symmetric");
  weights_.diagonal().setZero();
}

TrainingSet make_training_set(std::vector<Histogram> histograms,
                              const std::vector<int>& labels) {
  const int n = static_cast<int>(histograms.size());
  if (labels.size() != histograms.size())
    throw std::invalid_argument("make_training_set: one label per histogram");
  Matrix w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      w(i, j) = i == j ? 0.0 : (labels[i] == labels[j] ? 1.0 : -1.0);
  return TrainingSet(std::move(histograms), std::move(w));
}

TrainingSet normalize_weights(const TrainingSet& train) {
  const Matrix& w = train.weights();
  const int n = train.size();
  double pos = 0.0, neg = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (w(i, j) > 0) pos += w(i, j);
      if (w(i, j) < 0) neg -= w(i, j);
    }
  if (pos <= 0.0)
    throw std::invalid_argument("normalize_weights: no positive weights");
  if (neg <= 0.0)
    throw std::invalid_argument("normalize_weights: no negative weights");
  Matrix scaled = w;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      scaled(i, j) = w(i, j) > 0 ? w(i, j) / pos : w(i, j) / neg;
  return TrainingSet(train.histograms(), std::move(scaled));
}

}  // namespace gml
