#pragma once

#include "gml/histogram.hpp"

#include <limits>
#include <vector>

namespace gml {

/// Neighborhood-size sentinel meaning "use every available neighbor".
inline constexpr int kAllNeighbors = std::numeric_limits<int>::max();

/// n histograms of common dimension plus a symmetric weight matrix.
/// Positive weights mark similar pairs, negative weights dissimilar ones;
/// the diagonal is forced to zero.
class TrainingSet {
 public:
  TrainingSet(std::vector<Histogram> histograms, Matrix weights);

  int size() const { return static_cast<int>(histograms_.size()); }
  int dim() const { return histograms_.front().dim(); }
  const Histogram& histogram(int i) const { return histograms_[i]; }
  const std::vector<Histogram>& histograms() const { return histograms_; }
  const Matrix& weights() const { return weights_; }
  double weight(int i, int j) const { return weights_(i, j); }

 private:
  std::vector<Histogram> histograms_;
  Matrix weights_;
};

/// Builds the +1 same-class / -1 different-class weight matrix from labels.
TrainingSet make_training_set(std::vector<Histogram> histograms,
                              const std::vector<int>& labels);

/// Rescales weights so the positive ones sum to 1 and the negative ones sum
/// to -1 over unordered pairs. Throws if either side is entirely absent.
TrainingSet normalize_weights(const TrainingSet& train);

}  // namespace gml
