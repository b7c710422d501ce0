#pragma once

#include "gml/metric.hpp"
#include "gml/training_set.hpp"
#include "gml/transport.hpp"

#include <optional>
#include <vector>

namespace gml {

enum class PairSign { kSimilar, kDissimilar };

/// Per-unordered-pair store of simplex bases for warm starts. A basis
/// depends only on the pair's marginals, not on the metric, so entries
/// stay valid across metric updates for a fixed training set.
class PlanCache {
 public:
  explicit PlanCache(int n);

  int size() const { return n_; }
  const TransportBasis* find(int i, int j) const;
  void store(int i, int j, TransportBasis basis);
  void clear();

 private:
  int index(int i, int j) const;

  int n_;
  std::vector<std::optional<TransportBasis>> slots_;
};

struct SubgradEval {
  double value = 0.0;
  Vector subgrad;  // d(d-1)/2 folded upper-triangle coordinates, TriIndex order
  long lp_solves = 0;
};

/// One side of the criterion: for each training point i, ranks the points j
/// it shares a similar (positive weight) or dissimilar (negative weight)
/// pair with by their transport cost under M, keeps the k nearest, and sums
/// the weighted costs. `subgrad` folds the sum of weighted optimal plans of
/// the kept pairs. Points with no pair of the requested sign contribute
/// nothing. k = kAllNeighbors keeps every pair. `warm`, if given, must have
/// been created for this training set; it is read and refreshed in place.
SubgradEval eval_S(const TrainingSet& train, const MetricMatrix& M,
                   PairSign sign, int k, PlanCache* warm = nullptr,
                   int threads = 0);

/// Full criterion value: similar side plus dissimilar side. The subgrad
/// field combines both sides and is a supergradient of neither; it is the
/// fold of the summed weighted plans.
SubgradEval eval_Ck(const TrainingSet& train, const MetricMatrix& M, int k,
                    PlanCache* warm_similar = nullptr,
                    PlanCache* warm_dissimilar = nullptr, int threads = 0);

}  // namespace gml
