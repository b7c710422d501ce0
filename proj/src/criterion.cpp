#include "gml/criterion.hpp"

#include "gml/parallel.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

namespace gml {

PlanCache::PlanCache(int n) : n_(n) {
  if (n < 2) throw std::invalid_argument("PlanCache: need n >= 2");
  slots_.resize(static_cast<size_t>(n) * (n - 1) / 2);
}

int PlanCache::index(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= n_ || i == j)
    throw std::out_of_range("PlanCache: bad pair");
  return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
}

const TransportBasis* PlanCache::find(int i, int j) const {
  const auto& slot = slots_[index(i, j)];
  return slot ? &*slot : nullptr;
}

void PlanCache::store(int i, int j, TransportBasis basis) {
  slots_[index(i, j)] = std::move(basis);
}

void PlanCache::clear() {
  for (auto& slot : slots_) slot.reset();
}

namespace {

struct PairSolve {
  double value = 0.0;
  Vector folded;  // fold of the optimal plan, TriIndex order
};

}  // namespace

SubgradEval eval_S(const TrainingSet& train, const MetricMatrix& M,
                   PairSign sign, int k, PlanCache* warm, int threads) {
  if (k < 1) throw std::invalid_argument("eval_S: k must be >= 1");
  if (M.dim() != train.dim())
    throw std::invalid_argument("eval_S: metric dimension mismatch");
  if (warm && warm->size() != train.size())
    throw std::invalid_argument("eval_S: cache size mismatch");

  const int n = train.size();
  const TriIndex tri(train.dim());
  const Matrix& W = train.weights();
  const bool want_positive = sign == PairSign::kSimilar;

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double w = W(i, j);
      if (want_positive ? w > 0 : w < 0) pairs.push_back({i, j});
    }

  SubgradEval out;
  out.subgrad = Vector::Zero(tri.size());
  if (pairs.empty()) return out;

  std::vector<PairSolve> solved(pairs.size());
  std::vector<TransportBasis> bases(pairs.size());
  parallel_for(
      static_cast<int>(pairs.size()),
      [&](int p) {
        auto [i, j] = pairs[p];
        const TransportBasis* start = warm ? warm->find(i, j) : nullptr;
        SolveResult res;
        try {
          res = solve_transport(M.matrix(), train.histogram(i),
                                train.histogram(j), start);
        } catch (const std::exception& e) {
          throw std::runtime_error("eval_S: pair (" + std::to_string(i) + "," +
                                   std::to_string(j) + "): " + e.what());
        }
        solved[p] = {res.plan.value, tri.fold(res.plan.plan)};
        bases[p] = std::move(res.basis);
      },
      threads);
  out.lp_solves = static_cast<long>(pairs.size());

  if (warm)
    for (size_t p = 0; p < pairs.size(); ++p)
      warm->store(pairs[p].first, pairs[p].second, std::move(bases[p]));

  // Candidates of point i: every pair it belongs to, keyed by the other end.
  struct Candidate {
    double value;
    int other;
    size_t pair;
  };
  std::vector<std::vector<Candidate>> cand(n);
  for (size_t p = 0; p < pairs.size(); ++p) {
    auto [i, j] = pairs[p];
    cand[i].push_back({solved[p].value, j, p});
    cand[j].push_back({solved[p].value, i, p});
  }

  for (int i = 0; i < n; ++i) {
    auto& list = cand[i];
    std::sort(list.begin(), list.end(), [](const Candidate& a,
                                           const Candidate& b) {
      return a.value != b.value ? a.value < b.value : a.other < b.other;
    });
    size_t keep = std::min<size_t>(list.size(), static_cast<size_t>(k));
    for (size_t t = 0; t < keep; ++t) {
      const Candidate& c = list[t];
      double w = W(i, c.other);
      out.value += w * c.value;
      out.subgrad += w * solved[c.pair].folded;
    }
  }
  return out;
}

SubgradEval eval_Ck(const TrainingSet& train, const MetricMatrix& M, int k,
                    PlanCache* warm_similar, PlanCache* warm_dissimilar,
                    int threads) {
  SubgradEval pos =
      eval_S(train, M, PairSign::kSimilar, k, warm_similar, threads);
  SubgradEval neg =
      eval_S(train, M, PairSign::kDissimilar, k, warm_dissimilar, threads);
  SubgradEval out;
  out.value = pos.value + neg.value;
  out.subgrad = pos.subgrad + neg.subgrad;
  out.lp_solves = pos.lp_solves + neg.lp_solves;
  return out;
}

}  // namespace gml
