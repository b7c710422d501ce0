#pragma once

#include "gml/histogram.hpp"
#include "gml/metric.hpp"

#include <vector>

namespace gml {

struct TransportPlan {
  Matrix plan;   // d x d, nonnegative, row sums r, column sums c
  double value;  // <cost, plan>
};

/// Spanning-tree basis of the bipartite flow network, as the 2d-1 arc ids
/// i*d+j of the basic variables, ascending. Flows are recovered from the
/// marginals, so a basis stays reusable across cost changes as long as
/// (r, c) are unchanged.
struct TransportBasis {
  std::vector<int> arcs;
};

struct SolveResult {
  TransportPlan plan;
  TransportBasis basis;
  int pivots = 0;
  bool warm_started = false;
};

/// Exact minimum-cost transport between r and c under a finite d x d cost,
/// by primal network simplex. Dantzig pricing with a switch to Bland's rule
/// under sustained degeneracy, so cycling cannot occur. `warm`, if given,
/// must come from a solve with the same marginals; an incompatible basis
/// falls back to a cold start.
SolveResult solve_transport(const Matrix& cost, const Histogram& r,
                            const Histogram& c,
                            const TransportBasis* warm = nullptr);

/// Earth mover's distance: optimal transport value under a ground metric.
double emd(const MetricMatrix& metric, const Histogram& r, const Histogram& c);

/// Reference solver: enumerates every spanning-tree basis of the complete
/// bipartite graph and takes the best feasible one. Exponential; d <= 5.
TransportPlan brute_force_transport(const Matrix& cost, const Histogram& r,
                                    const Histogram& c);

}  // namespace gml
