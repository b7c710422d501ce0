#pragma once

#include "gml/histogram.hpp"
#include "gml/training_set.hpp"

namespace gml {

/// Product coupling r c^T, the maximum-entropy element of U(r,c).
Matrix independence_table(const Histogram& r, const Histogram& c);

/// Shannon entropy in nats; 0 log 0 = 0. Throws on negative entries.
double entropy(const Matrix& table);

/// The concave functional sum (X+1)log(X+1) - X log X whose maximizer over
/// U(r,c) is the typical table.
double typical_objective(const Matrix& table);

struct TypicalResult {
  Matrix table;
  Vector u, v;  // positive dual variables; table = 1/(exp(u_p+v_q)-1)
  int newton_steps = 0;
  double residual = 0.0;  // final sup-norm of the marginal defect
};

/// Typical table of U(r,c), computed by damped Newton on the dual program
/// min_{u,v>0} r'u + c'v - sum log(1-exp(-u_p-v_q)). Marginals are mixed
/// with the uniform distribution (weight eps) before solving so empty bins
/// keep the dual domain open; the returned table matches the smoothed
/// marginals within tol.
TypicalResult solve_typical(const Histogram& r, const Histogram& c,
                            double tol = 1e-8, double eps = 1e-6);

Matrix typical_table(const Histogram& r, const Histogram& c,
                     double tol = 1e-8);

/// Hessian of the dual objective at a table T applied to [x; y] without
/// assembling the 2d x 2d matrix.
Vector typical_hessian_apply(const Matrix& table, const Vector& xy);

enum class TableKind { kIndependence, kTypical };

/// Weighted sum of representative tables over the pairs the criterion uses:
/// 2 * sum_{i<j} w_ij T_ij when k is kAllNeighbors, otherwise the sum over
/// each point's k nearest similar and dissimilar neighbors under the uniform
/// ground metric. A point whose similar or dissimilar side is empty is
/// skipped with a warning on stderr.
Matrix aggregate_xi(const TrainingSet& train, int k, TableKind kind,
                    int threads = 0);

}  // namespace gml
