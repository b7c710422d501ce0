#pragma once

#include "gml/criterion.hpp"
#include "gml/metric.hpp"
#include "gml/tables.hpp"
#include "gml/training_set.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gml {

struct GmlParams {
  int k = 3;                    // criterion neighborhood size
  double t0 = 0.1;              // base step; actual step is t0/sqrt(t)
  int p_max = 8;                // outer round cap
  int q_max = 200;              // inner step cap per round
  double progress_eps = 0.0075;  // relative improvement below this stalls
  int progress_window = 6;       // inner steps per progress comparison
  double metric_tol = kMetricTol;

  /// Floor on inner steps for outer round p (0-based): ceil(50 * 0.8^p).
  int min_inner(int p) const;
  void validate() const;
};

struct TraceRow {
  int p = 0;       // outer round
  int q = 0;       // inner step within the round
  long t = 0;      // global step counter (drives the step size)
  double z_in = 0.0;          // surrogate objective at the current inner point
  double z_out = 0.0;         // this round's objective at its starting point
  double step_norm = 0.0;      // Frobenius distance moved by this update
  double proj_residual = 0.0;  // Frobenius distance the projection corrected
};

struct DescentTrace {
  std::vector<TraceRow> rows;
  std::vector<double> outer_values;  // objective per round start + final point
  double best_value = 0.0;
  long lp_solves = 0;
};

struct DescentOptions {
  int threads = 0;
  bool use_warm_starts = true;
};

struct DescentResult {
  MetricMatrix metric;  // best-objective iterate encountered
  MetricMatrix last;    // final outer iterate
  DescentTrace trace;
};

/// Difference-of-convex projected subgradient descent of the criterion over
/// the metric cone intersected with the Frobenius unit ball. Each outer
/// round freezes a linearization of the similar-pair sum at the round's
/// starting point and descends the resulting convex surrogate; simplex
/// bases of the dissimilar pairs are carried between steps as warm starts.
/// Weights are expected normalized (see normalize_weights), which the step
/// size t0 is calibrated for.
DescentResult gml_descent(const TrainingSet& train, const MetricMatrix& M0,
                          const GmlParams& params = {},
                          const DescentOptions& options = {});

enum class InitKind { kUniform, kIndependence, kTypical };

/// "uniform" | "independence" | "typical".
InitKind init_kind_from_name(const std::string& name);
std::string to_string(InitKind kind);

/// Starting point for gml_descent. kUniform gives the unit-norm uniform
/// metric. The table kinds aggregate weighted representative tables over
/// the pairs the criterion would select under the uniform metric, solve the
/// regularized linear approximation over the cone, optionally mix the
/// result with the uniform metric, and scale onto the unit sphere. Falls
/// back to kUniform with a warning if the aggregate or its projection
/// vanishes.
MetricMatrix initial_point(const TrainingSet& train, InitKind kind,
                           int k = kAllNeighbors, double lambda = 1.0,
                           double mix = 1.0, int threads = 0);

/// Rows p,q,t,z_in,z_out,step_norm at 12 significant digits, preceded by
/// '#' comments stating the stopping rules.
void write_trace_csv(std::ostream& os, const DescentTrace& trace);

}  // namespace gml
