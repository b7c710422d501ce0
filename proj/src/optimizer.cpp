#include "gml/optimizer.hpp"

#include "gml/io.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>

namespace gml {

int GmlParams::min_inner(int p) const {
  // The epsilon keeps exact integers (50 * 0.8^2 = 32) from rounding up.
  return static_cast<int>(std::ceil(50.0 * std::pow(0.8, p) - 1e-9));
}

void GmlParams::validate() const {
  if (k < 1) throw std::invalid_argument("GmlParams: k must be >= 1");
  if (!(t0 > 0)) throw std::invalid_argument("GmlParams: t0 must be > 0");
  if (p_max < 1 || q_max < 1)
    throw std::invalid_argument("GmlParams: p_max and q_max must be >= 1");
  if (!(progress_eps > 0 && progress_eps < 1))
    throw std::invalid_argument("GmlParams: progress_eps must be in (0,1)");
  if (progress_window < 1)
    throw std::invalid_argument("GmlParams: progress_window must be >= 1");
  if (!(metric_tol > 0))
    throw std::invalid_argument("GmlParams: metric_tol must be > 0");
}

namespace {

// Relative drop from `from` to `to`, signed: positive means improvement.
bool stalled(double from, double to, double eps) {
  return from - to <= eps * std::abs(from);
}

}  // namespace

DescentResult gml_descent(const TrainingSet& train, const MetricMatrix& M0,
                          const GmlParams& params,
                          const DescentOptions& options) {
  params.validate();
  if (M0.dim() != train.dim())
    throw std::invalid_argument("gml_descent: M0 dimension mismatch");
  if (M0.matrix().norm() > 1.0 + 1e-9)
    throw std::invalid_argument("gml_descent: M0 outside the unit ball");

  const int d = train.dim();
  const TriIndex tri(d);
  DescentTrace trace;
  std::unique_ptr<PlanCache> cache;
  if (options.use_warm_starts)
    cache = std::make_unique<PlanCache>(train.size());

  MetricMatrix M_out = M0;
  MetricMatrix best = M0;
  double best_value = std::numeric_limits<double>::infinity();
  long t = 1;
  std::vector<double> z_outs;

  for (int p = 0; p < params.p_max; ++p) {
    SubgradEval pos = eval_S(train, M_out, PairSign::kSimilar, params.k,
                             nullptr, options.threads);
    trace.lp_solves += pos.lp_solves;
    const MetricMatrix round_start = M_out;
    const Vector m_out_vec = tri.vectorize(M_out.matrix());

    MetricMatrix M_in = M_out;
    Vector m_in_vec = m_out_vec;
    double z_out = 0.0;
    std::vector<double> z_ins;

    for (int q = 0; q < params.q_max; ++q) {
      SubgradEval neg = eval_S(train, M_in, PairSign::kDissimilar, params.k,
                               cache.get(), options.threads);
      trace.lp_solves += neg.lp_solves;
      double z_in = neg.value + pos.value +
                    pos.subgrad.dot(m_in_vec - m_out_vec);
      if (q == 0) z_out = z_in;
      z_ins.push_back(z_in);

      Vector target =
          m_in_vec - (params.t0 / std::sqrt(static_cast<double>(t))) *
                         (pos.subgrad + neg.subgrad);
      Matrix target_mat = tri.symmetrize(target);
      MetricMatrix M_next = project_feasible(target_mat, params.metric_tol);
      double step_norm = (M_next.matrix() - M_in.matrix()).norm();
      double proj_residual = (M_next.matrix() - target_mat).norm();
      trace.rows.push_back(
          {p, q, t, z_in, z_out, step_norm, proj_residual});

      M_in = std::move(M_next);
      m_in_vec = tri.vectorize(M_in.matrix());
      ++t;

      int steps = q + 1;
      if (steps >= std::max(params.min_inner(p), params.progress_window + 1)) {
        double from = z_ins[steps - 1 - params.progress_window];
        if (stalled(from, z_in, params.progress_eps)) break;
      }
    }

    M_out = std::move(M_in);
    z_outs.push_back(z_out);
    trace.outer_values.push_back(z_out);
    // z_out is the criterion at the round's starting point (the surrogate's
    // linear term vanishes there), so that iterate is the one to keep.
    if (z_out < best_value) {
      best_value = z_out;
      best = round_start;
    }

    int rounds = p + 1;
    if (rounds >= 3 &&
        stalled(z_outs[rounds - 3], z_out, params.progress_eps))
      break;
  }

  SubgradEval final_eval =
      eval_Ck(train, M_out, params.k, nullptr, cache.get(), options.threads);
  trace.lp_solves += final_eval.lp_solves;
  trace.outer_values.push_back(final_eval.value);
  if (final_eval.value < best_value) {
    best_value = final_eval.value;
    best = M_out;
  }
  trace.best_value = best_value;

  return {std::move(best), std::move(M_out), std::move(trace)};
}

InitKind init_kind_from_name(const std::string& name) {
  if (name == "uniform") return InitKind::kUniform;
  if (name == "independence") return InitKind::kIndependence;
  if (name == "typical") return InitKind::kTypical;
  throw std::invalid_argument(
      "init kind must be uniform, independence, or typical; got '" + name +
      "'");
}

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::kUniform: return "uniform";
    case InitKind::kIndependence: return "independence";
    case InitKind::kTypical: return "typical";
  }
  throw std::logic_error("bad InitKind");
}

MetricMatrix initial_point(const TrainingSet& train, InitKind kind,
                           int k, double lambda, double mix, int threads) {
  const int d = train.dim();
  Matrix uniform = uniform_metric(d).matrix();
  MetricMatrix fallback =
      MetricMatrix::trusted(uniform / uniform.norm());
  if (kind == InitKind::kUniform) return fallback;

  if (k < 1) throw std::invalid_argument("initial_point: k must be >= 1");
  if (!(lambda > 0))
    throw std::invalid_argument("initial_point: lambda must be > 0");
  if (!(mix >= 0 && mix <= 1))
    throw std::invalid_argument("initial_point: mix must be in [0,1]");

  TableKind table = kind == InitKind::kIndependence ? TableKind::kIndependence
                                                    : TableKind::kTypical;
  Matrix xi = aggregate_xi(train, k, table, threads);
  if (xi.norm() < 1e-14) {
    std::cerr << "initial_point: aggregate table sum vanishes; "
                 "using the uniform metric\n";
    return fallback;
  }
  Matrix m = solve_P3(xi, lambda).matrix();
  if (mix < 1.0) m = mix * m + (1.0 - mix) * uniform;
  double norm = m.norm();
  if (norm < 1e-14) {
    std::cerr << "initial_point: projected initial point vanishes; "
                 "using the uniform metric\n";
    return fallback;
  }
  // Rescaling magnifies the projection residual along with the entries, so
  // snap the unit-scale matrix back onto the cone before vouching for it.
  return triangle_fix(Matrix(m / norm));
}

void write_trace_csv(std::ostream& os, const DescentTrace& trace) {
  os << "# inner stop: q = q_max, or z_in drops by <= 0.75% (relative) over "
        "the last 6 steps once ceil(50*0.8^p) steps are done\n";
  os << "# outer stop: p = p_max, or z_out drops by <= 0.75% (relative) over "
        "the last 2 rounds\n";
  os << "p,q,t,z_in,z_out,step_norm\n";
  for (const TraceRow& r : trace.rows)
    os << r.p << ',' << r.q << ',' << r.t << ',' << format_sig(r.z_in) << ','
       << format_sig(r.z_out) << ',' << format_sig(r.step_norm) << '\n';
}

}  // namespace gml
