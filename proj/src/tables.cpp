#include "gml/tables.hpp"

#include "gml/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gml {

Matrix independence_table(const Histogram& r, const Histogram& c) {
  require_same_dim(r, c);
  return r.values() * c.values().transpose();
}

double entropy(const Matrix& table) {
  double h = 0.0;
  for (int i = 0; i < table.rows(); ++i)
    for (int j = 0; j < table.cols(); ++j) {
      double x = table(i, j);
      if (x < 0)
        throw std::invalid_argument("entropy: negative entry");
      if (x > 0) h -= x * std::log(x);
    }
  return h;
}

double typical_objective(const Matrix& table) {
  double g = 0.0;
  for (int i = 0; i < table.rows(); ++i)
    for (int j = 0; j < table.cols(); ++j) {
      double x = table(i, j);
      if (x < 0)
        throw std::invalid_argument("typical_objective: negative entry");
      g += (x + 1.0) * std::log1p(x);
      if (x > 0) g -= x * std::log(x);
    }
  return g;
}

Vector typical_hessian_apply(const Matrix& table, const Vector& xy) {
  const int d = static_cast<int>(table.rows());
  if (table.cols() != d || xy.size() != 2 * d)
    throw std::invalid_argument("typical_hessian_apply: shape mismatch");
  Matrix w = table.array() * (1.0 + table.array());
  Vector x = xy.head(d), y = xy.tail(d);
  Vector out(2 * d);
  out.head(d) = (w.rowwise().sum().array() * x.array()).matrix() + w * y;
  out.tail(d) = w.transpose() * x + (w.colwise().sum().transpose().array() * y.array()).matrix();
  return out;
}

namespace {

// Dual objective of the typical-table program at pairwise sums s = u_p+v_q.
// Returns +inf when a sum is so small that exp(-s) rounds to 1.
double dual_objective(const Vector& rs, const Vector& cs, const Vector& u,
                      const Vector& v) {
  double f = rs.dot(u) + cs.dot(v);
  const int d = static_cast<int>(u.size());
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q) {
      double e = std::exp(-(u[p] + v[q]));
      if (e >= 1.0) return std::numeric_limits<double>::infinity();
      f -= std::log1p(-e);
    }
  return f;
}

Matrix table_from_duals(const Vector& u, const Vector& v) {
  const int d = static_cast<int>(u.size());
  Matrix t(d, d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q) t(p, q) = 1.0 / std::expm1(u[p] + v[q]);
  return t;
}

// Shifting (u,v) along the kernel [1;-1] leaves the objective unchanged;
// equalizing the two minima keeps iterates well inside the positive orthant.
void recenter(Vector& u, Vector& v) {
  double shift = 0.5 * (v.minCoeff() - u.minCoeff());
  u.array() += shift;
  v.array() -= shift;
}

Vector marginal_gradient(const Vector& rs, const Vector& cs, const Matrix& t) {
  const int d = static_cast<int>(rs.size());
  Vector g(2 * d);
  g.head(d) = rs - t.rowwise().sum();
  g.tail(d) = cs - t.colwise().sum().transpose();
  return g;
}

struct NewtonStep {
  Vector dir;    // in (u,v) coordinates, or (log u, log v) in log mode
  double slope;  // directional derivative of the objective along dir
};

// Newton direction for the dual objective, deflated along the kernel.
// In log mode the variables are (a,b) with u=e^a, v=e^b and tau adds a
// Levenberg shift for the extra curvature term, which may be indefinite.
NewtonStep newton_direction(const Matrix& t, const Vector& g, const Vector& u,
                            const Vector& v, bool log_mode, double tau) {
  const int d = static_cast<int>(u.size());
  Matrix w = t.array() * (1.0 + t.array());
  Matrix h = Matrix::Zero(2 * d, 2 * d);
  h.topLeftCorner(d, d).diagonal() = w.rowwise().sum();
  h.topRightCorner(d, d) = w;
  h.bottomLeftCorner(d, d) = w.transpose();
  h.bottomRightCorner(d, d).diagonal() = w.colwise().sum();

  Vector grad = g;
  if (log_mode) {
    Vector wvec(2 * d);
    wvec << u, v;
    grad = wvec.asDiagonal() * g;
    h = wvec.asDiagonal() * h * wvec.asDiagonal();
    h.diagonal() += (wvec.array() * g.array()).abs().matrix();
    h.diagonal().array() += tau;
  } else {
    Vector kernel(2 * d);
    kernel << Vector::Ones(d), -Vector::Ones(d);
    double mu = h.trace() / (4.0 * d * d);
    h += mu * kernel * kernel.transpose();
  }
  Eigen::LDLT<Matrix> ldlt(h);
  Vector dir = -ldlt.solve(grad);
  if (!dir.allFinite() || grad.dot(dir) >= 0) dir = -grad;
  return {dir, grad.dot(dir)};
}

}  // namespace

TypicalResult solve_typical(const Histogram& r, const Histogram& c, double tol,
                            double eps) {
  require_same_dim(r, c);
  if (tol <= 0 || eps < 0 || eps >= 1)
    throw std::invalid_argument("solve_typical: bad tol or eps");
  const int d = r.dim();
  Vector rs = (1.0 - eps) * r.values();
  rs.array() += eps / d;
  rs /= rs.sum();
  Vector cs = (1.0 - eps) * c.values();
  cs.array() += eps / d;
  cs /= cs.sum();

  Vector u = Vector::Constant(d, std::log1p(static_cast<double>(d)));
  Vector v = u;
  const int max_steps = 100;
  bool log_mode = false;
  double tau = 1e-3;

  Matrix t = table_from_duals(u, v);
  double f = dual_objective(rs, cs, u, v);
  for (int step = 0; step < max_steps; ++step) {
    Vector g = marginal_gradient(rs, cs, t);
    double gn = g.lpNorm<Eigen::Infinity>();
    if (gn <= tol) return {std::move(t), u, v, step, gn};

    NewtonStep ns = newton_direction(t, g, u, v, log_mode, tau);
    const Vector& dir = ns.dir;
    double stepsize = 1.0;
    bool accepted = false;
    while (stepsize >= 1e-12) {
      Vector un, vn;
      if (log_mode) {
        un = (u.array().log() + stepsize * dir.head(d).array()).exp();
        vn = (v.array().log() + stepsize * dir.tail(d).array()).exp();
      } else {
        un = u + stepsize * dir.head(d);
        vn = v + stepsize * dir.tail(d);
      }
      if (un.minCoeff() > 0 && vn.minCoeff() > 0) {
        double fn = dual_objective(rs, cs, un, vn);
        // The allowance admits full Newton steps once the predicted decrease
        // sinks under the objective's rounding noise; the gradient check at
        // the loop top is what actually terminates in that regime.
        double noise = 1e-14 * (1.0 + std::abs(f));
        if (fn <= f + 1e-4 * stepsize * ns.slope + noise) {
          u = std::move(un);
          v = std::move(vn);
          f = fn;
          accepted = true;
          break;
        }
      }
      stepsize *= 0.5;
    }
    if (accepted) {
      if (log_mode) tau = std::max(tau / 3.0, 1e-12);
      recenter(u, v);
      f = dual_objective(rs, cs, u, v);
      t = table_from_duals(u, v);
    } else if (!log_mode) {
      log_mode = true;
      tau = 1e-3;
    } else {
      tau *= 10.0;
      if (tau > 1e12)
        throw std::runtime_error("solve_typical: line search stalled");
    }
  }
  throw std::runtime_error("solve_typical: no convergence in 100 steps");
}

Matrix typical_table(const Histogram& r, const Histogram& c, double tol) {
  return solve_typical(r, c, tol).table;
}

namespace {

double half_l1(const Histogram& a, const Histogram& b) {
  return 0.5 * (a.values() - b.values()).lpNorm<1>();
}

// Indices of the k nearest neighbors of i among `candidates` under the
// uniform ground metric, ties toward the smaller index.
std::vector<int> nearest_under_uniform(const TrainingSet& train, int i,
                                       const std::vector<int>& candidates,
                                       int k) {
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(candidates.size());
  for (int j : candidates)
    ranked.push_back({half_l1(train.histogram(i), train.histogram(j)), j});
  std::sort(ranked.begin(), ranked.end());
  int keep = std::min<int>(k, static_cast<int>(ranked.size()));
  std::vector<int> out(keep);
  for (int t = 0; t < keep; ++t) out[t] = ranked[t].second;
  return out;
}

}  // namespace

Matrix aggregate_xi(const TrainingSet& train, int k, TableKind kind,
                    int threads) {
  if (k < 1) throw std::invalid_argument("aggregate_xi: k must be >= 1");
  const int n = train.size();
  const int d = train.dim();
  const Matrix& w = train.weights();

  // Ordered (i,j) contributions; the representative table of (j,i) is the
  // transpose of the (i,j) one, so each unordered pair is solved once.
  std::vector<std::pair<int, int>> selected;
  if (k == kAllNeighbors) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (w(i, j) != 0.0) selected.push_back({i, j});
  } else {
    for (int i = 0; i < n; ++i) {
      std::vector<int> similar, dissimilar;
      for (int j = 0; j < n; ++j) {
        if (w(i, j) > 0) similar.push_back(j);
        if (w(i, j) < 0) dissimilar.push_back(j);
      }
      if (similar.empty() || dissimilar.empty()) {
        std::cerr << "aggregate_xi: histogram " << i
                  << " lacks a similar or dissimilar neighbor; skipped\n";
        continue;
      }
      for (int j : nearest_under_uniform(train, i, similar, k))
        selected.push_back({i, j});
      for (int j : nearest_under_uniform(train, i, dissimilar, k))
        selected.push_back({i, j});
    }
  }

  std::vector<std::pair<int, int>> pairs;  // unordered, i<j, to compute
  pairs.reserve(selected.size());
  for (auto [i, j] : selected)
    pairs.push_back({std::min(i, j), std::max(i, j)});
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<Matrix> tables(pairs.size());
  parallel_for(
      static_cast<int>(pairs.size()),
      [&](int t) {
        auto [i, j] = pairs[t];
        tables[t] = kind == TableKind::kIndependence
                        ? independence_table(train.histogram(i),
                                             train.histogram(j))
                        : typical_table(train.histogram(i), train.histogram(j));
      },
      threads);

  auto table_of = [&](int i, int j) -> Matrix {
    std::pair<int, int> key{std::min(i, j), std::max(i, j)};
    auto it = std::lower_bound(pairs.begin(), pairs.end(), key);
    const Matrix& t = tables[it - pairs.begin()];
    return i < j ? t : t.transpose();
  };

  Matrix xi = Matrix::Zero(d, d);
  double factor = k == kAllNeighbors ? 2.0 : 1.0;
  for (auto [i, j] : selected) xi += factor * w(i, j) * table_of(i, j);
  return xi;
}

}  // namespace gml
