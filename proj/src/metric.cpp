#include "gml/metric.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gml {

TriIndex::TriIndex(int d) : d_(d) {
  if (d < 2) throw std::invalid_argument("TriIndex: dimension must be >= 2");
  offset_.resize(d);
  pairs_.reserve(static_cast<size_t>(d) * (d - 1) / 2);
  int k = 0;
  for (int i = 0; i < d; ++i) {
    offset_[i] = k;
    for (int j = i + 1; j < d; ++j, ++k) pairs_.emplace_back(i, j);
  }
}

Vector TriIndex::vectorize(const Matrix& A) const {
  Vector v(size());
  for (int k = 0; k < size(); ++k) v[k] = A(pairs_[k].first, pairs_[k].second);
  return v;
}

Vector TriIndex::fold(const Matrix& A) const {
  Vector v(size());
  for (int k = 0; k < size(); ++k) {
    auto [i, j] = pairs_[k];
    v[k] = A(i, j) + A(j, i);
  }
  return v;
}

Matrix TriIndex::symmetrize(const Vector& v) const {
  Matrix m = Matrix::Zero(d_, d_);
  for (int k = 0; k < size(); ++k) {
    auto [i, j] = pairs_[k];
    m(i, j) = m(j, i) = v[k];
  }
  return m;
}

std::string MetricViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::NonFinite:
      os << "non-finite entry at (" << i << "," << j << ")";
      break;
    case Kind::Diagonal:
      os << "nonzero diagonal at (" << i << "," << i << "): " << magnitude;
      break;
    case Kind::Symmetry:
      os << "asymmetry at (" << i << "," << j << "): " << magnitude;
      break;
    case Kind::Negativity:
      os << "negative entry at (" << i << "," << j << "): " << -magnitude;
      break;
    case Kind::Triangle:
      os << "triangle violation m(" << i << "," << j << ") > m(" << i << ","
         << k << ") + m(" << k << "," << j << ") by " << magnitude;
      break;
  }
  return os.str();
}

MetricCheck is_metric(const Matrix& H, double tol) {
  MetricCheck res;
  auto add = [&](MetricViolation v) {
    res.ok = false;
    res.violations.push_back(std::move(v));
  };
  const int d = static_cast<int>(H.rows());
  if (H.cols() != d || d < 1) {
    add({MetricViolation::Kind::NonFinite, -1, -1, -1, 0.0});
    return res;
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (!std::isfinite(H(i, j)))
        add({MetricViolation::Kind::NonFinite, i, j, -1, 0.0});
  if (!res.ok) return res;

  for (int i = 0; i < d; ++i)
    if (std::abs(H(i, i)) > tol)
      add({MetricViolation::Kind::Diagonal, i, i, -1, std::abs(H(i, i))});
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      double gap = std::abs(H(i, j) - H(j, i));
      if (gap > tol) add({MetricViolation::Kind::Symmetry, i, j, -1, gap});
    }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (H(i, j) < -tol)
        add({MetricViolation::Kind::Negativity, i, j, -1, -H(i, j)});
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      for (int k = 0; k < d; ++k) {
        if (k == i || k == j) continue;
        double excess = H(i, j) - H(i, k) - H(k, j);
        if (excess > tol)
          add({MetricViolation::Kind::Triangle, i, j, k, excess});
      }
    }
  return res;
}

MetricMatrix::MetricMatrix(Matrix m, double tol) : m_(std::move(m)) {
  MetricCheck chk = is_metric(m_, tol);
  if (!chk.ok) {
    std::ostringstream os;
    os << "not a metric matrix: " << chk.violations.front().describe();
    if (chk.violations.size() > 1)
      os << " (and " << chk.violations.size() - 1 << " more)";
    throw std::invalid_argument(os.str());
  }
}

MetricMatrix MetricMatrix::trusted(Matrix m) {
  return MetricMatrix(std::move(m), Trusted{});
}

MetricMatrix uniform_metric(int d) {
  if (d < 2) throw std::invalid_argument("uniform_metric: d must be >= 2");
  Matrix m = Matrix::Ones(d, d);
  m.diagonal().setZero();
  return MetricMatrix::trusted(std::move(m));
}

namespace {

// One halfspace a'x <= 0 touching at most three upper-triangle coordinates.
// Triangle constraints have a = e_lhs - e_r1 - e_r2 (norm^2 = 3);
// nonnegativity has a = -e_lhs (norm^2 = 1, r1 = r2 = -1).
struct Halfspace {
  int lhs, r1, r2;
  double norm2;
};

}  // namespace

MetricMatrix triangle_fix(const Matrix& H, double tol, long max_sweeps) {
  const int d = static_cast<int>(H.rows());
  if (H.cols() != d || d < 2)
    throw std::invalid_argument("triangle_fix: input must be square, d >= 2");
  if (!H.allFinite())
    throw std::invalid_argument("triangle_fix: input has non-finite entries");
  if (max_sweeps <= 0) max_sweeps = 10L * d * d * d;

  TriIndex tri(d);
  const int n = tri.size();
  // Symmetrizing and zeroing the diagonal first does not move the argmin:
  // the cone lives in that subspace and projection onto it factors through.
  Vector x = 0.5 * tri.fold(H);

  std::vector<Halfspace> cons;
  cons.reserve(static_cast<size_t>(d) * (d - 1) * (d - 2) / 2 + n);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        int ij = tri(i, j), ik = tri(i, k), jk = tri(j, k);
        cons.push_back({ij, ik, jk, 3.0});
        cons.push_back({ik, ij, jk, 3.0});
        cons.push_back({jk, ij, ik, 3.0});
      }
  for (int p = 0; p < n; ++p) cons.push_back({p, -1, -1, 1.0});

  std::vector<double> alpha(cons.size(), 0.0);
  // Converge two orders below the advertised tolerance, so downstream
  // rescaling (unit-sphere normalization and the like) cannot push a
  // residual violation back above tol.
  const double target = 0.01 * tol;
  double residual = 0.0;
  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_move = 0.0;
    for (size_t c = 0; c < cons.size(); ++c) {
      const Halfspace& hs = cons[c];
      if (hs.norm2 == 3.0) {
        // y = x + alpha * a, materialized on the three touched coordinates
        double y0 = x[hs.lhs] + alpha[c];
        double y1 = x[hs.r1] - alpha[c];
        double y2 = x[hs.r2] - alpha[c];
        double v = y0 - y1 - y2;
        if (v > 0.0) {
          double s = v / 3.0;
          x[hs.lhs] = y0 - s;
          x[hs.r1] = y1 + s;
          x[hs.r2] = y2 + s;
          max_move = std::max(max_move, std::abs(alpha[c] - s));
          alpha[c] = s;
        } else {
          x[hs.lhs] = y0;
          x[hs.r1] = y1;
          x[hs.r2] = y2;
          max_move = std::max(max_move, alpha[c]);
          alpha[c] = 0.0;
        }
      } else {
        double old = x[hs.lhs];
        double y = old - alpha[c];
        if (y < 0.0) {
          x[hs.lhs] = 0.0;
          max_move = std::max(max_move, std::abs(old));
          alpha[c] = -y;
        } else {
          x[hs.lhs] = y;
          max_move = std::max(max_move, alpha[c]);
          alpha[c] = 0.0;
        }
      }
    }
    residual = 0.0;
    for (const Halfspace& hs : cons) {
      double viol = hs.norm2 == 3.0 ? x[hs.lhs] - x[hs.r1] - x[hs.r2]
                                    : -x[hs.lhs];
      residual = std::max(residual, viol);
    }
    if (max_move < target && residual < target) {
      for (int p = 0; p < n; ++p)
        if (x[p] < 0.0) x[p] = 0.0;
      return MetricMatrix::trusted(tri.symmetrize(x));
    }
  }
  std::ostringstream os;
  os << "triangle_fix: no convergence after " << max_sweeps
     << " sweeps (residual " << residual << ", target " << target << ")";
  throw std::runtime_error(os.str());
}

MetricMatrix project_feasible(const Matrix& H, double tol) {
  MetricMatrix m = triangle_fix(H, tol);
  double f = m.matrix().norm();
  if (f > 1.0) return MetricMatrix::trusted(m.matrix() / f);
  return m;
}

MetricMatrix solve_P3(const Matrix& xi, double lambda, double tol) {
  if (lambda < 0)
    throw std::invalid_argument("solve_P3: lambda must be nonnegative");
  return triangle_fix(Matrix(-0.5 * lambda * xi), tol);
}

}  // namespace gml
