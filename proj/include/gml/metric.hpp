#pragma once

#include "gml/histogram.hpp"

#include <string>
#include <utility>
#include <vector>

namespace gml {

constexpr double kMetricTol = 1e-7;

/// Fixed enumeration of the strict upper triangle of a d x d matrix as a
/// vector of size d(d-1)/2, row-major: (0,1),(0,2),...,(0,d-1),(1,2),...
class TriIndex {
 public:
  explicit TriIndex(int d);

  int dim() const { return d_; }
  int size() const { return static_cast<int>(pairs_.size()); }

  /// Index of the unordered pair {i,j}, i != j.
  int operator()(int i, int j) const {
    if (i > j) std::swap(i, j);
    return offset_[i] + (j - i - 1);
  }
  std::pair<int, int> pair(int k) const { return pairs_[k]; }

  /// Strict upper triangle of A, in enumeration order.
  Vector vectorize(const Matrix& A) const;
  /// A_ij + A_ji per pair: the gradient of m -> <A, M(m)> over symmetric
  /// zero-diagonal M parameterized by its upper triangle m.
  Vector fold(const Matrix& A) const;
  /// Symmetric zero-diagonal matrix with upper triangle v.
  Matrix symmetrize(const Vector& v) const;

 private:
  int d_;
  std::vector<int> offset_;
  std::vector<std::pair<int, int>> pairs_;
};

/// Symmetric, zero-diagonal, nonnegative matrix satisfying all triangle
/// inequalities within tolerance.
class MetricMatrix {
 public:
  /// Validating constructor; throws std::invalid_argument on violation.
  explicit MetricMatrix(Matrix m, double tol = kMetricTol);

  /// Wraps a matrix known to satisfy the invariants (projection outputs).
  static MetricMatrix trusted(Matrix m);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }

 private:
  struct Trusted {};
  MetricMatrix(Matrix m, Trusted) : m_(std::move(m)) {}
  Matrix m_;
};

struct MetricViolation {
  enum class Kind { NonFinite, Diagonal, Symmetry, Negativity, Triangle };
  Kind kind;
  int i = -1, j = -1, k = -1;  // k only set for triangle violations
  double magnitude = 0.0;
  std::string describe() const;
};

struct MetricCheck {
  bool ok = true;
  std::vector<MetricViolation> violations;
  explicit operator bool() const { return ok; }
};

/// Zero diagonal, ones everywhere else; the ground metric of the l1 distance.
MetricMatrix uniform_metric(int d);

/// Checks all four constraint families on a square matrix.
MetricCheck is_metric(const Matrix& H, double tol = kMetricTol);

/// Frobenius projection of H onto the cone of metric matrices, computed by
/// cyclic Dykstra sweeps over the triangle and nonnegativity halfspaces.
/// H may be non-symmetric, signed, or have a nonzero diagonal; it is
/// symmetrized and diagonal-zeroed first, which leaves the projection
/// unchanged. Throws std::runtime_error if max_sweeps is exhausted before
/// the residual falls below tol. max_sweeps <= 0 selects the default 10*d^3.
MetricMatrix triangle_fix(const Matrix& H, double tol = kMetricTol,
                          long max_sweeps = 0);

/// Cone projection followed by radial rescaling into the Frobenius unit ball.
MetricMatrix project_feasible(const Matrix& H, double tol = kMetricTol);

/// argmin over the cone of || M + (lambda/2) Xi ||_2^2.
MetricMatrix solve_P3(const Matrix& xi, double lambda, double tol = kMetricTol);

}  // namespace gml
