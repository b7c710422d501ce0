#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace gml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A point of the probability simplex: d nonnegative bin masses summing to one.
class Histogram {
 public:
  static constexpr double kSumTol = 1e-9;

  explicit Histogram(Vector values);
  explicit Histogram(const std::vector<double>& values);

  /// Rescales a nonnegative vector with positive total mass to sum one.
  static Histogram normalized(Vector values);

  int dim() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  const Vector& values() const { return values_; }

  bool operator==(const Histogram& other) const { return values_ == other.values_; }

 private:
  Vector values_;
};

/// Throws std::invalid_argument unless r and c share the same dimension.
void require_same_dim(const Histogram& r, const Histogram& c);

}  // namespace gml
