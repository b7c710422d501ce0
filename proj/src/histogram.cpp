#include "gml/histogram.hpp"

#include <cmath>
#include <string>

namespace gml {

namespace {

void validate(const Vector& v) {
  if (v.size() < 2) {
    throw std::invalid_argument("histogram needs at least 2 bins, got " +
                                std::to_string(v.size()));
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0) {
      throw std::invalid_argument("histogram entry " + std::to_string(i) +
                                  " is negative or not finite");
    }
    sum += v[i];
  }
  if (std::abs(sum - 1.0) > Histogram::kSumTol) {
    throw std::invalid_argument("histogram mass is " + std::to_string(sum) +
                                ", expected 1");
  }
}

}  // namespace

Histogram::Histogram(Vector values) : values_(std::move(values)) {
  validate(values_);
}

Histogram::Histogram(const std::vector<double>& values)
    : Histogram(Eigen::Map<const Vector>(values.data(),
                                         static_cast<Eigen::Index>(values.size()))) {}

Histogram Histogram::normalized(Vector values) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      throw std::invalid_argument("cannot normalize: entry " + std::to_string(i) +
                                  " is negative or not finite");
    }
    sum += values[i];
  }
  if (sum <= 0.0) {
    throw std::invalid_argument("cannot normalize: total mass is not positive");
  }
  values /= sum;
  return Histogram(std::move(values));
}

void require_same_dim(const Histogram& r, const Histogram& c) {
  if (r.dim() != c.dim()) {
    throw std::invalid_argument("histogram dimensions differ: " +
                                std::to_string(r.dim()) + " vs " +
                                std::to_string(c.dim()));
  }
}

}  // namespace gml
