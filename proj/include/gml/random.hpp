#pragma once

#include "gml/histogram.hpp"

#include <cstdint>
#include <random>

namespace gml {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw, so the
/// stream does not depend on the standard library's distribution internals.
double uniform_double(Rng& rng);

/// Uniform integer in [0, n).
int uniform_int(Rng& rng, int n);

/// Standard exponential variate.
double exponential(Rng& rng);

/// In-place Fisher-Yates shuffle with a reproducible draw sequence.
template <typename T>
void shuffle(Rng& rng, std::vector<T>& items) {
  for (int i = static_cast<int>(items.size()) - 1; i > 0; --i)
    std::swap(items[i], items[static_cast<size_t>(uniform_int(rng, i + 1))]);
}

/// Uniform sample from the simplex (flat Dirichlet).
Histogram random_histogram(Rng& rng, int d);

/// Simplex sample with every entry at least `floor` (floor * d < 1).
Histogram random_histogram_floor(Rng& rng, int d, double floor);

}  // namespace gml
