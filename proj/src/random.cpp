#include "gml/random.hpp"

#include <cmath>
#include <stdexcept>

namespace gml {

double uniform_double(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_int(Rng& rng, int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

double exponential(Rng& rng) { return -std::log1p(-uniform_double(rng)); }

Histogram random_histogram(Rng& rng, int d) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = exponential(rng);
  return Histogram::normalized(std::move(v));
}

Histogram random_histogram_floor(Rng& rng, int d, double floor) {
  if (floor < 0 || floor * d >= 1.0)
    throw std::invalid_argument("random_histogram_floor: need 0 <= floor*d < 1");
  Vector v = random_histogram(rng, d).values() * (1.0 - floor * d);
  v.array() += floor;
  return Histogram::normalized(std::move(v));
}

}  // namespace gml
