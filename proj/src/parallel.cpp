#include "gml/parallel.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

namespace gml {

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, const std::function<void(int)>& fn, int threads) {
  if (n <= 0) return;
  int workers = std::min(resolve_threads(threads), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  int chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  std::vector<int> error_index(workers, std::numeric_limits<int>::max());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    int lo = w * chunk, hi = std::min(n, lo + chunk);
    pool.emplace_back([&, w, lo, hi] {
      for (int i = lo; i < hi; ++i) {
        try {
          fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
          error_index[w] = i;
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  int first = -1;
  for (int w = 0; w < workers; ++w)
    if (errors[w] && (first < 0 || error_index[w] < error_index[first]))
      first = w;
  if (first >= 0) std::rethrow_exception(errors[first]);
}

}  // namespace gml
