#pragma once

#include <exception>
#include <mutex>

#include "wbhp/parallel.hpp"

namespace wbhp::detail {

// Runs fn(i) for i in [0, n). Exceptions are caught per item and the one with
// the lowest index is rethrown afterwards, so both modes fail identically.
template <class Fn>
void parallel_for(int n, Exec exec, Fn&& fn) {
  std::exception_ptr first;
  int first_index = n;
  std::mutex mu;
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel && n > 1)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (i < first_index) {
        first_index = i;
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace wbhp::detail
