#pragma once

#include <exception>
#include <mutex>

#include <omp.h>

namespace magnus::detail {

inline int worker_count(int requested) { return requested > 0 ? requested : omp_get_max_threads(); }

// Exceptions must not leave an OpenMP region; the first one is parked here
// and rethrown by the caller after the region ends.
class ErrorSlot {
 public:
  template <class Fn>
  void run(Fn&& fn) noexcept {
    try {
      fn();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

}  // namespace magnus::detail
