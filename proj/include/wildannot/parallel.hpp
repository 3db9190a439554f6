#pragma once

#include <exception>
#include <mutex>

namespace wildannot {

// Worker count used by the OpenMP kernels. 0 restores the runtime default.
void set_num_jobs(int jobs);
int num_jobs();

// Exceptions must not escape an OpenMP region; loop bodies run through
// ExceptionSink::run and the first captured exception is rethrown after the
// region closes.
class ExceptionSink {
 public:
  template <class Fn>
  void run(Fn&& fn) noexcept {
    try {
      fn();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex_);
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

}  // namespace wildannot
