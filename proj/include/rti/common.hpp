#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace rti {

// Error classes shared by every module. The C API maps them 1:1 onto status
// codes and the CLI onto exit codes.
enum class ErrorCode {
  InvalidArgument = 1,
  DegenerateGeometry,
  InvalidRegion,
  Infeasible,
  IllConditioned,
  Io,
  Parse,
  UndefinedMean,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

// Worker count: hardware concurrency capped by RTI_STUDIO_THREADS when set.
std::size_t worker_count();

// Runs body(i) for i in [0, n). Every index is independent; results written by
// index are identical to a serial loop regardless of the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Thread CPU time in seconds (falls back to wall time where unavailable).
double thread_cpu_seconds();

}  // namespace rti
