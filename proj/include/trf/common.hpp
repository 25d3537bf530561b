// Shared types and the error model of the core library.
#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace trf {

using cdouble = std::complex<double>;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

enum class ErrorCode {
  InvalidArgument,
  Schema,
  Existence,
  Tolerance,
  Io,
  Domain,          // argument outside the domain of a special function
  Singular,        // kernel evaluated at an integrable singularity
  NotConverged,    // series or quadrature failed to reach tolerance
  EigenSolver,
  Unsupported,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

constexpr double kPi = 3.14159265358979323846264338327950288;

// Process-wide worker count used by the parallel loops. Results never depend on it.
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, n) on thread_count() workers with static chunking.
template <class F>
void parallel_for(std::size_t n, F&& body);

}  // namespace trf

#include "trf/detail/parallel.hpp"
