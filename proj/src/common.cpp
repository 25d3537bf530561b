#include "trf/common.hpp"

#include <algorithm>
#include <atomic>

namespace trf {

namespace {
std::atomic<int> g_threads{1};
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Existence: return "existence";
    case ErrorCode::Tolerance: return "tolerance";
    case ErrorCode::Io: return "io";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Singular: return "singular";
    case ErrorCode::NotConverged: return "not_converged";
    case ErrorCode::EigenSolver: return "eigen_solver";
    case ErrorCode::Unsupported: return "unsupported";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

void set_thread_count(int n) { g_threads.store(std::max(1, n)); }

int thread_count() { return g_threads.load(); }

}  // namespace trf
