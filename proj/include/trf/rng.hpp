// Counter-based random numbers (Philox4x32-10). Every variate is a pure
// function of (seed, stream, draw, index), so parallel generation gives the
// same numbers regardless of scheduling.
#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace trf::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

Counter philox4x32_10(Counter ctr, Key key);

// Maps 64 random bits to a double in the open interval (0, 1).
double to_open_unit(std::uint32_t hi, std::uint32_t lo);

// Stream identifiers used by the library; fixed so that artifacts stay reproducible.
enum StreamId : std::uint32_t {
  kStreamExact = 1,
  kStreamSpectral = 2,
  kStreamMovingAverage = 3,
  kStreamStable = 4,
  kStreamUser = 16,
};

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint32_t stream, std::uint32_t draw);

  // Two uniforms per Philox block: block b holds indices 2b and 2b + 1.
  double uniform(std::uint64_t index) const;
  std::pair<double, double> uniform_pair(std::uint64_t block) const;
  // Box-Muller pair from uniform_pair(block).
  std::pair<double, double> normal_pair(std::uint64_t block) const;
  double normal(std::uint64_t index) const;

 private:
  Counter counter(std::uint64_t block) const;
  Key key_;
  std::uint32_t stream_;
  std::uint32_t draw_;
};

}  // namespace trf::rng
