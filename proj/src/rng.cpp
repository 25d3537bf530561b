#include "trf/rng.hpp"

#include <cmath>

namespace trf::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Counter philox4x32_10(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  // 52 bits so the midpoint rule stays below 1 after rounding.
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

Stream::Stream(std::uint64_t seed, std::uint32_t stream, std::uint32_t draw)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream),
      draw_(draw) {}

Counter Stream::counter(std::uint64_t block) const {
  return {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), draw_, stream_};
}

std::pair<double, double> Stream::uniform_pair(std::uint64_t block) const {
  const Counter r = philox4x32_10(counter(block), key_);
  return {to_open_unit(r[0], r[1]), to_open_unit(r[2], r[3])};
}

double Stream::uniform(std::uint64_t index) const {
  const auto [a, b] = uniform_pair(index / 2);
  return index % 2 == 0 ? a : b;
}

std::pair<double, double> Stream::normal_pair(std::uint64_t block) const {
  const auto [u1, u2] = uniform_pair(block);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * 3.14159265358979323846 * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

double Stream::normal(std::uint64_t index) const {
  const auto [a, b] = normal_pair(index / 2);
  return index % 2 == 0 ? a : b;
}

}  // namespace trf::rng
