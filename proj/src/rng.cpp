#include "dstorm/rng.hpp"

#include <cmath>
#include <numbers>

namespace dstorm {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t node_id, std::uint64_t counter)
    : master_seed_(master_seed),
      node_id_(node_id),
      key_(mix64(mix64(master_seed ^ 0x5DEECE66DULL) + kGolden * (node_id + 1))),
      counter_(counter) {}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t c = counter_++;
  return mix64(key_ + kGolden * (c + 1));
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform_pos() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::below(std::uint64_t bound) {
  // Lemire's multiply-shift; bias is at most bound / 2^64.
  const unsigned __int128 product =
      static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(bound);
  return static_cast<std::uint64_t>(product >> 64);
}

}  // namespace dstorm
