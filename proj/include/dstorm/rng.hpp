#pragma once

#include <cstdint>

namespace dstorm {

/// Counter-based random stream keyed by (master_seed, node_id).
///
/// Each draw hashes the key together with a monotone counter, so a stream is
/// fully described by its three fields: replaying from the same counter
/// reproduces identical draws, and two nodes never share state. Gaussian
/// draws use Box-Muller on two uniforms so results do not depend on the
/// standard library's distribution implementations.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t master_seed, std::uint64_t node_id, std::uint64_t counter = 0);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in (0, 1]; safe as a log argument.
  double uniform_pos();
  double normal();
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t node_id() const { return node_id_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t master_seed_ = 0;
  std::uint64_t node_id_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace dstorm
