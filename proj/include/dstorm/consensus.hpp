#pragma once

#include <cstdint>

#include "dstorm/linalg.hpp"
#include "dstorm/topology.hpp"

namespace dstorm {

struct ConsensusReport {
  Stack x;
  long rounds_used = 0;
  double pre_err = 0.0;   // squared distance to the row-mean stack
  double post_err = 0.0;
};

/// One communication round: returns W x. Throws on a dimension mismatch.
Stack mix_round(const Stack& x, const MixingMatrix& w);

/// Plain gossip with W^{start_slot}, ..., W^{start_slot + rounds - 1}.
ConsensusReport run_consensus(const Stack& x, const GraphSchedule& schedule, std::uint64_t start_slot,
                              long rounds);

/// Bounds of the spectrum of W on the complement of the all-ones vector.
struct SpectralInterval {
  double lower = 0.0;
  double upper = 0.0;

  /// Symmetric interval [-rho, rho].
  static SpectralInterval symmetric(double rho) { return {-rho, rho}; }
};

SpectralInterval spectral_interval(const MixingMatrix& w);

/// Chebyshev-accelerated consensus P_T(W) x with P_T the degree-T Chebyshev
/// polynomial mapped onto the interval and normalised so that P_T(1) = 1.
/// Evaluated with the three-term recurrence on stack products; P_T(W) is
/// never formed. The interval must satisfy -1 <= lower <= upper < 1.
ConsensusReport chebyshev_consensus(const Stack& x, const MixingMatrix& w, SpectralInterval interval,
                                    long rounds);

/// Same with the interval [-rho, rho]; rho >= 1 is rejected.
ConsensusReport chebyshev_consensus(const Stack& x, const MixingMatrix& w, double rho, long rounds);

/// Worst-case contraction max_{z in interval} |P_T(z)| = 1 / T_T(s).
double chebyshev_contraction_bound(SpectralInterval interval, long rounds);

enum class ConsensusMethod { Gossip, Chebyshev };

/// Owns the global communication-slot counter. Every round consumed by any
/// consensus call advances it, so slots carry over between outer iterations.
class Communicator {
 public:
  /// Chebyshev requires a static schedule.
  Communicator(GraphSchedule schedule, ConsensusMethod method);

  ConsensusReport consensus(const Stack& v, long rounds);
  /// Single gossip round with the current slot's matrix.
  Stack mix(const Stack& x);

  std::uint64_t slot() const { return slot_; }
  const GraphSchedule& schedule() const { return schedule_; }
  ConsensusMethod method() const { return method_; }
  const SpectralInterval& interval() const { return interval_; }

 private:
  GraphSchedule schedule_;
  ConsensusMethod method_;
  SpectralInterval interval_;
  std::uint64_t slot_ = 0;
};

}  // namespace dstorm
