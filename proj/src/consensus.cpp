#include "dstorm/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dstorm {

Stack mix_round(const Stack& x, const MixingMatrix& w) {
  if (w.weights.cols() != x.rows()) {
    throw std::invalid_argument("mix_round: mixing matrix is " + std::to_string(w.weights.rows()) + "x" +
                                std::to_string(w.weights.cols()) + " but stack has " +
                                std::to_string(x.rows()) + " rows");
  }
  Stack out(x.rows(), x.cols());
  out.noalias() = w.weights * x;
  return out;
}

ConsensusReport run_consensus(const Stack& x, const GraphSchedule& schedule, std::uint64_t start_slot,
                              long rounds) {
  if (rounds < 0) throw std::invalid_argument("run_consensus: negative round count");
  ConsensusReport rep;
  rep.pre_err = consensus_distance_sq(x);
  rep.x = x;
  for (long t = 0; t < rounds; ++t) {
    rep.x = mix_round(rep.x, *schedule.mixing(start_slot + static_cast<std::uint64_t>(t)));
  }
  rep.rounds_used = rounds;
  rep.post_err = consensus_distance_sq(rep.x);
  return rep;
}

SpectralInterval spectral_interval(const MixingMatrix& w) {
  const auto ev = deflated_eigenvalues(w.weights);
  if (ev.empty()) return {0.0, 0.0};
  return {ev.front(), ev.back()};
}

namespace {

void check_interval(const SpectralInterval& iv) {
  if (!(iv.lower >= -1.0) || !(iv.upper < 1.0) || iv.lower > iv.upper) {
    throw std::invalid_argument("chebyshev_consensus: spectral interval [" + std::to_string(iv.lower) + ", " +
                                std::to_string(iv.upper) + "] must satisfy -1 <= lower <= upper < 1");
  }
}

}  // namespace

ConsensusReport chebyshev_consensus(const Stack& x, const MixingMatrix& w, SpectralInterval iv, long rounds) {
  check_interval(iv);
  if (rounds < 0) throw std::invalid_argument("chebyshev_consensus: negative round count");
  ConsensusReport rep;
  rep.pre_err = consensus_distance_sq(x);
  rep.rounds_used = rounds;
  if (rounds == 0) {
    rep.x = x;
    rep.post_err = rep.pre_err;
    return rep;
  }
  // z -> (z - center) / half maps the interval onto [-1, 1]; the normalised
  // iterates Y_k = T_k(M) x / T_k(s) obey
  //   Y_{k+1} = omega_{k+1} (W - c I) Y_k / (1 - c) + (1 - omega_{k+1}) Y_{k-1},
  //   omega_{k+1} = 1 / (1 - omega_k / (4 s^2)),  omega_1 = 2.
  const double center = 0.5 * (iv.lower + iv.upper);
  const double half = 0.5 * (iv.upper - iv.lower);
  const double scale = 1.0 - center;
  const double q = (half * half) / (4.0 * scale * scale);

  auto shifted = [&](const Stack& y) -> Stack {
    Stack wy = mix_round(y, w);
    return (wy - center * y) / scale;
  };

  Stack prev = x;
  Stack cur = shifted(x);
  double omega = 2.0;
  for (long k = 1; k < rounds; ++k) {
    omega = 1.0 / (1.0 - q * omega);
    Stack next = omega * shifted(cur) + (1.0 - omega) * prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  rep.x = std::move(cur);
  rep.post_err = consensus_distance_sq(rep.x);
  return rep;
}

ConsensusReport chebyshev_consensus(const Stack& x, const MixingMatrix& w, double rho, long rounds) {
  if (!(rho >= 0.0) || rho >= 1.0) throw std::invalid_argument("chebyshev_consensus: rho must lie in [0, 1)");
  return chebyshev_consensus(x, w, SpectralInterval::symmetric(rho), rounds);
}

double chebyshev_contraction_bound(SpectralInterval iv, long rounds) {
  check_interval(iv);
  if (rounds == 0) return 1.0;
  const double half = 0.5 * (iv.upper - iv.lower);
  if (half == 0.0) return 0.0;
  const double s = (1.0 - 0.5 * (iv.lower + iv.upper)) / half;
  return 1.0 / std::cosh(static_cast<double>(rounds) * std::acosh(s));
}

Communicator::Communicator(GraphSchedule schedule, ConsensusMethod method)
    : schedule_(std::move(schedule)), method_(method) {
  if (method_ == ConsensusMethod::Chebyshev) {
    if (schedule_.kind() != ScheduleKind::Static) {
      throw std::invalid_argument("Chebyshev consensus requires a static schedule");
    }
    interval_ = spectral_interval(*schedule_.mixing(0));
    if (!(interval_.upper < 1.0)) {
      throw NonContractingError("Chebyshev consensus: graph is disconnected (second eigenvalue is 1)");
    }
  }
}

ConsensusReport Communicator::consensus(const Stack& v, long rounds) {
  ConsensusReport rep = method_ == ConsensusMethod::Chebyshev
                            ? chebyshev_consensus(v, *schedule_.mixing(slot_), interval_, rounds)
                            : run_consensus(v, schedule_, slot_, rounds);
  slot_ += static_cast<std::uint64_t>(rounds);
  return rep;
}

Stack Communicator::mix(const Stack& x) {
  Stack out = mix_round(x, *schedule_.mixing(slot_));
  ++slot_;
  return out;
}

}  // namespace dstorm
