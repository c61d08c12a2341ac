#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dstorm/agd.hpp"
#include "dstorm/consensus.hpp"
#include "dstorm/linalg.hpp"
#include "dstorm/oracle.hpp"
#include "dstorm/rng.hpp"
#include "dstorm/topology.hpp"

namespace dstorm {

struct RunPlan {
  double epsilon = 0.0;
  double delta_prime = 0.0;
  double delta = 0.0;
  int r = 1;
  long T = 1;
  long N = 1;
  double D = 0.0;
  double R_est = 0.0;
  long N_orcl = 0;  // N * r
  long N_comm = 0;  // N * T
  bool accelerated_consensus = false;  // T sized for Chebyshev on a static graph
};

/// Raised when the planner inputs cannot produce a valid plan.
class PlanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameter choice for a target accuracy epsilon. Static certificates get
/// T = ceil(sqrt(chi) ln(D/delta')) when method is Chebyshev; otherwise
/// T = ceil(tau/(2 lambda) ln(D/delta')).
RunPlan plan_run(double epsilon, const ProblemConstants& c, const ContractionCertificate& cert, double R_est,
                 ConsensusMethod method = ConsensusMethod::Chebyshev);

/// Replaces r, T or N and recomputes the totals. N = 0 is allowed here and
/// yields a run that records only the initial state.
RunPlan with_overrides(RunPlan plan, std::optional<int> r, std::optional<long> T, std::optional<long> N);

struct DecState {
  int k = 0;
  Stack X, U;
  std::uint64_t slot = 0;
};

/// Squared distances to consensus around one outer iteration.
struct StepStats {
  double y_sq = 0.0;
  double v_sq = 0.0;
  double u_sq = 0.0;
  double x_sq = 0.0;
};

/// Decentralized stochastic AGD. Coefficients follow the recurrence with
/// constants 2 L_g and mu_g / 2; node i draws from RngStream(seed, i).
class DecentralizedAgd {
 public:
  DecentralizedAgd(const Problem& problem, int batch, long consensus_rounds, Communicator communicator,
                   std::uint64_t seed);

  StepStats step();

  const DecState& state() const { return state_; }
  const CoefficientSchedule& coefficients() const { return coeffs_; }
  const Communicator& communicator() const { return comm_; }
  Vector mean_iterate() const { return row_mean(state_.X); }

 private:
  const Problem& problem_;
  int batch_;
  long rounds_;
  Communicator comm_;
  CoefficientSchedule coeffs_;
  std::vector<RngStream> streams_;
  DecState state_;
};

struct MetricRow {
  long round = 0;
  long comm_total = 0;
  long oracle_calls_per_node = 0;
  std::optional<double> f_gap;
  double consensus_sq = 0.0;    // ||X - mean(X)||^2
  double u_consensus_sq = 0.0;  // ||U - mean(U)||^2, not part of the CSV
  double wallclock_ms = 0.0;

  /// Equality ignoring wall-clock time.
  bool same_values(const MetricRow& o) const;
};

struct RunRecord {
  std::string algorithm;
  std::vector<MetricRow> rows;
  Vector x_mean;  // final row-mean iterate

  /// Row-wise same_values over all rows plus the final iterate.
  bool same_values(const RunRecord& o) const;
};

/// Carries the rows recorded before the failure.
class RunError : public std::runtime_error {
 public:
  RunError(const std::string& what, RunRecord partial) : std::runtime_error(what), partial_(std::move(partial)) {}
  const RunRecord& partial() const { return partial_; }

 private:
  RunRecord partial_;
};

struct RunOptions {
  int record_every = 1;         // the final iteration is always recorded
  bool wallclock = true;        // false leaves wallclock_ms at 0
  std::optional<double> stop_gap;  // stop after the first row with f_gap <= stop_gap
};

RunRecord run(const RunPlan& plan, const Problem& problem, Communicator communicator, std::uint64_t seed,
              const RunOptions& options = {});

/// eta_k = min(1/L_l, 2/(mu_g (k + k0))) with k0 = 2 L_l / mu_g.
double dsgd_step_size(long k, const ProblemConstants& c);

/// X' = W (X - eta grad^r F(X)).
Stack dsgd_step(const Stack& x, const MixingMatrix& w, double eta, std::span<const OraclePtr> oracles, int r,
                std::span<RngStream> streams);

/// Baseline: one gossip round per iteration with the communicator's current slot.
RunRecord run_dsgd(const Problem& problem, int r, long iterations, Communicator communicator, std::uint64_t seed,
                   const RunOptions& options = {});

}  // namespace dstorm
