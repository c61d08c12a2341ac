#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dstorm/consensus.hpp"
#include "dstorm/decentralized.hpp"
#include "dstorm/harness/config.hpp"
#include "dstorm/oracle.hpp"
#include "dstorm/topology.hpp"

namespace dstorm::harness {

/// Quadratic and logistic problems. "constants" configs have no oracles and
/// raise ConfigError here.
Problem build_problem(const ProblemConfig& config);

/// Constants for planning; works for every problem type.
ProblemConstants problem_constants(const ProblemConfig& config, const Problem* built);

GraphSchedule build_schedule(const GraphConfig& config, int n);

/// Chebyshev on static schedules unless the config says otherwise.
ConsensusMethod consensus_method(const AlgorithmConfig& config, const GraphSchedule& schedule);

struct PreparedExperiment {
  ExperimentConfig config;
  std::shared_ptr<const Problem> problem;  // null for constants-only configs
  GraphSchedule schedule;
  ContractionCertificate certificate;
  ConsensusMethod method;
  RunPlan plan;  // overrides and comm_budget applied
};

/// Builds the problem (unless supplied), the schedule and the plan. R_est
/// falls back to ||x0 - x*|| when x* is known.
PreparedExperiment prepare(const ExperimentConfig& config, std::shared_ptr<const Problem> problem = nullptr);

struct ExperimentResult {
  ExperimentConfig config;
  RunPlan plan;
  RunRecord record;
};

/// Runs dsagd with the plan, or dsgd with batch plan.r for plan.N_comm
/// iterations (N or comm_budget override the iteration count).
ExperimentResult run_prepared(const PreparedExperiment& prepared, bool wallclock = true);
ExperimentResult run_experiment(const ExperimentConfig& config, bool wallclock = true);

/// Cartesian product of the sweep lists; each entry gets its own csv_path
/// with the swept values appended to the stem. Order: T, r, epsilon, seed.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& config);

/// Runs every entry with at most `jobs` concurrent workers. Problems are
/// built once per distinct problem config and shared read-only. Results
/// keep the expansion order.
std::vector<ExperimentResult> run_sweep(const ExperimentConfig& config, int jobs, bool wallclock = true);

}  // namespace dstorm::harness
