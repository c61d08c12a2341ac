#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dstorm/consensus.hpp"
#include "dstorm/oracle.hpp"

namespace dstorm::harness {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ProblemConfig {
  std::string type = "quadratic";  // quadratic | logistic | constants
  int n = 20;
  // quadratic
  int d = 10;
  double kappa = 100.0;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  int extra_rows = 2;
  double scale_spread = 1.0;
  double heterogeneity = 1.0;
  // logistic
  std::string data_path;  // empty: synthetic one-hot data
  int synthetic_rows = 5000;
  int synthetic_dim = 123;
  int synthetic_groups = 14;
  std::optional<int> max_rows;
  double theta = 1e-2;
  std::uint64_t partition_seed = 0;
  // constants (plan only)
  std::optional<ProblemConstants> constants;

  std::optional<std::vector<double>> x0;
};

struct GraphConfig {
  std::string type = "static-geometric";  // static-geometric | tau-connected | complete | path | edge-list
  std::optional<int> n;                   // defaults to the problem's n
  double radius = 0.5;
  int tau = 3;
  std::uint64_t seed = 1;
  std::string path;  // edge-list
};

struct AlgorithmConfig {
  std::string name = "dsagd";  // dsagd | dsgd
  double epsilon = 1e-2;
  std::optional<int> r;
  std::optional<long> T;
  std::optional<long> N;
  std::optional<long> comm_budget;  // sets N = comm_budget / T (dsgd: iterations)
  std::optional<double> R_est;
  std::uint64_t seed = 0;
  std::optional<ConsensusMethod> consensus;  // default: chebyshev on static graphs
  int record_every = 1;
};

struct OutputConfig {
  std::string csv_path;
  std::string plot_path;
};

/// Inline override lists, expanded as a cartesian product.
struct SweepConfig {
  std::vector<long> T;
  std::vector<int> r;
  std::vector<std::uint64_t> seed;
  std::vector<double> epsilon;

  bool empty() const { return T.empty() && r.empty() && seed.empty() && epsilon.empty(); }
};

struct ExperimentConfig {
  ProblemConfig problem;
  GraphConfig graph;
  AlgorithmConfig algorithm;
  OutputConfig output;
  SweepConfig sweep;
};

/// Unknown keys, wrong types and out-of-range values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
std::string to_json(const ExperimentConfig& config);

/// Relative paths resolve against DSTORM_DATA_DIR when it is set.
std::string resolve_data_path(const std::string& path);

std::string to_string(ConsensusMethod method);

}  // namespace dstorm::harness
