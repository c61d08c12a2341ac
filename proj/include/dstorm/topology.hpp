#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dstorm/linalg.hpp"

namespace dstorm {

/// Simple undirected graph on vertices [0, n). Edges are stored once as
/// (i, j) with i < j, sorted and deduplicated.
class Graph {
 public:
  using Edge = std::pair<int, int>;

  Graph() = default;
  explicit Graph(int n, std::vector<Edge> edges = {});

  int n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<int>& degrees() const { return degrees_; }
  bool has_edge(int i, int j) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> degrees_;
};

bool is_connected(const Graph& g);
/// Union of edge sets; all graphs must share the vertex count.
Graph union_graph(const std::vector<Graph>& graphs);

Graph complete_graph(int n);
Graph path_graph(int n);
Graph star_graph(int n);
Graph erdos_renyi_graph(int n, double p, std::uint64_t seed);

/// n points uniform in the unit square, edge iff distance <= radius. A
/// disconnected draw is resampled with the next sub-seed, up to 100 attempts.
Graph random_geometric_graph(int n, double radius, std::uint64_t seed);

// Edge-list text format: first line `n`, then one `i j` pair per line.
Graph read_edge_list(std::istream& in);
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& g);

struct MixingMatrix {
  Matrix weights;
  Graph graph;
};

/// Metropolis weights: 1/(1+max(d_i, d_j)) on edges, remainder on the diagonal.
MixingMatrix metropolis_weights(const Graph& g);

struct MixingViolation {
  enum class Kind { RowSum, ColumnSum, Negative, Sparsity, Asymmetry };
  Kind kind;
  int i;
  int j;  // -1 for row/column sum violations
  double value;

  std::string describe() const;
};

inline constexpr double kStochasticTol = 1e-12;

/// Empty result means W is a valid decentralized doubly stochastic symmetric
/// matrix for its graph. Throws std::invalid_argument on a dimension mismatch.
std::vector<MixingViolation> validate_mixing(const MixingMatrix& w, double tol = kStochasticTol);

/// Eigenvalues of symmetric W restricted to the complement of the all-ones
/// vector, ascending. Throws std::invalid_argument if W is not symmetric.
std::vector<double> deflated_eigenvalues(const Matrix& w);

/// Second-largest eigenvalue modulus (largest modulus on the deflated subspace).
double second_eigenvalue(const MixingMatrix& w);

enum class ScheduleKind { Static, ConnectedSequence, TauConnected };

std::string to_string(ScheduleKind kind);

/// Deterministic map from communication slot k >= 0 to a graph on a fixed
/// vertex set. Periodic schedules precompute their mixing matrices, so all
/// accessors are const and safe to share across threads.
class GraphSchedule {
 public:
  using Generator = std::function<Graph(std::uint64_t)>;

  static GraphSchedule static_graph(Graph g);
  static GraphSchedule periodic(std::vector<Graph> slots, ScheduleKind kind, int tau);
  /// Aperiodic schedule; mixing matrices are built on demand.
  GraphSchedule(int n, ScheduleKind kind, int tau, Generator generator);

  int n() const { return n_; }
  ScheduleKind kind() const { return kind_; }
  int tau() const { return tau_; }
  /// Number of distinct slots for periodic schedules, 0 otherwise.
  std::size_t period() const { return slots_ ? slots_->size() : 0; }

  Graph graph(std::uint64_t slot) const;
  /// Shared for periodic schedules, freshly built otherwise.
  std::shared_ptr<const MixingMatrix> mixing(std::uint64_t slot) const;

 private:
  GraphSchedule() = default;

  int n_ = 0;
  ScheduleKind kind_ = ScheduleKind::Static;
  int tau_ = 1;
  Generator generator_;
  std::shared_ptr<const std::vector<std::shared_ptr<const MixingMatrix>>> slots_;
};

/// Partitions the base edges into tau groups (round-robin over a seeded
/// shuffle); slot k carries group k mod tau. Every window of tau consecutive
/// slots unions back to the base graph.
GraphSchedule tau_connected_schedule(const Graph& base, int tau, std::uint64_t seed);

struct ContractionCertificate {
  int tau = 1;
  double lambda = 0.0;
  std::optional<double> rho;  // static schedules only
  std::optional<double> chi;  // 1 / (1 - rho)

  bool is_static() const { return rho.has_value(); }
};

class NonContractingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// lambda = 1 - max over k in [tau-1, horizon] of ||W^k ... W^{k-tau+1} - J/n||_2.
/// The supremum is taken over a finite horizon, so for aperiodic schedules
/// this is an estimate. Periodic schedules with horizon >= 2*period-2 are
/// covered exactly. Throws NonContractingError when lambda <= 0.
ContractionCertificate contraction_certificate(const GraphSchedule& schedule, int tau,
                                               std::optional<long> horizon = std::nullopt);

}  // namespace dstorm
