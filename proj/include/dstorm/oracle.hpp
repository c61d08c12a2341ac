#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dstorm/linalg.hpp"
#include "dstorm/rng.hpp"

namespace dstorm {

/// Local objective f_i of one node with its stochastic first-order oracle.
/// Implementations are immutable; all randomness comes from the caller's stream.
class NodeOracle {
 public:
  virtual ~NodeOracle() = default;

  virtual int dim() const = 0;
  // Exact quantities, for diagnostics and tests only.
  virtual double value(const Vector& x) const = 0;
  virtual Vector grad(const Vector& x) const = 0;
  /// One stochastic gradient: unbiased for grad(x) with E||noise||^2 <= sigma^2.
  virtual Vector sample_grad(const Vector& x, RngStream& stream) const = 0;

  virtual double mu() const = 0;
  virtual double smoothness() const = 0;
  virtual double sigma() const = 0;
};

using OraclePtr = std::shared_ptr<const NodeOracle>;

/// Per-node constants plus the worst-case quantities that enter the consensus
/// bound. Aggregates are computed on every call.
struct ProblemConstants {
  std::vector<double> mu;
  std::vector<double> L;
  std::vector<double> sigma;
  double L_xi = 0.0;
  double M_xi = 0.0;

  int n() const { return static_cast<int>(mu.size()); }
  double mu_g() const;
  double L_g() const;
  double mu_l() const;
  double L_l() const;
  double sigma_g_sq() const;
  double kappa_l() const { return L_l() / mu_l(); }
  double kappa_g() const { return L_g() / mu_g(); }

  /// Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

/// A decentralized problem instance: one oracle per node, the constants the
/// planner needs, an initial point and, when known, the minimiser.
struct Problem {
  std::string name;
  std::vector<OraclePtr> oracles;
  ProblemConstants constants;
  Vector x0;
  std::optional<Vector> x_star;
  std::optional<double> f_star;

  int n() const { return static_cast<int>(oracles.size()); }
  int dim() const { return static_cast<int>(x0.size()); }
};

/// Mean of r stochastic gradients drawn sequentially from the stream.
Vector batched_gradient(const NodeOracle& oracle, const Vector& x, int r, RngStream& stream);

/// Row i holds the batch-r gradient of node i at row i of x.
Stack stacked_batched_gradient(std::span<const OraclePtr> oracles, const Stack& x, int r,
                               std::span<RngStream> streams);

/// Exact stacked gradient, row i = grad f_i(x_i).
Stack stacked_gradient(std::span<const OraclePtr> oracles, const Stack& x);

/// f(x) = (1/n) sum_i f_i(x).
double global_value(std::span<const OraclePtr> oracles, const Vector& x);
Vector global_gradient(std::span<const OraclePtr> oracles, const Vector& x);

/// Oracle error induced by consensus accuracy delta_prime:
/// delta = (1/2n) (L_l^2/L_g + 2 L_l^2/mu_g + L_l - mu_l) delta_prime.
double delta_from_delta_prime(double delta_prime, const ProblemConstants& c);

struct InexactOracleValue {
  double f_delta = 0.0;
  Vector g;        // (1/n) sum grad f_i(x_i)
  Vector g_tilde;  // (1/n) sum of batch-r stochastic gradients
};

/// Stochastic inexact oracle of f at the row-mean of x built from the local
/// copies. f_delta is exposed for checking the two-sided envelope; the
/// optimisation methods themselves only consume g_tilde.
InexactOracleValue inexact_oracle_eval(const Stack& x, const ProblemConstants& c,
                                       std::span<const OraclePtr> oracles, int r,
                                       std::span<RngStream> streams);

}  // namespace dstorm
