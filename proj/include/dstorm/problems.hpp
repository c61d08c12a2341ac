#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dstorm/linalg.hpp"
#include "dstorm/oracle.hpp"

namespace dstorm {

// ---------------------------------------------------------------------------
// Strongly convex quadratics: f_i(x) = 1/2 ||B_i x - c_i||^2 with additive
// Gaussian gradient noise of total variance sigma_i^2.

struct QuadraticBlock {
  Matrix B;
  Vector c;
  double sigma = 0.0;
};

class QuadraticInstance {
 public:
  /// Throws std::invalid_argument if any B_i lacks full column rank or the
  /// blocks disagree on the dimension.
  static QuadraticInstance from_blocks(std::vector<QuadraticBlock> blocks);

  int n() const { return static_cast<int>(blocks_.size()); }
  int dim() const { return static_cast<int>(blocks_.front().B.cols()); }
  const QuadraticBlock& block(int i) const { return blocks_.at(static_cast<std::size_t>(i)); }
  double mu(int i) const { return mu_.at(static_cast<std::size_t>(i)); }
  double smoothness(int i) const { return L_.at(static_cast<std::size_t>(i)); }
  const Vector& x_star() const { return x_star_; }
  double f_star() const { return f_star_; }
  /// Minimiser of f_i alone.
  Vector local_minimizer(int i) const;

 private:
  std::vector<QuadraticBlock> blocks_;
  std::vector<double> mu_, L_;
  Vector x_star_;
  double f_star_ = 0.0;
};

struct QuadraticOptions {
  double sigma = 1.0;         // per-node gradient noise level
  int extra_rows = 2;         // rows of B_i beyond d
  double scale_spread = 1.0;  // node i's spectrum is scaled by 1 + spread * U[0,1)
  double heterogeneity = 1.0; // spread of the local minimisers
};

/// Seeded random instance with kappa_g = mean(L_i) / mean(mu_i) equal to
/// kappa_target (d >= 2, or kappa_target == 1 when d == 1).
QuadraticInstance gen_quadratic(int n, int d, double kappa_target, std::uint64_t seed,
                                const QuadraticOptions& options = {});

OraclePtr quadratic_oracle(const QuadraticInstance& instance, int i);

/// M_xi uses max_i ||grad f_i(x*)|| + 3 sigma_i since Gaussian noise is unbounded.
Problem quadratic_problem(const QuadraticInstance& instance, std::optional<Vector> x0 = std::nullopt);

// ---------------------------------------------------------------------------
// L2-regularised logistic regression on LIBSVM data.

struct SparseRow {
  double label = 0.0;  // -1 or +1
  std::vector<int> index;  // 0-based, ascending
  std::vector<double> value;

  double dot(const Vector& x) const;
  double squared_norm() const;
  /// out += scale * row
  void axpy(double scale, Vector& out) const;
  friend bool operator==(const SparseRow&, const SparseRow&) = default;
};

struct Dataset {
  std::vector<SparseRow> rows;
  int dim = 0;

  std::size_t size() const { return rows.size(); }
};

/// Lines `label idx:val ...`, 1-based ascending indices. Labels in {0, 1} are
/// mapped to {-1, +1}. Errors carry the offending line number.
Dataset parse_libsvm(std::istream& in, const std::string& source = "<stream>");
Dataset parse_libsvm(const std::string& path);
void write_libsvm(std::ostream& out, const Dataset& data);

/// Seeded shuffle, then contiguous shards whose sizes differ by at most one.
std::vector<Dataset> partition(const Dataset& data, int n, std::uint64_t seed);

/// a9a-like synthetic data: `groups` one-hot categorical blocks over `dim`
/// binary features, labels drawn from a planted logistic model.
Dataset synthetic_onehot_dataset(int rows, int dim, int groups, std::uint64_t seed);

class LogisticInstance {
 public:
  LogisticInstance(std::vector<Dataset> shards, double theta);

  int n() const { return static_cast<int>(shards_.size()); }
  int dim() const { return dim_; }
  double theta() const { return theta_; }
  const Dataset& shard(int i) const { return shards_.at(static_cast<std::size_t>(i)); }
  double smoothness(int i) const { return L_.at(static_cast<std::size_t>(i)); }
  double L_xi() const { return L_xi_; }

 private:
  std::vector<Dataset> shards_;
  double theta_;
  int dim_;
  std::vector<double> L_;
  double L_xi_ = 0.0;
};

OraclePtr logistic_oracle(const LogisticInstance& instance, int i, double sigma = 0.0);

struct ReferenceSolution {
  Vector x_star;
  double f_star = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

/// Deterministic accelerated full-gradient method on f = (1/n) sum f_i, run
/// until ||grad f|| <= tol.
ReferenceSolution solve_reference(const std::vector<OraclePtr>& oracles, double L, double mu, const Vector& x0,
                                  double tol = 1e-10, int max_iterations = 200000);

/// sigma_i: exact shard gradient variance at x0 unless supplied.
/// M_xi: max per-sample gradient norm at the reference minimiser.
Problem logistic_problem(const LogisticInstance& instance, std::optional<Vector> x0 = std::nullopt,
                         std::optional<std::vector<double>> sigma = std::nullopt);

}  // namespace dstorm
