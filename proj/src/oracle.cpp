#include "dstorm/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dstorm {

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void require_nodes(const std::vector<double>& v) {
  if (v.empty()) throw std::logic_error("ProblemConstants: no nodes");
}

}  // namespace

double ProblemConstants::mu_g() const { require_nodes(mu); return mean(mu); }
double ProblemConstants::L_g() const { require_nodes(L); return mean(L); }
double ProblemConstants::mu_l() const { require_nodes(mu); return *std::min_element(mu.begin(), mu.end()); }
double ProblemConstants::L_l() const { require_nodes(L); return *std::max_element(L.begin(), L.end()); }

double ProblemConstants::sigma_g_sq() const {
  require_nodes(sigma);
  double s = 0.0;
  for (double v : sigma) s += v * v;
  return s / static_cast<double>(sigma.size());
}

void ProblemConstants::validate() const {
  if (mu.empty()) throw std::invalid_argument("problem constants: no nodes");
  if (L.size() != mu.size() || sigma.size() != mu.size()) {
    throw std::invalid_argument("problem constants: per-node arrays differ in length");
  }
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] > 0.0) || !(mu[i] <= L[i])) {
      throw std::invalid_argument("problem constants: node " + std::to_string(i) + " needs 0 < mu <= L");
    }
    if (!(sigma[i] >= 0.0)) throw std::invalid_argument("problem constants: node " + std::to_string(i) + " has sigma < 0");
  }
  if (!(L_xi >= L_l())) throw std::invalid_argument("problem constants: L_xi must be >= L_l");
  if (!(M_xi >= 0.0)) throw std::invalid_argument("problem constants: M_xi must be >= 0");
}

Vector batched_gradient(const NodeOracle& oracle, const Vector& x, int r, RngStream& stream) {
  if (r <= 0) throw std::invalid_argument("batched_gradient: batch size must be >= 1");
  Vector acc = oracle.sample_grad(x, stream);
  for (int l = 1; l < r; ++l) acc += oracle.sample_grad(x, stream);
  return acc / static_cast<double>(r);
}

Stack stacked_batched_gradient(std::span<const OraclePtr> oracles, const Stack& x, int r,
                               std::span<RngStream> streams) {
  const auto n = static_cast<Eigen::Index>(oracles.size());
  if (x.rows() != n || streams.size() != oracles.size()) {
    throw std::invalid_argument("stacked_batched_gradient: stack, oracles and streams disagree on n");
  }
  Stack g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      g.row(i) = batched_gradient(*oracles[i], x.row(i).transpose(), r, streams[i]).transpose();
    } catch (const std::exception& e) {
      throw std::runtime_error("node " + std::to_string(i) + ": " + e.what());
    }
  }
  return g;
}

Stack stacked_gradient(std::span<const OraclePtr> oracles, const Stack& x) {
  Stack g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) g.row(i) = oracles[i]->grad(x.row(i).transpose()).transpose();
  return g;
}

double global_value(std::span<const OraclePtr> oracles, const Vector& x) {
  double s = 0.0;
  for (const auto& o : oracles) s += o->value(x);
  return s / static_cast<double>(oracles.size());
}

Vector global_gradient(std::span<const OraclePtr> oracles, const Vector& x) {
  Vector g = Vector::Zero(x.size());
  for (const auto& o : oracles) g += o->grad(x);
  return g / static_cast<double>(oracles.size());
}

double delta_from_delta_prime(double delta_prime, const ProblemConstants& c) {
  if (delta_prime < 0.0) throw std::invalid_argument("delta_from_delta_prime: delta_prime must be >= 0");
  const double Ll = c.L_l();
  const double coef = Ll * Ll / c.L_g() + 2.0 * Ll * Ll / c.mu_g() + Ll - c.mu_l();
  return coef * delta_prime / (2.0 * c.n());
}

InexactOracleValue inexact_oracle_eval(const Stack& x, const ProblemConstants& c,
                                       std::span<const OraclePtr> oracles, int r,
                                       std::span<RngStream> streams) {
  const double n = static_cast<double>(x.rows());
  const Stack xbar = mean_stack(x);
  const Stack grads = stacked_gradient(oracles, x);
  double F = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) F += oracles[i]->value(x.row(i).transpose());
  const double inner = (grads.array() * (xbar - x).array()).sum();
  const double Ll = c.L_l();
  const double dist_sq = (xbar - x).squaredNorm();

  InexactOracleValue out;
  out.f_delta = (F + inner) / n + (c.mu_l() / (2.0 * n) - Ll * Ll / (n * c.mu_g())) * dist_sq;
  out.g = row_mean(grads);
  out.g_tilde = row_mean(stacked_batched_gradient(oracles, x, r, streams));
  return out;
}

}  // namespace dstorm
