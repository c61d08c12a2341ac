#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dstorm/linalg.hpp"

namespace dstorm {

/// Greater root of L a^2 - (1 + A mu) a - (1 + A mu) A = 0.
double next_alpha(double A, double L, double mu);

/// alpha^0 = A^0 = 0, A^{k+1} = A^k + alpha^{k+1}, extended on demand.
class CoefficientSchedule {
 public:
  CoefficientSchedule(double L, double mu, int iterations = 0);

  void extend_to(int k);
  int last_index() const { return static_cast<int>(A_.size()) - 1; }

  double alpha(int k) const { return alpha_.at(static_cast<std::size_t>(k)); }
  double A(int k) const { return A_.at(static_cast<std::size_t>(k)); }
  double L() const { return L_; }
  double mu() const { return mu_; }

 private:
  double L_;
  double mu_;
  std::vector<double> alpha_{0.0};
  std::vector<double> A_{0.0};
};

class NumericalError : public std::runtime_error {
 public:
  NumericalError(int iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

struct AgdState {
  int k = 0;
  Vector x, y, u;

  static AgdState start(const Vector& x0) { return {0, x0, x0, x0}; }
};

/// Stochastic gradient of the objective at a point with the requested batch.
using StochasticGradientFn = std::function<Vector(const Vector& point, int batch)>;

namespace detail {

// Shared by the centralized and decentralized methods so that both reduce to
// the same floating-point operations.
template <class U, class X>
auto extrapolate(double alpha, const U& u, double A, const X& x, double A_next) {
  return ((alpha * u + A * x) / A_next).eval();
}

template <class U, class Y, class G>
auto prox_update(double alpha, double A, double A_next, double mu, const U& u, const Y& y, const G& g) {
  return (((alpha * mu) * y + (1.0 + A * mu) * u - alpha * g) / (1.0 + A_next * mu)).eval();
}

}  // namespace detail

/// One iteration of accelerated gradient descent with a stochastic inexact
/// oracle on R^d. u^{k+1} is the closed-form minimiser of
///   alpha <g, x - y> + (1 + A mu)/2 ||x - u||^2 + alpha mu/2 ||x - y||^2.
/// The schedule must already cover index state.k + 1.
AgdState agd_step(const AgdState& state, const CoefficientSchedule& schedule, const StochasticGradientFn& grad,
                  int batch);

/// (1/A^N) (R^2 + sum_{i<=N} A^i (sigma^2 / (2 L r_i) + delta_i)).
double theoretical_bound(int N, double R_sq, double sigma_sq, double L, double mu, std::span<const int> batches,
                         std::span<const double> deltas);

/// (1/L) (1 + sqrt(mu/L)/2)^{2(N-1)}.
double a_lower_bound(int N, double L, double mu);

}  // namespace dstorm
