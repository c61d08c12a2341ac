#include "dstorm/agd.hpp"

#include <cmath>

namespace dstorm {

double next_alpha(double A, double L, double mu) {
  if (!(L > 0.0)) throw std::invalid_argument("next_alpha: L must be positive");
  if (mu < 0.0 || A < 0.0) throw std::invalid_argument("next_alpha: mu and A must be nonnegative");
  const double b = 1.0 + A * mu;
  return (b + std::sqrt(b * b + 4.0 * L * A * b)) / (2.0 * L);
}

CoefficientSchedule::CoefficientSchedule(double L, double mu, int iterations) : L_(L), mu_(mu) {
  if (!(L > 0.0)) throw std::invalid_argument("CoefficientSchedule: L must be positive");
  if (mu < 0.0) throw std::invalid_argument("CoefficientSchedule: mu must be nonnegative");
  extend_to(iterations);
}

void CoefficientSchedule::extend_to(int k) {
  while (last_index() < k) {
    const double a = next_alpha(A_.back(), L_, mu_);
    if (!std::isfinite(A_.back() + a)) {
      throw NumericalError(last_index(), "coefficient A overflows; use fewer iterations");
    }
    alpha_.push_back(a);
    A_.push_back(A_.back() + a);
  }
}

AgdState agd_step(const AgdState& s, const CoefficientSchedule& sched, const StochasticGradientFn& grad,
                  int batch) {
  const int k = s.k;
  if (sched.last_index() < k + 1) throw std::logic_error("agd_step: coefficient schedule too short");
  const double a = sched.alpha(k + 1);
  const double A = sched.A(k);
  const double A_next = sched.A(k + 1);

  AgdState next;
  next.k = k + 1;
  next.y = detail::extrapolate(a, s.u, A, s.x, A_next);
  const Vector g = grad(next.y, batch);
  if (!g.allFinite()) throw NumericalError(k, "non-finite stochastic gradient");
  next.u = detail::prox_update(a, A, A_next, sched.mu(), s.u, next.y, g);
  next.x = detail::extrapolate(a, next.u, A, s.x, A_next);
  if (!next.x.allFinite() || !next.u.allFinite()) throw NumericalError(k, "non-finite iterate");
  return next;
}

double theoretical_bound(int N, double R_sq, double sigma_sq, double L, double mu, std::span<const int> batches,
                         std::span<const double> deltas) {
  if (N < 1) throw std::invalid_argument("theoretical_bound: N must be >= 1");
  if (batches.size() < static_cast<std::size_t>(N) || deltas.size() < static_cast<std::size_t>(N)) {
    throw std::invalid_argument("theoretical_bound: need N batch sizes and N deltas");
  }
  CoefficientSchedule sched(L, mu, N);
  double acc = R_sq;
  for (int i = 1; i <= N; ++i) {
    const int r = batches[i - 1];
    if (r < 1) throw std::invalid_argument("theoretical_bound: batch sizes must be >= 1");
    acc += sched.A(i) * (sigma_sq / (2.0 * L * r) + deltas[i - 1]);
  }
  return acc / sched.A(N);
}

double a_lower_bound(int N, double L, double mu) {
  if (N < 1) throw std::invalid_argument("a_lower_bound: N must be >= 1");
  return std::pow(1.0 + 0.5 * std::sqrt(mu / L), 2.0 * (N - 1)) / L;
}

}  // namespace dstorm
