#include <cmath>

#include "doctest.h"
#include "dstorm/oracle.hpp"
#include "dstorm/problems.hpp"
#include "dstorm/rng.hpp"

using namespace dstorm;

namespace {

ProblemConstants constants(std::vector<double> mu, std::vector<double> L, std::vector<double> sigma) {
  ProblemConstants c{std::move(mu), std::move(L), std::move(sigma), 0.0, 0.0};
  c.L_xi = c.L_l();
  return c;
}

std::vector<RngStream> streams(int n, std::uint64_t seed) {
  std::vector<RngStream> s;
  for (int i = 0; i < n; ++i) s.emplace_back(seed, static_cast<std::uint64_t>(i));
  return s;
}

Vector random_vector(int d, RngStream& rng) {
  Vector v(d);
  for (int j = 0; j < d; ++j) v(j) = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("rng streams") {
  RngStream a(42, 3), b(42, 3), c(42, 4);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  RngStream replay(42, 3, 50);
  a = RngStream(42, 3);
  for (int i = 0; i < 50; ++i) a.next_u64();
  CHECK(a.next_u64() == replay.next_u64());

  RngStream u(1, 1);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double z = u.normal();
    sum += z;
    sq += z * z;
    const double p = u.uniform();
    CHECK((p >= 0.0 && p < 1.0));
    CHECK(u.below(7) < 7);
  }
  CHECK(std::abs(sum / 1e5) < 0.02);
  CHECK(std::abs(sq / 1e5 - 1.0) < 0.02);
}

TEST_CASE("problem constants aggregates") {
  const auto c = constants({1, 2, 3}, {4, 5, 9}, {1, 2, 2});
  CHECK(c.n() == 3);
  CHECK(c.mu_g() == doctest::Approx(2.0));
  CHECK(c.L_g() == doctest::Approx(6.0));
  CHECK(c.mu_l() == 1.0);
  CHECK(c.L_l() == 9.0);
  CHECK(c.sigma_g_sq() == doctest::Approx(3.0));
  CHECK(c.kappa_l() == doctest::Approx(9.0));
  CHECK(c.kappa_g() == doctest::Approx(3.0));
  CHECK_NOTHROW(c.validate());

  auto bad = c;
  bad.mu[1] = 6.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.L_xi = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.sigma[0] = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("delta from delta prime") {
  CHECK(delta_from_delta_prime(0.0, constants({1, 1, 1, 1}, {4, 4, 4, 4}, {0, 0, 0, 0})) == 0.0);
  CHECK(delta_from_delta_prime(1.0, constants({1}, {1}, {0})) == doctest::Approx(1.5));
  CHECK(delta_from_delta_prime(0.01, constants({1, 1, 1, 1}, {4, 4, 4, 4}, {0, 0, 0, 0})) ==
        doctest::Approx(0.04875).epsilon(1e-12));
}

TEST_CASE("batched gradients") {
  QuadraticOptions opt;
  opt.sigma = 0.0;
  const auto exact = gen_quadratic(2, 4, 10.0, 3, opt);
  const auto o = quadratic_oracle(exact, 0);
  RngStream s(1, 0);
  const Vector x = Vector::LinSpaced(4, -1, 1);
  CHECK((batched_gradient(*o, x, 7, s) - o->grad(x)).norm() < 1e-14);
  CHECK_THROWS_AS(batched_gradient(*o, x, 0, s), std::invalid_argument);

  const auto noisy = gen_quadratic(2, 4, 10.0, 3);
  const auto on = quadratic_oracle(noisy, 0);
  RngStream s1(5, 0), s2(5, 0);
  CHECK(batched_gradient(*on, x, 1, s1) == on->sample_grad(x, s2));

  // Variance of a batch of 10 follows sigma^2 / r.
  RngStream sv(9, 0);
  double acc = 0.0;
  const int trials = 100000;
  const Vector g = on->grad(x);
  for (int t = 0; t < trials; ++t) acc += (batched_gradient(*on, x, 10, sv) - g).squaredNorm();
  CHECK(acc / trials >= 0.08);
  CHECK(acc / trials <= 0.12);
}

TEST_CASE("stacked batched gradient") {
  const auto inst = gen_quadratic(2, 3, 5.0, 4);
  std::vector<OraclePtr> same{quadratic_oracle(inst, 0), quadratic_oracle(inst, 0)};
  Stack x = Stack::Ones(2, 3);
  auto st = streams(2, 1);
  const Stack g = stacked_batched_gradient(same, x, 2, st);
  CHECK((g.row(0) - g.row(1)).norm() > 0.0);

  auto st1 = streams(1, 1);
  RngStream s0(1, 0);
  std::vector<OraclePtr> one{same[0]};
  const Stack g1 = stacked_batched_gradient(one, x.topRows(1), 3, st1);
  CHECK(g1.row(0).transpose() == batched_gradient(*same[0], x.row(0).transpose(), 3, s0));

  QuadraticOptions opt;
  opt.sigma = 0;
  const auto ex = gen_quadratic(3, 3, 5.0, 4, opt);
  std::vector<OraclePtr> exact{quadratic_oracle(ex, 0), quadratic_oracle(ex, 1), quadratic_oracle(ex, 2)};
  auto st3 = streams(3, 2);
  const Stack x3 = Stack::Random(3, 3);
  CHECK((stacked_batched_gradient(exact, x3, 4, st3) - stacked_gradient(exact, x3)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(stacked_batched_gradient(exact, Stack::Zero(2, 3), 1, st3), std::invalid_argument);
}

TEST_CASE("inexact oracle") {
  const auto inst = gen_quadratic(4, 5, 20.0, 8);
  const auto p = quadratic_problem(inst);
  RngStream rng(8, 100);
  SUBCASE("consensual input") {
    const Vector xbar = random_vector(5, rng);
    const Stack X = Stack::Ones(4, 1) * xbar.transpose();
    auto st = streams(4, 1);
    const auto v = inexact_oracle_eval(X, p.constants, p.oracles, 3, st);
    CHECK(v.f_delta == doctest::Approx(global_value(p.oracles, xbar)).epsilon(1e-12));
    CHECK((v.g - global_gradient(p.oracles, xbar)).norm() < 1e-10);
  }
  SUBCASE("noise-free oracles") {
    QuadraticOptions opt;
    opt.sigma = 0;
    const auto q = quadratic_problem(gen_quadratic(4, 5, 20.0, 8, opt));
    auto st = streams(4, 1);
    const auto v = inexact_oracle_eval(Stack::Random(4, 5), q.constants, q.oracles, 2, st);
    CHECK((v.g_tilde - v.g).norm() < 1e-13);
  }
}

TEST_CASE("inexact oracle envelope on a two-node instance") {
  const auto inst = gen_quadratic(2, 3, 10.0, 17);
  const auto p = quadratic_problem(inst);
  const auto& c = p.constants;
  const double dprime = 1e-2;
  const double delta = delta_from_delta_prime(dprime, c);
  RngStream rng(17, 5);
  for (int t = 0; t < 100; ++t) {
    const Vector xbar = random_vector(3, rng);
    Vector e = random_vector(3, rng);
    e *= std::sqrt(dprime / 2.0) / e.norm();  // ||X - Xbar||^2 = dprime
    Stack X(2, 3);
    X.row(0) = (xbar + e).transpose();
    X.row(1) = (xbar - e).transpose();
    auto st = streams(2, static_cast<std::uint64_t>(t));
    const auto v = inexact_oracle_eval(X, c, p.oracles, 1, st);
    const Vector ybar = xbar + random_vector(3, rng);
    const double gap = global_value(p.oracles, ybar) - v.f_delta - v.g.dot(ybar - xbar);
    const double dist = (ybar - xbar).squaredNorm();
    CHECK(c.mu_g() / 4 * dist <= gap + 1e-8);
    CHECK(gap <= c.L_g() * dist + delta + 1e-8);
  }
}

TEST_CASE("determinism of g_tilde") {
  const auto p = quadratic_problem(gen_quadratic(3, 4, 10.0, 2));
  const Stack X = Stack::Random(3, 4);
  auto a = streams(3, 77), b = streams(3, 77);
  for (int k = 0; k < 5; ++k) {
    CHECK(inexact_oracle_eval(X, p.constants, p.oracles, 4, a).g_tilde ==
          inexact_oracle_eval(X, p.constants, p.oracles, 4, b).g_tilde);
  }
}
