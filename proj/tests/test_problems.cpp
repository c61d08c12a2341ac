#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "doctest.h"
#include "dstorm/problems.hpp"
#include "dstorm/rng.hpp"

using namespace dstorm;

namespace {

Vector random_vector(int d, RngStream& rng) {
  Vector v(d);
  for (int j = 0; j < d; ++j) v(j) = rng.normal();
  return v;
}

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

bool row_less(const SparseRow& a, const SparseRow& b) {
  return std::tie(a.label, a.index, a.value) < std::tie(b.label, b.index, b.value);
}

}  // namespace

TEST_CASE("quadratic from explicit blocks") {
  QuadraticBlock b{Matrix::Constant(1, 1, 2.0), Vector::Constant(1, 4.0), 0.0};
  const auto inst = QuadraticInstance::from_blocks({b});
  CHECK(inst.x_star()(0) == doctest::Approx(2.0));
  CHECK(inst.f_star() == doctest::Approx(0.0));
  CHECK(inst.mu(0) == doctest::Approx(4.0));
  CHECK(inst.smoothness(0) == doctest::Approx(4.0));

  QuadraticBlock rank_deficient{Matrix::Zero(3, 2), Vector::Zero(3), 0.0};
  rank_deficient.B(0, 0) = 1.0;
  CHECK_THROWS_AS(QuadraticInstance::from_blocks({rank_deficient}), std::invalid_argument);
}

TEST_CASE("gen_quadratic") {
  SUBCASE("condition number") {
    for (double kappa : {1.0, 10.0, 100.0}) {
      const auto inst = gen_quadratic(8, 6, kappa, 3);
      const auto p = quadratic_problem(inst);
      CHECK(p.constants.kappa_g() == doctest::Approx(kappa).epsilon(0.1));
    }
  }
  SUBCASE("isotropic case is least squares") {
    const auto inst = gen_quadratic(3, 4, 1.0, 5);
    for (int i = 0; i < 3; ++i) CHECK(inst.mu(i) == doctest::Approx(inst.smoothness(i)).epsilon(1e-10));
    Matrix B(0, 4);
    Vector c(0);
    for (int i = 0; i < 3; ++i) {
      Matrix nb(B.rows() + inst.block(i).B.rows(), 4);
      nb << B, inst.block(i).B;
      Vector nc(c.size() + inst.block(i).c.size());
      nc << c, inst.block(i).c;
      B = nb;
      c = nc;
    }
    const Vector ls = B.colPivHouseholderQr().solve(c);
    CHECK((ls - inst.x_star()).norm() < 1e-10);
  }
  SUBCASE("determinism") {
    const auto a = gen_quadratic(4, 3, 10, 9), b = gen_quadratic(4, 3, 10, 9);
    for (int i = 0; i < 4; ++i) CHECK(a.block(i).B == b.block(i).B);
    CHECK(a.x_star() == b.x_star());
    CHECK_FALSE(gen_quadratic(4, 3, 10, 10).x_star() == a.x_star());
  }
  CHECK_THROWS_AS(gen_quadratic(2, 1, 5.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_quadratic(0, 3, 5.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_quadratic(2, 3, 0.5, 1), std::invalid_argument);
}

TEST_CASE("quadratic oracle") {
  const auto inst = gen_quadratic(3, 5, 20.0, 6);
  const auto o = quadratic_oracle(inst, 1);
  CHECK(o->grad(inst.local_minimizer(1)).norm() < 1e-9);

  QuadraticOptions opt;
  opt.sigma = 0.0;
  const auto quiet = quadratic_oracle(gen_quadratic(3, 5, 20.0, 6, opt), 0);
  RngStream s(1, 1);
  const Vector x = Vector::Ones(5);
  CHECK(quiet->sample_grad(x, s) == quiet->grad(x));

  RngStream noise(2, 2);
  double acc = 0.0;
  Vector mean = Vector::Zero(5);
  const Vector g = o->grad(x);
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) {
    const Vector e = o->sample_grad(x, noise) - g;
    acc += e.squaredNorm();
    mean += e;
  }
  CHECK(acc / draws >= 0.9);
  CHECK(acc / draws <= 1.1);
  CHECK((mean / draws).norm() <= 4.0 / std::sqrt(static_cast<double>(draws)));
  CHECK_THROWS_AS(quadratic_oracle(inst, 3), std::out_of_range);
}

TEST_CASE("quadratic strong convexity and smoothness") {
  const auto p = quadratic_problem(gen_quadratic(5, 4, 50.0, 12));
  const double mu = p.constants.mu_g(), L = p.constants.L_g();
  RngStream rng(12, 0);
  for (int t = 0; t < 100; ++t) {
    const Vector x = random_vector(4, rng), y = random_vector(4, rng);
    const double secant = global_value(p.oracles, y) - global_value(p.oracles, x) -
                          global_gradient(p.oracles, x).dot(y - x);
    const double dist = (y - x).squaredNorm();
    CHECK(secant >= mu / 2 * dist - 1e-10);
    CHECK(secant <= L / 2 * dist + 1e-10);
  }
}

TEST_CASE("parse_libsvm") {
  const auto d = parse("+1 1:0.5 3:-2\n");
  REQUIRE(d.size() == 1);
  CHECK(d.rows[0].label == 1.0);
  CHECK(d.rows[0].index == std::vector<int>{0, 2});
  CHECK(d.rows[0].value == std::vector<double>{0.5, -2.0});
  CHECK(d.dim == 3);

  const auto z = parse("0 2:1\n1 1:1\n");
  CHECK(z.rows[0].label == -1.0);
  CHECK(z.rows[0].index == std::vector<int>{1});
  CHECK(z.rows[1].label == 1.0);

  const auto fixture = parse_libsvm(std::string(DSTORM_TEST_DATA) + "/a9a_sample.txt");
  CHECK(fixture.size() == 10);
  CHECK(fixture.dim == 123);

  CHECK_THROWS_WITH_AS(parse("+1 1:1\n-1 2:x\n"), doctest::Contains(":2:"), std::invalid_argument);
  CHECK_THROWS_AS(parse(""), std::invalid_argument);
  CHECK_THROWS_AS(parse("+1 3:1 2:1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse("+1 0:1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse("2 1:1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_libsvm(std::string("/nonexistent/file.txt")), std::runtime_error);

  std::stringstream out;
  write_libsvm(out, fixture);
  const auto again = parse_libsvm(out, "roundtrip");
  CHECK(again.rows == fixture.rows);
}

TEST_CASE("partition") {
  const auto data = parse_libsvm(std::string(DSTORM_TEST_DATA) + "/a9a_sample.txt");
  const auto three = partition(data, 3, 1);
  CHECK(three[0].size() == 4);
  CHECK(three[1].size() == 3);
  CHECK(three[2].size() == 3);
  CHECK(partition(data, 3, 1)[0].rows == three[0].rows);

  std::vector<SparseRow> all, orig = data.rows;
  for (const auto& s : three) all.insert(all.end(), s.rows.begin(), s.rows.end());
  std::sort(all.begin(), all.end(), row_less);
  std::sort(orig.begin(), orig.end(), row_less);
  CHECK(all == orig);

  const auto one = partition(data, 1, 1);
  CHECK(one.size() == 1);
  CHECK(one[0].size() == 10);
  CHECK_THROWS_AS(partition(data, 11, 1), std::invalid_argument);
  CHECK_THROWS_AS(partition(data, 0, 1), std::invalid_argument);
}

TEST_CASE("logistic oracle") {
  const auto data = synthetic_onehot_dataset(200, 30, 5, 3);
  CHECK(data.dim == 30);
  for (const auto& r : data.rows) CHECK(r.index.size() == 5);
  const LogisticInstance inst(partition(data, 4, 2), 0.1);
  CHECK(inst.smoothness(0) == doctest::Approx(5.0 / 4 + 0.1));
  CHECK(inst.L_xi() >= inst.smoothness(3));

  SUBCASE("per-sample gradient at zero") {
    const LogisticInstance single({Dataset{{data.rows[0]}, 30}}, 0.1);
    const auto o = logistic_oracle(single, 0);
    RngStream s(1, 0);
    const Vector g = o->sample_grad(Vector::Zero(30), s);
    Vector want = Vector::Zero(30);
    data.rows[0].axpy(-data.rows[0].label / 2, want);
    CHECK((g - want).norm() < 1e-15);
    const Vector x = Vector::LinSpaced(30, -1, 1);
    CHECK((o->sample_grad(x, s) - o->grad(x)).norm() < 1e-12);
  }

  SUBCASE("finite differences") {
    const auto o = logistic_oracle(inst, 1);
    RngStream rng(4, 4);
    for (int t = 0; t < 50; ++t) {
      const Vector x = random_vector(30, rng), v = random_vector(30, rng);
      const double h = 1e-5;
      const double fd = (o->value(x + h * v) - o->value(x - h * v)) / (2 * h);
      CHECK(std::abs(fd - o->grad(x).dot(v)) <= 1e-6 * (1 + std::abs(o->value(x))));
    }
  }

  SUBCASE("unbiased sampling") {
    const auto o = logistic_oracle(inst, 2);
    RngStream s(5, 2);
    const Vector x = Vector::Constant(30, 0.2);
    Vector mean = Vector::Zero(30);
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) mean += o->sample_grad(x, s);
    mean /= draws;
    CHECK((mean - o->grad(x)).norm() <= 4.0 * std::sqrt(5.0) / std::sqrt(static_cast<double>(draws)));
  }

  CHECK_THROWS_AS(LogisticInstance(partition(data, 2, 1), 0.0), std::invalid_argument);
}

TEST_CASE("logistic reference solutions shrink with theta") {
  const auto data = synthetic_onehot_dataset(300, 40, 6, 8);
  double prev = INFINITY;
  for (double theta : {0.1, 1.0, 10.0}) {
    const LogisticInstance inst(partition(data, 3, 1), theta);
    const auto p = logistic_problem(inst);
    REQUIRE(p.x_star);
    CHECK(global_gradient(p.oracles, *p.x_star).norm() <= 1e-9);
    CHECK(p.x_star->norm() < prev);
    prev = p.x_star->norm();
    CHECK_NOTHROW(p.constants.validate());
  }
}

TEST_CASE("logistic sigma is the shard variance at x0") {
  const auto data = synthetic_onehot_dataset(100, 20, 4, 1);
  const LogisticInstance inst(partition(data, 2, 1), 0.5);
  const auto p = logistic_problem(inst);
  const auto o = p.oracles[0];
  RngStream s(3, 0);
  double acc = 0.0;
  const int draws = 50000;
  const Vector g = o->grad(p.x0);
  for (int t = 0; t < draws; ++t) acc += (o->sample_grad(p.x0, s) - g).squaredNorm();
  CHECK(acc / draws == doctest::Approx(o->sigma() * o->sigma()).epsilon(0.05));
}
