#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dstorm/consensus.hpp"
#include "dstorm/rng.hpp"
#include "dstorm/topology.hpp"

using namespace dstorm;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

bool has_kind(const std::vector<MixingViolation>& v, MixingViolation::Kind k) {
  for (const auto& x : v)
    if (x.kind == k) return true;
  return false;
}

}  // namespace

TEST_CASE("graph normalises edges") {
  Graph g(4, {{2, 1}, {1, 2}, {0, 3}});
  CHECK(g.edge_count() == 2);
  CHECK(g.edges()[0] == Graph::Edge{0, 3});
  CHECK(g.edges()[1] == Graph::Edge{1, 2});
  CHECK(g.has_edge(2, 1));
  CHECK_FALSE(g.has_edge(0, 1));
  CHECK(g.degrees() == std::vector<int>{1, 1, 1, 1});
  CHECK_THROWS_AS(Graph(3, {{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(3, {{0, 3}}), std::invalid_argument);
}

TEST_CASE("metropolis weights on small graphs") {
  SUBCASE("single vertex") {
    const auto w = metropolis_weights(Graph(1));
    CHECK(w.weights.rows() == 1);
    CHECK(w.weights(0, 0) == 1.0);
  }
  SUBCASE("2-node path") {
    const auto w = metropolis_weights(path_graph(2));
    CHECK((w.weights - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("3-node path") {
    const auto w = metropolis_weights(path_graph(3));
    const Matrix want = mat({{2. / 3, 1. / 3, 0}, {1. / 3, 1. / 3, 1. / 3}, {0, 1. / 3, 2. / 3}});
    CHECK((w.weights - want).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("validate_mixing reports violations") {
  CHECK(validate_mixing(metropolis_weights(erdos_renyi_graph(12, 0.3, 5))).empty());

  const auto cols = validate_mixing(MixingMatrix{mat({{1, 0}, {1, 0}}), path_graph(2)});
  CHECK(has_kind(cols, MixingViolation::Kind::ColumnSum));

  const auto sparse = validate_mixing(MixingMatrix{Matrix::Constant(2, 2, 0.5), Graph(2)});
  CHECK(has_kind(sparse, MixingViolation::Kind::Sparsity));

  const auto neg = validate_mixing(MixingMatrix{mat({{1.5, -0.5}, {-0.5, 1.5}}), path_graph(2)});
  CHECK(has_kind(neg, MixingViolation::Kind::Negative));

  const auto asym = validate_mixing(MixingMatrix{mat({{0.4, 0.6, 0}, {0.3, 0.4, 0.3}, {0.3, 0, 0.7}}),
                                                 Graph(3, {{0, 1}, {1, 2}, {0, 2}})});
  CHECK(has_kind(asym, MixingViolation::Kind::Asymmetry));
  CHECK_FALSE(asym.front().describe().empty());

  CHECK_THROWS_AS(validate_mixing(MixingMatrix{Matrix::Identity(3, 3), Graph(2)}), std::invalid_argument);
}

TEST_CASE("second eigenvalue") {
  CHECK(second_eigenvalue(metropolis_weights(complete_graph(3))) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(second_eigenvalue(metropolis_weights(path_graph(3))) == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(second_eigenvalue(MixingMatrix{Matrix::Identity(2, 2), Graph(2)}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(deflated_eigenvalues(mat({{0.5, 0.5}, {0.2, 0.8}})), std::invalid_argument);
}

TEST_CASE("contraction certificate examples") {
  const auto k3 = contraction_certificate(GraphSchedule::static_graph(complete_graph(3)), 1);
  CHECK(k3.lambda == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(k3.rho);
  CHECK(*k3.chi == doctest::Approx(1.0));

  const auto p3 = contraction_certificate(GraphSchedule::static_graph(path_graph(3)), 1);
  CHECK(p3.lambda == doctest::Approx(1.0 / 3).epsilon(1e-9));
  CHECK(*p3.chi == doctest::Approx(3.0).epsilon(1e-9));

  const auto alt = GraphSchedule::periodic({Graph(3, {{0, 1}}), Graph(3, {{1, 2}})}, ScheduleKind::TauConnected, 2);
  const auto c = contraction_certificate(alt, 2);
  CHECK(c.lambda > 0.0);
  CHECK(c.lambda < 1.0);
  CHECK_FALSE(c.is_static());

  // Brute force: spectral norm of the deflated window products.
  const Matrix W0 = metropolis_weights(Graph(3, {{0, 1}})).weights;
  const Matrix W1 = metropolis_weights(Graph(3, {{1, 2}})).weights;
  const Matrix J = Matrix::Constant(3, 3, 1.0 / 3);
  Eigen::JacobiSVD<Matrix> s10(W1 * W0 - J), s01(W0 * W1 - J);
  const double worst = std::max(s10.singularValues()(0), s01.singularValues()(0));
  CHECK(c.lambda == doctest::Approx(1.0 - worst).epsilon(1e-12));

  CHECK_THROWS_AS(contraction_certificate(GraphSchedule::static_graph(Graph(3, {{0, 1}})), 1), NonContractingError);
}

TEST_CASE("random geometric graph") {
  CHECK(random_geometric_graph(1, 0.3, 1).edge_count() == 0);
  CHECK(random_geometric_graph(2, std::sqrt(2.0), 1).edge_count() == 1);
  const Graph a = random_geometric_graph(20, 0.5, 7);
  const Graph b = random_geometric_graph(20, 0.5, 7);
  CHECK(is_connected(a));
  CHECK(a == b);
  CHECK_FALSE(a == random_geometric_graph(20, 0.5, 8));
  CHECK_THROWS_AS(random_geometric_graph(30, 0.01, 3), std::runtime_error);
  CHECK_THROWS_AS(random_geometric_graph(5, 2.0, 3), std::invalid_argument);
}

TEST_CASE("tau-connected schedules") {
  SUBCASE("tau = 1 repeats the base") {
    const Graph base = random_geometric_graph(10, 0.6, 3);
    const auto s = tau_connected_schedule(base, 1, 4);
    for (std::uint64_t k = 0; k < 5; ++k) CHECK(s.graph(k) == base);
  }
  SUBCASE("K3 with tau = 3") {
    const auto s = tau_connected_schedule(complete_graph(3), 3, 9);
    CHECK(s.tau() == 3);
    for (std::uint64_t k = 0; k < 6; ++k) CHECK(s.graph(k).edge_count() == 1);
    for (std::uint64_t k = 0; k + 3 <= 6; ++k) {
      CHECK(union_graph({s.graph(k), s.graph(k + 1), s.graph(k + 2)}) == complete_graph(3));
    }
  }
  SUBCASE("star with tau = 2") {
    const auto s = tau_connected_schedule(star_graph(5), 2, 1);
    for (std::uint64_t k = 0; k < 4; ++k) {
      CHECK(s.graph(k).edge_count() == 2);
      CHECK(is_connected(union_graph({s.graph(k), s.graph(k + 1)})));
    }
  }
  CHECK_THROWS_AS(tau_connected_schedule(Graph(3, {{0, 1}}), 2, 1), std::invalid_argument);
}

TEST_CASE("edge list round trip") {
  const Graph g = random_geometric_graph(15, 0.5, 2);
  std::stringstream ss;
  write_edge_list(ss, g);
  CHECK(read_edge_list(ss) == g);

  std::istringstream bad("3\n0 1\n1 x\n");
  CHECK_THROWS_AS(read_edge_list(bad), std::invalid_argument);
}

TEST_CASE("mixing invariants on random graphs") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RngStream rng(seed, 99);
    const int n = 2 + static_cast<int>(rng.below(30));
    const auto w = metropolis_weights(erdos_renyi_graph(n, 0.2 + 0.5 * rng.uniform(), seed));
    CHECK(validate_mixing(w).empty());
    CHECK((w.weights.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK((w.weights.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.normal();
    CHECK(std::abs((w.weights * x).sum() - x.sum()) <= 1e-12 * (1.0 + x.cwiseAbs().sum()));
  }
}

TEST_CASE("contraction holds for random vectors") {
  const Graph g = random_geometric_graph(20, 0.5, 11);
  const auto w = metropolis_weights(g);
  const auto cert = contraction_certificate(GraphSchedule::static_graph(g), 1);
  CHECK(cert.lambda == doctest::Approx(1.0 - *cert.rho).epsilon(1e-9));
  RngStream rng(11, 0);
  for (int t = 0; t < 100; ++t) {
    Vector x(20);
    for (int i = 0; i < 20; ++i) x(i) = rng.normal();
    const Vector dev = x.array() - x.mean();
    const Vector wx = w.weights * x;
    const Vector wdev = wx.array() - x.mean();
    CHECK(wdev.norm() <= (1.0 - cert.lambda) * dev.norm() + 1e-10);
  }
}
