#include "dstorm/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dstorm/rng.hpp"

namespace dstorm {

Graph::Graph(int n, std::vector<Edge> edges) : n_(n) {
  if (n < 0) throw std::invalid_argument("graph: negative vertex count");
  for (auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw std::invalid_argument("graph: edge (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") out of range for n=" + std::to_string(n));
    }
    if (i == j) throw std::invalid_argument("graph: self-loop at vertex " + std::to_string(i));
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  degrees_.assign(static_cast<std::size_t>(n), 0);
  for (const auto& [i, j] : edges_) {
    ++degrees_[i];
    ++degrees_[j];
  }
}

bool Graph::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

bool is_connected(const Graph& g) {
  if (g.n() <= 1) return true;
  std::vector<std::vector<int>> adj(g.n());
  for (const auto& [i, j] : g.edges()) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<char> seen(g.n(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++visited;
        stack.push_back(w);
      }
    }
  }
  return visited == g.n();
}

Graph union_graph(const std::vector<Graph>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("union_graph: no graphs");
  std::vector<Graph::Edge> edges;
  for (const auto& g : graphs) {
    if (g.n() != graphs.front().n()) throw std::invalid_argument("union_graph: vertex count mismatch");
    edges.insert(edges.end(), g.edges().begin(), g.edges().end());
  }
  return Graph(graphs.front().n(), std::move(edges));
}

Graph complete_graph(int n) {
  std::vector<Graph::Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph(n, std::move(edges));
}

Graph path_graph(int n) {
  std::vector<Graph::Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph(n, std::move(edges));
}

Graph star_graph(int n) {
  std::vector<Graph::Edge> edges;
  for (int i = 1; i < n; ++i) edges.emplace_back(0, i);
  return Graph(n, std::move(edges));
}

Graph erdos_renyi_graph(int n, double p, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<Graph::Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.emplace_back(i, j);
  return Graph(n, std::move(edges));
}

Graph random_geometric_graph(int n, double radius, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_geometric_graph: n must be >= 1");
  if (!(radius > 0.0) || radius > std::sqrt(2.0)) {
    throw std::invalid_argument("random_geometric_graph: radius must lie in (0, sqrt(2)]");
  }
  constexpr int kAttempts = 100;
  const double r2 = radius * radius;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    RngStream rng(seed, static_cast<std::uint64_t>(attempt));
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = rng.uniform();
      ys[i] = rng.uniform();
    }
    std::vector<Graph::Edge> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double dx = xs[i] - xs[j];
        const double dy = ys[i] - ys[j];
        if (dx * dx + dy * dy <= r2) edges.emplace_back(i, j);
      }
    }
    Graph g(n, std::move(edges));
    if (is_connected(g)) return g;
  }
  throw std::runtime_error("random_geometric_graph: no connected graph after 100 attempts; radius " +
                           std::to_string(radius) + " is too small for n=" + std::to_string(n));
}

Graph read_edge_list(std::istream& in) {
  std::string line;
  int line_no = 0;
  int n = -1;
  std::vector<Graph::Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    if (n < 0) {
      if (!(ls >> n) || n < 0) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": expected vertex count");
      }
      continue;
    }
    int i = 0, j = 0;
    if (!(ls >> i)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": malformed edge");
    }
    if (!(ls >> j)) throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": malformed edge");
    edges.emplace_back(i, j);
  }
  if (n < 0) throw std::invalid_argument("edge list: empty input");
  return Graph(n, std::move(edges));
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list " + path);
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.n() << '\n';
  for (const auto& [i, j] : g.edges()) out << i << ' ' << j << '\n';
}

MixingMatrix metropolis_weights(const Graph& g) {
  const int n = g.n();
  if (n < 1) throw std::invalid_argument("metropolis_weights: graph has no vertices");
  Matrix w = Matrix::Zero(n, n);
  const auto& deg = g.degrees();
  for (const auto& [i, j] : g.edges()) {
    const double v = 1.0 / (1.0 + std::max(deg[i], deg[j]));
    w(i, j) = v;
    w(j, i) = v;
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  return {std::move(w), g};
}

std::string MixingViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::RowSum: os << "row " << i << " sums to " << value; break;
    case Kind::ColumnSum: os << "column " << i << " sums to " << value; break;
    case Kind::Negative: os << "negative entry W[" << i << "][" << j << "] = " << value; break;
    case Kind::Sparsity: os << "nonzero W[" << i << "][" << j << "] = " << value << " outside the graph"; break;
    case Kind::Asymmetry: os << "W[" << i << "][" << j << "] - W[" << j << "][" << i << "] = " << value; break;
  }
  return os.str();
}

std::vector<MixingViolation> validate_mixing(const MixingMatrix& w, double tol) {
  const Matrix& m = w.weights;
  const int n = w.graph.n();
  if (m.rows() != n || m.cols() != n) {
    throw std::invalid_argument("validate_mixing: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " but graph has " + std::to_string(n) +
                                " vertices");
  }
  using Kind = MixingViolation::Kind;
  std::vector<MixingViolation> report;
  for (int i = 0; i < n; ++i) {
    const double rs = m.row(i).sum();
    if (std::abs(rs - 1.0) > tol) report.push_back({Kind::RowSum, i, -1, rs});
  }
  for (int j = 0; j < n; ++j) {
    const double cs = m.col(j).sum();
    if (std::abs(cs - 1.0) > tol) report.push_back({Kind::ColumnSum, j, -1, cs});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = m(i, j);
      if (v < 0.0) report.push_back({Kind::Negative, i, j, v});
      if (i != j && v != 0.0 && !w.graph.has_edge(i, j)) report.push_back({Kind::Sparsity, i, j, v});
      if (j > i && std::abs(v - m(j, i)) > tol) report.push_back({Kind::Asymmetry, i, j, v - m(j, i)});
    }
  }
  return report;
}

std::vector<double> deflated_eigenvalues(const Matrix& w) {
  const Eigen::Index n = w.rows();
  if (w.cols() != n) throw std::invalid_argument("deflated_eigenvalues: matrix is not square");
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > kStochasticTol) {
    throw std::invalid_argument("deflated_eigenvalues: matrix is not symmetric");
  }
  if (n <= 1) return {};
  // Householder reflector mapping e_0 onto 1/sqrt(n); its remaining columns
  // form an orthonormal basis of the complement of the all-ones vector.
  Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  v(0) -= 1.0;
  Matrix h = Matrix::Identity(n, n) - 2.0 * v * v.transpose() / v.squaredNorm();
  const Matrix basis = h.rightCols(n - 1);
  const Matrix reduced = basis.transpose() * w * basis;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (reduced + reduced.transpose()),
                                               Eigen::EigenvaluesOnly);
  const Vector& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double second_eigenvalue(const MixingMatrix& w) {
  const auto ev = deflated_eigenvalues(w.weights);
  double rho = 0.0;
  for (double e : ev) rho = std::max(rho, std::abs(e));
  return std::min(rho, 1.0);
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Static: return "static";
    case ScheduleKind::ConnectedSequence: return "sequence-of-connected";
    case ScheduleKind::TauConnected: return "tau-connected";
  }
  return "unknown";
}

GraphSchedule GraphSchedule::static_graph(Graph g) {
  return periodic({std::move(g)}, ScheduleKind::Static, 1);
}

GraphSchedule GraphSchedule::periodic(std::vector<Graph> slots, ScheduleKind kind, int tau) {
  if (slots.empty()) throw std::invalid_argument("GraphSchedule: no slots");
  if (tau < 1) throw std::invalid_argument("GraphSchedule: tau must be >= 1");
  GraphSchedule s;
  s.n_ = slots.front().n();
  s.kind_ = kind;
  s.tau_ = tau;
  auto mats = std::make_shared<std::vector<std::shared_ptr<const MixingMatrix>>>();
  for (auto& g : slots) {
    if (g.n() != s.n_) throw std::invalid_argument("GraphSchedule: slot vertex counts differ");
    mats->push_back(std::make_shared<const MixingMatrix>(metropolis_weights(g)));
  }
  s.slots_ = std::move(mats);
  return s;
}

GraphSchedule::GraphSchedule(int n, ScheduleKind kind, int tau, Generator generator)
    : n_(n), kind_(kind), tau_(tau), generator_(std::move(generator)) {
  if (tau < 1) throw std::invalid_argument("GraphSchedule: tau must be >= 1");
  if (!generator_) throw std::invalid_argument("GraphSchedule: empty generator");
}

Graph GraphSchedule::graph(std::uint64_t slot) const {
  if (slots_) return (*slots_)[slot % slots_->size()]->graph;
  Graph g = generator_(slot);
  if (g.n() != n_) throw std::runtime_error("GraphSchedule: generator changed the vertex count");
  return g;
}

std::shared_ptr<const MixingMatrix> GraphSchedule::mixing(std::uint64_t slot) const {
  if (slots_) return (*slots_)[slot % slots_->size()];
  return std::make_shared<const MixingMatrix>(metropolis_weights(graph(slot)));
}

GraphSchedule tau_connected_schedule(const Graph& base, int tau, std::uint64_t seed) {
  if (tau < 1) throw std::invalid_argument("tau_connected_schedule: tau must be >= 1");
  if (!is_connected(base)) throw std::invalid_argument("tau_connected_schedule: base graph is disconnected");
  std::vector<Graph::Edge> edges = base.edges();
  RngStream rng(seed, 0);
  for (std::size_t i = edges.size(); i > 1; --i) {
    std::swap(edges[i - 1], edges[rng.below(i)]);
  }
  std::vector<std::vector<Graph::Edge>> groups(static_cast<std::size_t>(tau));
  for (std::size_t e = 0; e < edges.size(); ++e) groups[e % tau].push_back(edges[e]);
  std::vector<Graph> slots;
  slots.reserve(groups.size());
  for (auto& grp : groups) slots.emplace_back(base.n(), std::move(grp));
  return GraphSchedule::periodic(std::move(slots), ScheduleKind::TauConnected, tau);
}

ContractionCertificate contraction_certificate(const GraphSchedule& schedule, int tau,
                                               std::optional<long> horizon) {
  if (tau < 1) throw std::invalid_argument("contraction_certificate: tau must be >= 1");
  const long h = horizon.value_or(10L * tau);
  if (h < tau) throw std::invalid_argument("contraction_certificate: horizon must be >= tau");
  const int n = schedule.n();
  const Matrix avg = Matrix::Constant(n, n, 1.0 / n);

  double worst = 0.0;
  for (long k = tau - 1; k <= h; ++k) {
    Matrix prod = Matrix::Identity(n, n);
    for (long s = k - tau + 1; s <= k; ++s) prod = schedule.mixing(static_cast<std::uint64_t>(s))->weights * prod;
    const Matrix deflated = prod - avg;
    const double norm = n > 1 ? Eigen::JacobiSVD<Matrix>(deflated).singularValues()(0) : 0.0;
    worst = std::max(worst, norm);
  }

  ContractionCertificate cert;
  cert.tau = tau;
  cert.lambda = 1.0 - worst;
  if (schedule.kind() == ScheduleKind::Static) {
    const double rho = second_eigenvalue(*schedule.mixing(0));
    cert.rho = rho;
    if (rho < 1.0) cert.chi = 1.0 / (1.0 - rho);
  }
  if (!(cert.lambda > 0.0)) {
    throw NonContractingError("schedule does not contract within the horizon (lambda = " +
                              std::to_string(cert.lambda) + "); the tau-window union graph is likely disconnected");
  }
  return cert;
}

}  // namespace dstorm
