#include "dstorm/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dstorm/rng.hpp"

namespace dstorm {

namespace {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

// Orthonormal columns from the thin QR of a Gaussian matrix.
Matrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rows, cols, rng));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

class QuadraticOracle final : public NodeOracle {
 public:
  QuadraticOracle(QuadraticBlock block, double mu, double L)
      : block_(std::move(block)), mu_(mu), L_(L) {}

  int dim() const override { return static_cast<int>(block_.B.cols()); }
  double value(const Vector& x) const override { return 0.5 * (block_.B * x - block_.c).squaredNorm(); }
  Vector grad(const Vector& x) const override { return block_.B.transpose() * (block_.B * x - block_.c); }
  Vector sample_grad(const Vector& x, RngStream& stream) const override {
    Vector g = grad(x);
    if (block_.sigma > 0.0) {
      const double sd = block_.sigma / std::sqrt(static_cast<double>(g.size()));
      for (Eigen::Index j = 0; j < g.size(); ++j) g(j) += sd * stream.normal();
    }
    return g;
  }
  double mu() const override { return mu_; }
  double smoothness() const override { return L_; }
  double sigma() const override { return block_.sigma; }

 private:
  QuadraticBlock block_;
  double mu_, L_;
};

}  // namespace

QuadraticInstance QuadraticInstance::from_blocks(std::vector<QuadraticBlock> blocks) {
  if (blocks.empty()) throw std::invalid_argument("quadratic instance: no blocks");
  const Eigen::Index d = blocks.front().B.cols();
  QuadraticInstance inst;
  Matrix H = Matrix::Zero(d, d);
  Vector b = Vector::Zero(d);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& blk = blocks[i];
    if (blk.B.cols() != d || blk.c.size() != blk.B.rows()) {
      throw std::invalid_argument("quadratic instance: block " + std::to_string(i) + " has inconsistent shape");
    }
    if (blk.sigma < 0.0) throw std::invalid_argument("quadratic instance: negative sigma");
    const Matrix gram = blk.B.transpose() * blk.B;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(d - 1);
    if (!(lo > 1e-12 * std::max(1.0, hi))) {
      throw std::invalid_argument("quadratic instance: block " + std::to_string(i) + " is rank deficient");
    }
    inst.mu_.push_back(lo);
    inst.L_.push_back(hi);
    H += gram;
    b += blk.B.transpose() * blk.c;
  }
  inst.x_star_ = H.ldlt().solve(b);
  if (!inst.x_star_.allFinite()) throw std::logic_error("quadratic instance: singular normal equations");
  double f = 0.0;
  for (const auto& blk : blocks) f += 0.5 * (blk.B * inst.x_star_ - blk.c).squaredNorm();
  inst.f_star_ = f / static_cast<double>(blocks.size());
  inst.blocks_ = std::move(blocks);
  return inst;
}

Vector QuadraticInstance::local_minimizer(int i) const {
  const auto& blk = block(i);
  return (blk.B.transpose() * blk.B).ldlt().solve(blk.B.transpose() * blk.c);
}

QuadraticInstance gen_quadratic(int n, int d, double kappa_target, std::uint64_t seed,
                                const QuadraticOptions& opt) {
  if (n < 1 || d < 1) throw std::invalid_argument("gen_quadratic: n and d must be >= 1");
  if (!(kappa_target >= 1.0)) throw std::invalid_argument("gen_quadratic: kappa_target must be >= 1");
  if (d == 1 && kappa_target != 1.0) {
    throw std::invalid_argument("gen_quadratic: a 1-dimensional quadratic has condition number 1");
  }
  RngStream rng(seed, 0xC0FFEE);
  const int m = d + std::max(0, opt.extra_rows);
  Vector center(d);
  for (int j = 0; j < d; ++j) center(j) = rng.normal();

  std::vector<QuadraticBlock> blocks;
  for (int i = 0; i < n; ++i) {
    RngStream node_rng(seed, static_cast<std::uint64_t>(i));
    const double scale = 1.0 + opt.scale_spread * node_rng.uniform();
    // Eigenvalues of B^T B run from scale to scale * kappa, extremes included.
    Vector sv(d);
    for (int j = 0; j < d; ++j) {
      const double t = (j == 0) ? 0.0 : (j == d - 1) ? 1.0 : node_rng.uniform();
      sv(j) = std::sqrt(scale * std::pow(kappa_target, t));
    }
    const Matrix U = random_orthonormal(m, d, node_rng);
    const Matrix V = random_orthonormal(d, d, node_rng);
    QuadraticBlock blk;
    blk.B = U * sv.asDiagonal() * V.transpose();
    Vector w = center;
    for (int j = 0; j < d; ++j) w(j) += opt.heterogeneity * node_rng.normal();
    blk.c = blk.B * w;
    for (int r = 0; r < m; ++r) blk.c(r) += 0.1 * node_rng.normal();
    blk.sigma = opt.sigma;
    blocks.push_back(std::move(blk));
  }
  return QuadraticInstance::from_blocks(std::move(blocks));
}

OraclePtr quadratic_oracle(const QuadraticInstance& inst, int i) {
  if (i < 0 || i >= inst.n()) throw std::out_of_range("quadratic_oracle: node index out of range");
  return std::make_shared<QuadraticOracle>(inst.block(i), inst.mu(i), inst.smoothness(i));
}

Problem quadratic_problem(const QuadraticInstance& inst, std::optional<Vector> x0) {
  Problem p;
  p.name = "quadratic";
  p.x0 = x0.value_or(Vector::Zero(inst.dim()));
  if (p.x0.size() != inst.dim()) throw std::invalid_argument("quadratic_problem: x0 has the wrong dimension");
  double m_xi = 0.0;
  for (int i = 0; i < inst.n(); ++i) {
    auto o = quadratic_oracle(inst, i);
    p.constants.mu.push_back(inst.mu(i));
    p.constants.L.push_back(inst.smoothness(i));
    p.constants.sigma.push_back(inst.block(i).sigma);
    m_xi = std::max(m_xi, o->grad(inst.x_star()).norm() + 3.0 * inst.block(i).sigma);
    p.oracles.push_back(std::move(o));
  }
  p.constants.L_xi = p.constants.L_l();
  p.constants.M_xi = m_xi;
  p.x_star = inst.x_star();
  p.f_star = inst.f_star();
  return p;
}

// ---------------------------------------------------------------------------

double SparseRow::dot(const Vector& x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < index.size(); ++k) s += value[k] * x(index[k]);
  return s;
}

double SparseRow::squared_norm() const {
  double s = 0.0;
  for (double v : value) s += v * v;
  return s;
}

void SparseRow::axpy(double scale, Vector& out) const {
  for (std::size_t k = 0; k < index.size(); ++k) out(index[k]) += scale * value[k];
}

namespace {

[[noreturn]] void parse_fail(const std::string& source, int line, const std::string& what) {
  throw std::invalid_argument(source + ":" + std::to_string(line) + ": " + what);
}

template <class T>
bool parse_number(std::string_view tok, T& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const std::string& source) {
  Dataset data;
  std::string line;
  int line_no = 0;
  bool any_zero = false, any_minus = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    SparseRow row;
    if (!parse_number(tok, row.label)) parse_fail(source, line_no, "bad label '" + tok + "'");
    if (row.label == 0.0) {
      any_zero = true;
    } else if (row.label == -1.0) {
      any_minus = true;
    } else if (row.label != 1.0) {
      parse_fail(source, line_no, "label must be one of -1, 0, +1");
    }
    int prev = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) parse_fail(source, line_no, "expected idx:val, got '" + tok + "'");
      int idx = 0;
      double val = 0.0;
      if (!parse_number(std::string_view(tok).substr(0, colon), idx) ||
          !parse_number(std::string_view(tok).substr(colon + 1), val)) {
        parse_fail(source, line_no, "malformed feature '" + tok + "'");
      }
      if (idx < 1) parse_fail(source, line_no, "feature indices are 1-based");
      if (idx <= prev) parse_fail(source, line_no, "feature indices must be strictly ascending");
      if (!std::isfinite(val)) parse_fail(source, line_no, "non-finite feature value");
      prev = idx;
      row.index.push_back(idx - 1);
      row.value.push_back(val);
    }
    data.dim = std::max(data.dim, prev);
    data.rows.push_back(std::move(row));
  }
  if (data.rows.empty()) throw std::invalid_argument(source + ": no data rows");
  if (any_zero && any_minus) throw std::invalid_argument(source + ": labels mix 0 and -1");
  if (any_zero) {
    for (auto& r : data.rows)
      if (r.label == 0.0) r.label = -1.0;
  }
  return data;
}

Dataset parse_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path);
  return parse_libsvm(in, path);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  for (const auto& r : data.rows) {
    out << (r.label > 0 ? "+1" : "-1");
    for (std::size_t k = 0; k < r.index.size(); ++k) out << ' ' << r.index[k] + 1 << ':' << r.value[k];
    out << '\n';
  }
}

std::vector<Dataset> partition(const Dataset& data, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("partition: n must be >= 1");
  if (data.rows.empty()) throw std::invalid_argument("partition: empty dataset");
  if (static_cast<std::size_t>(n) > data.size()) {
    throw std::invalid_argument("partition: " + std::to_string(n) + " nodes but only " +
                                std::to_string(data.size()) + " rows");
  }
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  RngStream rng(seed, 0);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

  std::vector<Dataset> shards(static_cast<std::size_t>(n));
  const std::size_t base = data.size() / n;
  const std::size_t extra = data.size() % n;
  std::size_t pos = 0;
  for (int s = 0; s < n; ++s) {
    const std::size_t len = base + (static_cast<std::size_t>(s) < extra ? 1 : 0);
    shards[s].dim = data.dim;
    for (std::size_t k = 0; k < len; ++k) shards[s].rows.push_back(data.rows[perm[pos++]]);
  }
  return shards;
}

Dataset synthetic_onehot_dataset(int rows, int dim, int groups, std::uint64_t seed) {
  if (rows < 1 || groups < 1 || dim < groups) throw std::invalid_argument("synthetic_onehot_dataset: bad shape");
  RngStream rng(seed, 0xA9A);
  // Group g covers features [start[g], start[g+1]); earlier groups are larger.
  std::vector<int> start{0};
  for (int g = 0; g < groups; ++g) {
    const int remaining = dim - start.back();
    start.push_back(start.back() + (g + 1 == groups ? remaining : std::max(1, remaining / (groups - g))));
  }
  std::vector<double> w(dim);
  for (double& v : w) v = 1.2 * rng.normal();
  const double bias = -1.0;

  Dataset data;
  data.dim = dim;
  for (int r = 0; r < rows; ++r) {
    SparseRow row;
    double logit = bias;
    for (int g = 0; g < groups; ++g) {
      const int size = start[g + 1] - start[g];
      // Skewed category frequencies: the first categories are common.
      int pick = 0;
      while (pick + 1 < size && rng.uniform() < 0.55) ++pick;
      const int idx = start[g] + pick;
      row.index.push_back(idx);
      row.value.push_back(1.0);
      logit += w[idx];
    }
    const double p = 1.0 / (1.0 + std::exp(-logit));
    row.label = rng.uniform() < p ? 1.0 : -1.0;
    data.rows.push_back(std::move(row));
  }
  return data;
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

class LogisticOracle final : public NodeOracle {
 public:
  LogisticOracle(Dataset shard, double theta, double L, double sigma)
      : shard_(std::move(shard)), theta_(theta), L_(L), sigma_(sigma) {}

  int dim() const override { return shard_.dim; }

  double value(const Vector& x) const override {
    double s = 0.0;
    for (const auto& r : shard_.rows) s += softplus(-r.label * r.dot(x));
    return s / static_cast<double>(shard_.size()) + 0.5 * theta_ * x.squaredNorm();
  }

  Vector grad(const Vector& x) const override {
    Vector g = Vector::Zero(x.size());
    for (const auto& r : shard_.rows) r.axpy(-r.label * sigmoid(-r.label * r.dot(x)), g);
    g /= static_cast<double>(shard_.size());
    g += theta_ * x;
    return g;
  }

  Vector sample_grad(const Vector& x, RngStream& stream) const override {
    return row_grad(shard_.rows[stream.below(shard_.size())], x);
  }

  Vector row_grad(const SparseRow& r, const Vector& x) const {
    Vector g = theta_ * x;
    r.axpy(-r.label * sigmoid(-r.label * r.dot(x)), g);
    return g;
  }

  double mu() const override { return theta_; }
  double smoothness() const override { return L_; }
  double sigma() const override { return sigma_; }
  const Dataset& shard() const { return shard_; }

 private:
  Dataset shard_;
  double theta_, L_, sigma_;
};

}  // namespace

LogisticInstance::LogisticInstance(std::vector<Dataset> shards, double theta)
    : shards_(std::move(shards)), theta_(theta), dim_(0) {
  if (shards_.empty()) throw std::invalid_argument("logistic instance: no shards");
  if (!(theta > 0.0)) throw std::invalid_argument("logistic instance: theta must be positive");
  for (const auto& s : shards_) dim_ = std::max(dim_, s.dim);
  for (std::size_t i = 0; i < shards_.size(); ++i) {
    auto& s = shards_[i];
    if (s.rows.empty()) throw std::invalid_argument("logistic instance: shard " + std::to_string(i) + " is empty");
    s.dim = dim_;
    double max_sq = 0.0;
    for (const auto& r : s.rows) {
      if (r.label != 1.0 && r.label != -1.0) throw std::invalid_argument("logistic instance: labels must be +-1");
      max_sq = std::max(max_sq, r.squared_norm());
    }
    L_.push_back(max_sq / 4.0 + theta_);
    L_xi_ = std::max(L_xi_, L_.back());
  }
}

OraclePtr logistic_oracle(const LogisticInstance& inst, int i, double sigma) {
  if (i < 0 || i >= inst.n()) throw std::out_of_range("logistic_oracle: node index out of range");
  return std::make_shared<LogisticOracle>(inst.shard(i), inst.theta(), inst.smoothness(i), sigma);
}

ReferenceSolution solve_reference(const std::vector<OraclePtr>& oracles, double L, double mu, const Vector& x0,
                                  double tol, int max_iterations) {
  // Nesterov's constant-momentum scheme with a gradient-based restart.
  const double q = std::sqrt(mu / L);
  const double beta = (1.0 - q) / (1.0 + q);
  Vector x = x0, x_prev = x0, y = x0;
  ReferenceSolution sol;
  for (int k = 0; k < max_iterations; ++k) {
    const Vector gy = global_gradient(oracles, y);
    sol.iterations = k + 1;
    if (gy.norm() <= tol) {
      x = y;
      break;
    }
    x_prev = x;
    x = y - gy / L;
    if (gy.dot(x - x_prev) > 0.0) {
      y = x;
    } else {
      y = x + beta * (x - x_prev);
    }
  }
  sol.x_star = x;
  sol.f_star = global_value(oracles, x);
  sol.grad_norm = global_gradient(oracles, x).norm();
  return sol;
}

Problem logistic_problem(const LogisticInstance& inst, std::optional<Vector> x0,
                         std::optional<std::vector<double>> sigma) {
  Problem p;
  p.name = "logistic";
  p.x0 = x0.value_or(Vector::Zero(inst.dim()));
  if (p.x0.size() != inst.dim()) throw std::invalid_argument("logistic_problem: x0 has the wrong dimension");
  if (sigma && sigma->size() != static_cast<std::size_t>(inst.n())) {
    throw std::invalid_argument("logistic_problem: need one sigma per node");
  }
  for (int i = 0; i < inst.n(); ++i) {
    double s = 0.0;
    if (sigma) {
      s = (*sigma)[i];
    } else {
      // Population variance of the per-row gradient over the shard at x0.
      const LogisticOracle probe(inst.shard(i), inst.theta(), inst.smoothness(i), 0.0);
      const Vector mean = probe.grad(p.x0);
      double acc = 0.0;
      for (const auto& r : inst.shard(i).rows) acc += (probe.row_grad(r, p.x0) - mean).squaredNorm();
      s = std::sqrt(acc / static_cast<double>(inst.shard(i).size()));
    }
    p.oracles.push_back(logistic_oracle(inst, i, s));
    p.constants.mu.push_back(inst.theta());
    p.constants.L.push_back(inst.smoothness(i));
    p.constants.sigma.push_back(s);
  }
  p.constants.L_xi = inst.L_xi();

  const auto ref = solve_reference(p.oracles, p.constants.L_g(), inst.theta(), p.x0);
  p.x_star = ref.x_star;
  p.f_star = ref.f_star;
  double m_xi = 0.0;
  for (int i = 0; i < inst.n(); ++i) {
    const auto& o = static_cast<const LogisticOracle&>(*p.oracles[i]);
    for (const auto& r : inst.shard(i).rows) m_xi = std::max(m_xi, o.row_grad(r, ref.x_star).norm());
  }
  p.constants.M_xi = m_xi;
  return p;
}

}  // namespace dstorm
