#include "dstorm/decentralized.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace dstorm {

namespace {

long ceil_to_long(double v, const char* what) {
  if (!std::isfinite(v) || v > static_cast<double>(std::numeric_limits<long>::max() / 4)) {
    throw PlanError(std::string("plan: ") + what + " is not representable");
  }
  return static_cast<long>(std::ceil(v));
}

}  // namespace

RunPlan plan_run(double epsilon, const ProblemConstants& c, const ContractionCertificate& cert, double R_est,
                 ConsensusMethod method) {
  if (!(epsilon > 0.0)) throw PlanError("plan: epsilon must be positive");
  if (!(R_est > 0.0)) throw PlanError("plan: R_est must be positive");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw PlanError(std::string("plan: ") + e.what());
  }
  if (!(cert.lambda > 0.0)) throw NonContractingError("plan: schedule is not contracting (lambda <= 0)");
  if (cert.tau < 1) throw PlanError("plan: tau must be >= 1");

  const double n = c.n();
  const double mu_g = c.mu_g(), L_g = c.L_g(), L_l = c.L_l();
  const double s = std::sqrt(L_g * mu_g);

  RunPlan p;
  p.epsilon = epsilon;
  p.R_est = R_est;
  p.delta_prime = (n * epsilon / 32.0) * std::pow(mu_g, 1.5) / (std::sqrt(L_g) * L_l * L_l);
  p.r = static_cast<int>(std::max(1L, ceil_to_long(2.0 * c.sigma_g_sq() / (epsilon * s), "r")));
  p.delta = delta_from_delta_prime(p.delta_prime, c);

  const double r = p.r;
  const double inner = R_est * R_est + (2.0 / s) * (c.sigma_g_sq() / (4.0 * n * L_g * r * r) + p.delta);
  const double sqrt_D = (2.0 * L_l / s + 1.0) * std::sqrt(p.delta_prime) + 2.0 * n * c.M_xi / s +
                        (2.0 * L_l / mu_g) * std::sqrt(n) * std::sqrt(inner);
  p.D = sqrt_D * sqrt_D;
  if (!(p.D > p.delta_prime)) {
    throw PlanError("plan: D <= delta' so ln(D/delta') <= 0; increase R_est or epsilon");
  }
  const double log_ratio = std::log(p.D / p.delta_prime);

  p.accelerated_consensus = cert.is_static() && method == ConsensusMethod::Chebyshev;
  if (p.accelerated_consensus) {
    p.T = std::max(1L, ceil_to_long(std::sqrt(*cert.chi) * log_ratio, "T"));
  } else {
    p.T = std::max(1L, ceil_to_long(cert.tau / (2.0 * cert.lambda) * log_ratio, "T"));
  }

  const double N = 3.0 * std::sqrt(L_g / mu_g) * std::log(4.0 * L_g * R_est * R_est / epsilon);
  p.N = std::max(1L, ceil_to_long(N, "N"));
  p.N_orcl = p.N * p.r;
  p.N_comm = p.N * p.T;
  return p;
}

RunPlan with_overrides(RunPlan p, std::optional<int> r, std::optional<long> T, std::optional<long> N) {
  if (r) {
    if (*r < 1) throw PlanError("plan override: r must be >= 1");
    p.r = *r;
  }
  if (T) {
    if (*T < 1) throw PlanError("plan override: T must be >= 1");
    p.T = *T;
  }
  if (N) {
    if (*N < 0) throw PlanError("plan override: N must be >= 0");
    p.N = *N;
  }
  p.N_orcl = p.N * p.r;
  p.N_comm = p.N * p.T;
  return p;
}

DecentralizedAgd::DecentralizedAgd(const Problem& problem, int batch, long consensus_rounds,
                                   Communicator communicator, std::uint64_t seed)
    : problem_(problem),
      batch_(batch),
      rounds_(consensus_rounds),
      comm_(std::move(communicator)),
      coeffs_(2.0 * problem.constants.L_g(), problem.constants.mu_g() / 2.0, 1) {
  if (batch < 1) throw std::invalid_argument("DecentralizedAgd: batch must be >= 1");
  if (consensus_rounds < 1) throw std::invalid_argument("DecentralizedAgd: T must be >= 1");
  if (comm_.schedule().n() != problem.n()) {
    throw std::invalid_argument("DecentralizedAgd: schedule has " + std::to_string(comm_.schedule().n()) +
                                " nodes, problem has " + std::to_string(problem.n()));
  }
  for (int i = 0; i < problem.n(); ++i) streams_.emplace_back(seed, static_cast<std::uint64_t>(i));
  state_.X = Stack::Ones(problem.n(), 1) * problem.x0.transpose();
  state_.U = state_.X;
  state_.slot = comm_.slot();
}

StepStats DecentralizedAgd::step() {
  const int k = state_.k;
  coeffs_.extend_to(k + 1);
  const double a = coeffs_.alpha(k + 1);
  const double A = coeffs_.A(k);
  const double A_next = coeffs_.A(k + 1);
  const double mu = coeffs_.mu();

  StepStats st;
  const Stack Y = detail::extrapolate(a, state_.U, A, state_.X, A_next);
  const Stack G = stacked_batched_gradient(problem_.oracles, Y, batch_, streams_);
  if (!G.allFinite()) throw NumericalError(k, "non-finite stochastic gradient stack");
  const Stack V = detail::prox_update(a, A, A_next, mu, state_.U, Y, G);
  ConsensusReport rep = comm_.consensus(V, rounds_);
  Stack X = detail::extrapolate(a, rep.x, A, state_.X, A_next);
  if (!X.allFinite() || !rep.x.allFinite()) throw NumericalError(k, "non-finite iterate stack");

  st.y_sq = consensus_distance_sq(Y);
  st.v_sq = rep.pre_err;
  st.u_sq = rep.post_err;
  st.x_sq = consensus_distance_sq(X);
  state_.U = std::move(rep.x);
  state_.X = std::move(X);
  state_.k = k + 1;
  state_.slot = comm_.slot();
  return st;
}

bool MetricRow::same_values(const MetricRow& o) const {
  return round == o.round && comm_total == o.comm_total && oracle_calls_per_node == o.oracle_calls_per_node &&
         f_gap == o.f_gap && consensus_sq == o.consensus_sq && u_consensus_sq == o.u_consensus_sq;
}

bool RunRecord::same_values(const RunRecord& o) const {
  if (algorithm != o.algorithm || rows.size() != o.rows.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!rows[i].same_values(o.rows[i])) return false;
  return x_mean.size() == o.x_mean.size() && x_mean == o.x_mean;
}

namespace {

using Clock = std::chrono::steady_clock;

std::optional<double> gap_at(const Problem& p, const Vector& x) {
  if (!p.f_star) return std::nullopt;
  return global_value(p.oracles, x) - *p.f_star;
}

MetricRow make_row(const Problem& p, long k, long comm, long oracle, const Stack& X, const Stack& U,
                   const RunOptions& opt, Clock::time_point t0) {
  MetricRow row;
  row.round = k;
  row.comm_total = comm;
  row.oracle_calls_per_node = oracle;
  row.f_gap = gap_at(p, row_mean(X));
  row.consensus_sq = consensus_distance_sq(X);
  row.u_consensus_sq = consensus_distance_sq(U);
  if (opt.wallclock) row.wallclock_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  return row;
}

bool reached(const MetricRow& row, const RunOptions& opt) {
  return opt.stop_gap && row.f_gap && *row.f_gap <= *opt.stop_gap;
}

}  // namespace

RunRecord run(const RunPlan& plan, const Problem& problem, Communicator communicator, std::uint64_t seed,
              const RunOptions& opt) {
  if (opt.record_every < 1) throw std::invalid_argument("run: record_every must be >= 1");
  if (problem.x0.size() != problem.dim() || problem.oracles.empty()) throw std::invalid_argument("run: empty problem");
  for (const auto& o : problem.oracles) {
    if (o->dim() != problem.dim()) throw std::invalid_argument("run: oracle dimension differs from x0");
  }
  const auto t0 = Clock::now();
  DecentralizedAgd method(problem, plan.r, plan.T, std::move(communicator), seed);
  RunRecord rec;
  rec.algorithm = "dsagd";
  const auto& s = method.state();
  rec.rows.push_back(make_row(problem, 0, 0, 0, s.X, s.U, opt, t0));
  const long comm0 = static_cast<long>(method.communicator().slot());
  if (!reached(rec.rows.back(), opt)) {
    for (long k = 1; k <= plan.N; ++k) {
      try {
        method.step();
      } catch (const std::exception& e) {
        rec.x_mean = method.mean_iterate();
        throw RunError(std::string("dsagd: ") + e.what(), std::move(rec));
      }
      if (k % opt.record_every == 0 || k == plan.N || opt.stop_gap) {
        const long comm = static_cast<long>(method.communicator().slot()) - comm0;
        rec.rows.push_back(make_row(problem, k, comm, k * plan.r, s.X, s.U, opt, t0));
        if (reached(rec.rows.back(), opt)) break;
      }
    }
  }
  rec.x_mean = method.mean_iterate();
  return rec;
}

double dsgd_step_size(long k, const ProblemConstants& c) {
  const double L_l = c.L_l(), mu_g = c.mu_g();
  const double k0 = 2.0 * L_l / mu_g;
  return std::min(1.0 / L_l, 2.0 / (mu_g * (static_cast<double>(k) + k0)));
}

Stack dsgd_step(const Stack& x, const MixingMatrix& w, double eta, std::span<const OraclePtr> oracles, int r,
                std::span<RngStream> streams) {
  if (!(eta > 0.0)) throw std::invalid_argument("dsgd_step: eta must be positive");
  const Stack g = stacked_batched_gradient(oracles, x, r, streams);
  Stack next = mix_round(x - eta * g, w);
  if (!next.allFinite()) throw NumericalError(0, "dsgd: non-finite iterate stack");
  return next;
}

RunRecord run_dsgd(const Problem& problem, int r, long iterations, Communicator comm, std::uint64_t seed,
                   const RunOptions& opt) {
  if (opt.record_every < 1) throw std::invalid_argument("run_dsgd: record_every must be >= 1");
  if (r < 1) throw std::invalid_argument("run_dsgd: r must be >= 1");
  if (comm.schedule().n() != problem.n()) throw std::invalid_argument("run_dsgd: schedule and problem differ in n");
  const auto t0 = Clock::now();
  std::vector<RngStream> streams;
  for (int i = 0; i < problem.n(); ++i) streams.emplace_back(seed, static_cast<std::uint64_t>(i));
  Stack X = Stack::Ones(problem.n(), 1) * problem.x0.transpose();

  RunRecord rec;
  rec.algorithm = "dsgd";
  rec.rows.push_back(make_row(problem, 0, 0, 0, X, X, opt, t0));
  if (!reached(rec.rows.back(), opt)) {
    for (long k = 1; k <= iterations; ++k) {
      try {
        // Same update as dsgd_step, with the slot taken from the communicator.
        const double eta = dsgd_step_size(k - 1, problem.constants);
        const Stack g = stacked_batched_gradient(problem.oracles, X, r, streams);
        X = comm.mix(X - eta * g);
        if (!X.allFinite()) throw NumericalError(static_cast<int>(k), "non-finite iterate stack");
      } catch (const std::exception& e) {
        rec.x_mean = row_mean(X);
        throw RunError(std::string("dsgd: iteration ") + std::to_string(k) + ": " + e.what(), std::move(rec));
      }
      if (k % opt.record_every == 0 || k == iterations || opt.stop_gap) {
        rec.rows.push_back(make_row(problem, k, k, k * r, X, X, opt, t0));
        if (reached(rec.rows.back(), opt)) break;
      }
    }
  }
  rec.x_mean = row_mean(X);
  return rec;
}

}  // namespace dstorm
