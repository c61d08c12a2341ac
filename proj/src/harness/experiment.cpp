#include "dstorm/harness/experiment.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "dstorm/harness/csv.hpp"
#include "dstorm/problems.hpp"

namespace dstorm::harness {

namespace {

std::optional<Vector> config_x0(const ProblemConfig& c, int dim) {
  if (!c.x0) return std::nullopt;
  if (static_cast<int>(c.x0->size()) != dim) {
    throw ConfigError("problem.x0 has " + std::to_string(c.x0->size()) + " entries, expected " + std::to_string(dim));
  }
  return Eigen::Map<const Vector>(c.x0->data(), dim);
}

}  // namespace

Problem build_problem(const ProblemConfig& c) {
  if (c.type == "quadratic") {
    QuadraticOptions opt;
    opt.sigma = c.sigma;
    opt.extra_rows = c.extra_rows;
    opt.scale_spread = c.scale_spread;
    opt.heterogeneity = c.heterogeneity;
    const auto inst = gen_quadratic(c.n, c.d, c.kappa, c.seed, opt);
    return quadratic_problem(inst, config_x0(c, c.d));
  }
  if (c.type == "logistic") {
    Dataset data = c.data_path.empty()
                       ? synthetic_onehot_dataset(c.synthetic_rows, c.synthetic_dim, c.synthetic_groups, c.seed)
                       : parse_libsvm(resolve_data_path(c.data_path));
    if (c.max_rows && data.rows.size() > static_cast<std::size_t>(*c.max_rows)) data.rows.resize(*c.max_rows);
    if (static_cast<std::size_t>(c.n) > data.size()) {
      throw ConfigError("problem.n = " + std::to_string(c.n) + " exceeds the " + std::to_string(data.size()) +
                        " available rows");
    }
    LogisticInstance inst(partition(data, c.n, c.partition_seed), c.theta);
    return logistic_problem(inst, config_x0(c, inst.dim()));
  }
  throw ConfigError("problem type '" + c.type + "' has no oracles and can only be planned");
}

ProblemConstants problem_constants(const ProblemConfig& c, const Problem* built) {
  if (c.constants) return *c.constants;
  if (!built) throw ConfigError("problem constants unavailable");
  return built->constants;
}

GraphSchedule build_schedule(const GraphConfig& g, int n) {
  if (g.n && *g.n != n) throw ConfigError("graph.n differs from problem.n");
  try {
    if (g.type == "static-geometric") return GraphSchedule::static_graph(random_geometric_graph(n, g.radius, g.seed));
    if (g.type == "tau-connected") {
      return tau_connected_schedule(random_geometric_graph(n, g.radius, g.seed), g.tau, g.seed);
    }
    if (g.type == "complete") return GraphSchedule::static_graph(complete_graph(n));
    if (g.type == "path") return GraphSchedule::static_graph(path_graph(n));
    if (g.type == "edge-list") {
      const std::string path = resolve_data_path(g.path);
      if (!std::filesystem::is_regular_file(path)) throw ConfigError("graph.path: cannot open edge list " + path);
      Graph graph = read_edge_list_file(path);
      if (graph.n() != n) throw ConfigError("edge list has " + std::to_string(graph.n()) + " vertices, problem has " +
                                            std::to_string(n));
      return GraphSchedule::static_graph(std::move(graph));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
  throw ConfigError("unknown graph type '" + g.type + "'");
}

ConsensusMethod consensus_method(const AlgorithmConfig& a, const GraphSchedule& s) {
  const bool is_static = s.kind() == ScheduleKind::Static;
  if (a.consensus) {
    if (*a.consensus == ConsensusMethod::Chebyshev && !is_static) {
      throw ConfigError("algorithm.consensus: chebyshev needs a static graph");
    }
    return *a.consensus;
  }
  return is_static ? ConsensusMethod::Chebyshev : ConsensusMethod::Gossip;
}

PreparedExperiment prepare(const ExperimentConfig& cfg, std::shared_ptr<const Problem> problem) {
  if (!problem && cfg.problem.type != "constants") {
    problem = std::make_shared<const Problem>(build_problem(cfg.problem));
  }
  const ProblemConstants constants = problem_constants(cfg.problem, problem.get());
  GraphSchedule schedule = build_schedule(cfg.graph, constants.n());
  const int tau = schedule.kind() == ScheduleKind::Static ? 1 : schedule.tau();
  ContractionCertificate cert = contraction_certificate(schedule, tau);
  const ConsensusMethod method = consensus_method(cfg.algorithm, schedule);

  double R_est = 0.0;
  if (cfg.algorithm.R_est) {
    R_est = *cfg.algorithm.R_est;
  } else if (problem && problem->x_star) {
    R_est = (problem->x0 - *problem->x_star).norm();
  } else {
    throw ConfigError("algorithm.R_est is required when the minimiser is unknown");
  }
  RunPlan plan = plan_run(cfg.algorithm.epsilon, constants, cert, R_est, method);
  plan = with_overrides(plan, cfg.algorithm.r, cfg.algorithm.T, cfg.algorithm.N);
  if (cfg.algorithm.comm_budget && cfg.algorithm.name == "dsagd") {
    plan = with_overrides(plan, std::nullopt, std::nullopt, *cfg.algorithm.comm_budget / plan.T);
  }
  return PreparedExperiment{cfg, std::move(problem), std::move(schedule), cert, method, plan};
}

ExperimentResult run_prepared(const PreparedExperiment& p, bool wallclock) {
  if (!p.problem) throw ConfigError("problem type 'constants' can only be planned, not run");
  const auto& a = p.config.algorithm;
  RunOptions opt;
  opt.record_every = a.record_every;
  opt.wallclock = wallclock;
  ExperimentResult res{p.config, p.plan, {}};
  if (a.name == "dsgd") {
    const long iterations = a.N ? *a.N : a.comm_budget ? *a.comm_budget : p.plan.N_comm;
    res.record = run_dsgd(*p.problem, p.plan.r, iterations, Communicator(p.schedule, ConsensusMethod::Gossip),
                          a.seed, opt);
  } else {
    res.record = run(p.plan, *p.problem, Communicator(p.schedule, p.method), a.seed, opt);
  }
  if (!p.config.output.csv_path.empty()) write_csv(res.record, p.config.output.csv_path);
  return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool wallclock) {
  return run_prepared(prepare(cfg), wallclock);
}

namespace {

std::string suffixed(const std::string& path, const std::string& suffix) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
  return (p.parent_path() / (p.stem().string() + suffix + ext)).string();
}

template <class T>
std::vector<std::optional<T>> axis(const std::vector<T>& values) {
  if (values.empty()) return {std::nullopt};
  return {values.begin(), values.end()};
}

std::string problem_key(const ExperimentConfig& c) {
  ExperimentConfig only;
  only.problem = c.problem;
  return to_json(only);
}

}  // namespace

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg) {
  std::vector<ExperimentConfig> out;
  for (const auto& T : axis(cfg.sweep.T)) {
    for (const auto& r : axis(cfg.sweep.r)) {
      for (const auto& eps : axis(cfg.sweep.epsilon)) {
        for (const auto& seed : axis(cfg.sweep.seed)) {
          ExperimentConfig c = cfg;
          c.sweep = {};
          std::string suffix;
          if (T) {
            c.algorithm.T = *T;
            suffix += "_T" + std::to_string(*T);
          }
          if (r) {
            c.algorithm.r = *r;
            suffix += "_r" + std::to_string(*r);
          }
          if (eps) {
            c.algorithm.epsilon = *eps;
            suffix += "_eps" + format_compact(*eps);
          }
          if (seed) {
            c.algorithm.seed = *seed;
            suffix += "_seed" + std::to_string(*seed);
          }
          c.output.csv_path = suffixed(cfg.output.csv_path, suffix);
          c.output.plot_path.clear();
          out.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

std::vector<ExperimentResult> run_sweep(const ExperimentConfig& cfg, int jobs, bool wallclock) {
  if (jobs < 1) throw std::invalid_argument("sweep: jobs must be >= 1");
  const auto entries = expand_sweep(cfg);

  std::map<std::string, std::shared_ptr<const Problem>> problems;
  std::vector<PreparedExperiment> prepared;
  for (const auto& c : entries) {
    auto& shared = problems[problem_key(c)];
    prepared.push_back(prepare(c, shared));
    shared = prepared.back().problem;
  }

  std::vector<std::optional<ExperimentResult>> results(prepared.size());
  std::vector<std::exception_ptr> errors(prepared.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < prepared.size();) {
      try {
        results[i] = run_prepared(prepared[i], wallclock);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::min<int>(jobs, static_cast<int>(prepared.size()));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ExperimentResult> out;
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace dstorm::harness
