#include "dstorm/harness/cli.hpp"

#include <filesystem>
#include <ostream>

#include "CLI11.hpp"
#include "dstorm/harness/config.hpp"
#include "dstorm/harness/csv.hpp"
#include "dstorm/harness/experiment.hpp"
#include "dstorm/harness/plot.hpp"

namespace dstorm::harness {

namespace {

void print_plan(std::ostream& out, const RunPlan& p, ConsensusMethod method) {
  out << "epsilon=" << format_compact(p.epsilon) << '\n'
      << "delta_prime=" << format_compact(p.delta_prime) << '\n'
      << "delta=" << format_compact(p.delta) << '\n'
      << "r=" << p.r << '\n'
      << "T=" << p.T << '\n'
      << "N=" << p.N << '\n'
      << "D=" << format_compact(p.D) << '\n'
      << "R_est=" << format_compact(p.R_est) << '\n'
      << "N_orcl=" << p.N_orcl << '\n'
      << "N_comm=" << p.N_comm << '\n'
      << "consensus=" << to_string(method) << '\n';
}

void print_summary(std::ostream& out, const ExperimentResult& r) {
  const auto& last = r.record.rows.back();
  out << "algorithm=" << r.record.algorithm << " rounds=" << last.round << " comm_total=" << last.comm_total
      << " oracle_calls_per_node=" << last.oracle_calls_per_node;
  if (last.f_gap) out << " f_gap=" << format_compact(*last.f_gap);
  out << " consensus_sq=" << format_compact(last.consensus_sq);
  if (!r.config.output.csv_path.empty()) out << " csv=" << r.config.output.csv_path;
  out << '\n';
}

std::string sweep_label(const ExperimentConfig& c) {
  std::string s = c.algorithm.name;
  if (c.algorithm.T) s += " T=" + std::to_string(*c.algorithm.T);
  if (c.algorithm.r) s += " r=" + std::to_string(*c.algorithm.r);
  s += " seed=" + std::to_string(c.algorithm.seed);
  return s;
}

struct Options {
  std::string config;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  std::string title;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) cfg.algorithm.seed = *o.seed;
  return cfg;
}

int cmd_plan(const Options& o, std::ostream& out) {
  const auto p = prepare(load(o));
  print_plan(out, p.plan, p.method);
  return kExitOk;
}

int cmd_run(const Options& o, std::ostream& out) {
  ExperimentConfig cfg = load(o);
  if (!o.out.empty()) cfg.output.csv_path = o.out;
  const auto p = prepare(cfg);
  print_plan(out, p.plan, p.method);
  const auto res = run_prepared(p);
  print_summary(out, res);
  if (!cfg.output.plot_path.empty()) {
    write_svg({{sweep_label(cfg), res.record.rows}}, cfg.output.plot_path, cfg.problem.type);
  }
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  ExperimentConfig cfg = load(o);
  if (!o.out.empty()) cfg.output.csv_path = o.out;
  const auto results = run_sweep(cfg, o.jobs);
  std::vector<PlotSeries> series;
  for (const auto& r : results) {
    out << sweep_label(r.config) << ": ";
    print_summary(out, r);
    series.push_back({sweep_label(r.config), r.record.rows});
  }
  if (!cfg.output.plot_path.empty()) write_svg(series, cfg.output.plot_path, cfg.problem.type + " sweep");
  return kExitOk;
}

int cmd_validate_graph(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  const int n = cfg.problem.constants ? cfg.problem.constants->n() : cfg.graph.n.value_or(cfg.problem.n);
  const GraphSchedule s = build_schedule(cfg.graph, n);
  const int tau = s.kind() == ScheduleKind::Static ? 1 : s.tau();
  std::size_t violations = 0;
  const std::size_t slots = std::max<std::size_t>(1, s.period());
  for (std::size_t k = 0; k < slots; ++k) violations += validate_mixing(*s.mixing(k)).size();
  bool connected_union = true;
  {
    std::vector<Graph> window;
    for (int k = 0; k < tau; ++k) window.push_back(s.graph(static_cast<std::uint64_t>(k)));
    connected_union = is_connected(union_graph(window));
  }
  out << "n=" << s.n() << '\n'
      << "kind=" << to_string(s.kind()) << '\n'
      << "tau=" << tau << '\n'
      << "slots=" << slots << '\n'
      << "edges=" << s.graph(0).edge_count() << '\n'
      << "window_union_connected=" << (connected_union ? "true" : "false") << '\n'
      << "mixing_violations=" << violations << '\n';
  try {
    const auto cert = contraction_certificate(s, tau);
    out << "lambda=" << format_compact(cert.lambda) << '\n';
    if (cert.rho) out << "rho=" << format_compact(*cert.rho) << '\n';
    if (cert.chi) out << "chi=" << format_compact(*cert.chi) << '\n';
  } catch (const NonContractingError&) {
    out << "lambda=nonpositive\n";
    throw;
  }
  return violations == 0 ? kExitOk : kExitRuntime;
}

int cmd_plot(const Options& o, std::ostream& out) {
  if (o.inputs.empty()) throw ConfigError("plot: at least one CSV file is required");
  if (o.out.empty()) throw ConfigError("plot: --out is required");
  std::vector<PlotSeries> series;
  for (const auto& path : o.inputs) {
    series.push_back({std::filesystem::path(path).stem().string(), read_csv(path)});
  }
  write_svg(series, o.out, o.title);
  out << "wrote " << o.out << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Decentralized stochastic optimization simulator", args.empty() ? "dstorm" : args.front());
  app.require_subcommand(1);
  Options o;
  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", o.config, "Experiment JSON")->required(); };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "Override algorithm.seed"); };

  auto* plan = app.add_subcommand("plan", "Print the run plan as key=value lines");
  add_config(plan);
  add_seed(plan);
  auto* run = app.add_subcommand("run", "Run one experiment and write its CSV");
  add_config(run);
  add_seed(run);
  run->add_option("--out", o.out, "CSV path (overrides output.csv_path)");
  auto* sweep = app.add_subcommand("sweep", "Run the cartesian grid of sweep overrides");
  add_config(sweep);
  add_seed(sweep);
  sweep->add_option("--out", o.out, "Base CSV path; swept values are appended to the stem");
  sweep->add_option("--jobs", o.jobs, "Concurrent jobs")->check(CLI::PositiveNumber);
  auto* validate = app.add_subcommand("validate-graph", "Check mixing matrices and print the contraction certificate");
  add_config(validate);
  auto* plot = app.add_subcommand("plot", "Render CSV runs into an SVG chart");
  plot->add_option("--out", o.out, "SVG path");
  plot->add_option("--title", o.title, "Chart title");
  plot->add_option("inputs", o.inputs, "CSV files");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (plan->parsed()) return cmd_plan(o, out);
    if (run->parsed()) return cmd_run(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (validate->parsed()) return cmd_validate_graph(o, out);
    if (plot->parsed()) return cmd_plot(o, out);
  } catch (const NonContractingError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    // ConfigError, PlanError and malformed inputs.
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const RunError& e) {
    err << "error: " << e.what() << " (" << e.partial().rows.size() << " rows recorded)\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return run_cli(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace dstorm::harness
