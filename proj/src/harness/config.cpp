#include "dstorm/harness/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dstorm::harness {

using nlohmann::json;

namespace {

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("", "must be an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(where_ + (key.empty() ? "" : "." + key) + ": " + what);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    out = convert<T>(key, j_.at(key));
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    out = convert<T>(key, j_.at(key));
  }

  template <class T>
  void get(const std::string& key, std::vector<T>& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(key, "must be an array");
    out.clear();
    for (const auto& e : v) out.push_back(convert<T>(key, e));
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), where_ + "." + key);
  }

  void finish() const {
    for (const auto& [k, _] : j_.items())
      if (!seen_.count(k)) fail(k, "unknown key");
  }

 private:
  template <class T>
  T convert(const std::string& key, const json& v) const {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "must be a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) fail(key, "must be a number");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) fail(key, "must be a nonnegative integer");
      return v.get<std::uint64_t>();
    } else {
      static_assert(std::is_integral_v<T>);
      if (!v.is_number_integer()) fail(key, "must be an integer");
      return v.get<T>();
    }
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <class T>
void require_positive(Section& s, const std::string& key, const std::optional<T>& v) {
  if (v && !(*v > 0)) s.fail(key, "must be positive");
}

ProblemConfig parse_problem(Section s) {
  ProblemConfig p;
  s.get("type", p.type);
  s.get("n", p.n);
  s.get("d", p.d);
  s.get("kappa", p.kappa);
  s.get("sigma", p.sigma);
  s.get("seed", p.seed);
  s.get("extra_rows", p.extra_rows);
  s.get("scale_spread", p.scale_spread);
  s.get("heterogeneity", p.heterogeneity);
  s.get("data_path", p.data_path);
  s.get("synthetic_rows", p.synthetic_rows);
  s.get("synthetic_dim", p.synthetic_dim);
  s.get("synthetic_groups", p.synthetic_groups);
  s.get("max_rows", p.max_rows);
  s.get("theta", p.theta);
  s.get("partition_seed", p.partition_seed);
  if (s.has("x0")) {
    std::vector<double> x0;
    s.get("x0", x0);
    p.x0 = std::move(x0);
  }
  if (p.type == "constants") {
    ProblemConstants c;
    s.get("mu", c.mu);
    s.get("L", c.L);
    s.get("sigma_i", c.sigma);
    s.get("L_xi", c.L_xi);
    s.get("M_xi", c.M_xi);
    if (c.L_xi == 0.0 && !c.L.empty()) c.L_xi = c.L_l();
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      s.fail("", e.what());
    }
    p.n = c.n();
    p.constants = std::move(c);
  } else if (p.type != "quadratic" && p.type != "logistic") {
    s.fail("type", "expected quadratic, logistic or constants, got '" + p.type + "'");
  }
  if (p.n < 1) s.fail("n", "must be >= 1");
  if (p.type == "quadratic") {
    if (p.d < 1) s.fail("d", "must be >= 1");
    if (!(p.kappa >= 1.0)) s.fail("kappa", "must be >= 1");
    if (!(p.sigma >= 0.0)) s.fail("sigma", "must be >= 0");
    if (p.d == 1 && p.kappa != 1.0) s.fail("kappa", "must be 1 when d == 1");
  }
  if (p.type == "logistic") {
    if (!(p.theta > 0.0)) s.fail("theta", "must be positive");
    require_positive(s, "max_rows", p.max_rows);
    if (p.synthetic_rows < 1) s.fail("synthetic_rows", "must be >= 1");
  }
  s.finish();
  return p;
}

GraphConfig parse_graph(Section s) {
  GraphConfig g;
  s.get("type", g.type);
  s.get("n", g.n);
  s.get("radius", g.radius);
  s.get("tau", g.tau);
  s.get("seed", g.seed);
  s.get("path", g.path);
  static const std::set<std::string> types{"static-geometric", "tau-connected", "complete", "path", "edge-list"};
  if (!types.count(g.type)) s.fail("type", "unknown graph type '" + g.type + "'");
  require_positive(s, "n", g.n);
  if ((g.type == "static-geometric" || g.type == "tau-connected") && !(g.radius > 0.0 && g.radius <= std::sqrt(2.0))) {
    s.fail("radius", "must lie in (0, sqrt 2]");
  }
  if (g.tau < 1) s.fail("tau", "must be >= 1");
  if (g.type == "edge-list" && g.path.empty()) s.fail("path", "required for edge-list graphs");
  s.finish();
  return g;
}

AlgorithmConfig parse_algorithm(Section s) {
  AlgorithmConfig a;
  s.get("name", a.name);
  s.get("epsilon", a.epsilon);
  s.get("r", a.r);
  s.get("T", a.T);
  s.get("N", a.N);
  s.get("comm_budget", a.comm_budget);
  s.get("R_est", a.R_est);
  s.get("seed", a.seed);
  s.get("record_every", a.record_every);
  if (s.has("consensus")) {
    std::string m;
    s.get("consensus", m);
    if (m == "gossip") {
      a.consensus = ConsensusMethod::Gossip;
    } else if (m == "chebyshev") {
      a.consensus = ConsensusMethod::Chebyshev;
    } else {
      s.fail("consensus", "expected gossip or chebyshev");
    }
  }
  if (a.name != "dsagd" && a.name != "dsgd") s.fail("name", "expected dsagd or dsgd");
  if (!(a.epsilon > 0.0)) s.fail("epsilon", "must be positive");
  require_positive(s, "r", a.r);
  require_positive(s, "T", a.T);
  require_positive(s, "N", a.N);
  require_positive(s, "comm_budget", a.comm_budget);
  require_positive(s, "R_est", a.R_est);
  if (a.record_every < 1) s.fail("record_every", "must be >= 1");
  if (a.N && a.comm_budget) s.fail("comm_budget", "cannot be combined with N");
  s.finish();
  return a;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": invalid JSON: " + e.what());
  }
  Section root(j, source);
  ExperimentConfig cfg;
  if (root.has("problem")) cfg.problem = parse_problem(root.child("problem"));
  if (root.has("graph")) cfg.graph = parse_graph(root.child("graph"));
  if (root.has("algorithm")) cfg.algorithm = parse_algorithm(root.child("algorithm"));
  if (root.has("output")) {
    Section o = root.child("output");
    o.get("csv_path", cfg.output.csv_path);
    o.get("plot_path", cfg.output.plot_path);
    o.finish();
  }
  if (root.has("sweep")) {
    Section s = root.child("sweep");
    s.get("T", cfg.sweep.T);
    s.get("r", cfg.sweep.r);
    s.get("seed", cfg.sweep.seed);
    s.get("epsilon", cfg.sweep.epsilon);
    for (long t : cfg.sweep.T)
      if (t < 1) s.fail("T", "entries must be >= 1");
    for (int r : cfg.sweep.r)
      if (r < 1) s.fail("r", "entries must be >= 1");
    for (double e : cfg.sweep.epsilon)
      if (!(e > 0.0)) s.fail("epsilon", "entries must be positive");
    s.finish();
  }
  root.finish();
  if (cfg.graph.n && *cfg.graph.n != cfg.problem.n) {
    throw ConfigError(source + ": graph.n (" + std::to_string(*cfg.graph.n) + ") differs from problem.n (" +
                      std::to_string(cfg.problem.n) + ")");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string to_string(ConsensusMethod m) { return m == ConsensusMethod::Gossip ? "gossip" : "chebyshev"; }

std::string to_json(const ExperimentConfig& c) {
  json p{{"type", c.problem.type}, {"n", c.problem.n}};
  if (c.problem.type == "quadratic") {
    p.update({{"d", c.problem.d}, {"kappa", c.problem.kappa}, {"sigma", c.problem.sigma}, {"seed", c.problem.seed},
              {"extra_rows", c.problem.extra_rows}, {"scale_spread", c.problem.scale_spread},
              {"heterogeneity", c.problem.heterogeneity}});
  } else if (c.problem.type == "logistic") {
    p.update({{"data_path", c.problem.data_path}, {"synthetic_rows", c.problem.synthetic_rows},
              {"synthetic_dim", c.problem.synthetic_dim}, {"synthetic_groups", c.problem.synthetic_groups},
              {"theta", c.problem.theta}, {"partition_seed", c.problem.partition_seed}, {"seed", c.problem.seed}});
    if (c.problem.max_rows) p["max_rows"] = *c.problem.max_rows;
  } else if (c.problem.constants) {
    const auto& k = *c.problem.constants;
    p.update({{"mu", k.mu}, {"L", k.L}, {"sigma_i", k.sigma}, {"L_xi", k.L_xi}, {"M_xi", k.M_xi}});
  }
  if (c.problem.x0) p["x0"] = *c.problem.x0;

  json g{{"type", c.graph.type}, {"radius", c.graph.radius}, {"tau", c.graph.tau}, {"seed", c.graph.seed}};
  if (c.graph.n) g["n"] = *c.graph.n;
  if (!c.graph.path.empty()) g["path"] = c.graph.path;

  const auto& a = c.algorithm;
  json alg{{"name", a.name}, {"epsilon", a.epsilon}, {"seed", a.seed}, {"record_every", a.record_every}};
  if (a.r) alg["r"] = *a.r;
  if (a.T) alg["T"] = *a.T;
  if (a.N) alg["N"] = *a.N;
  if (a.comm_budget) alg["comm_budget"] = *a.comm_budget;
  if (a.R_est) alg["R_est"] = *a.R_est;
  if (a.consensus) alg["consensus"] = to_string(*a.consensus);

  json out{{"problem", p}, {"graph", g}, {"algorithm", alg},
           {"output", {{"csv_path", c.output.csv_path}, {"plot_path", c.output.plot_path}}}};
  if (!c.sweep.empty()) {
    out["sweep"] = {{"T", c.sweep.T}, {"r", c.sweep.r}, {"seed", c.sweep.seed}, {"epsilon", c.sweep.epsilon}};
  }
  return out.dump(2);
}

std::string resolve_data_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (path.empty() || fs::path(path).is_absolute()) return path;
  if (const char* dir = std::getenv("DSTORM_DATA_DIR"); dir && *dir) return (fs::path(dir) / path).string();
  return path;
}

}  // namespace dstorm::harness
