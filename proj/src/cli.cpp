#include "hcb/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "hcb/experiments.hpp"
#include "hcb/oracle.hpp"
#include "hcb/ranking.hpp"
#include "hcb/svg.hpp"

namespace fs = std::filesystem;

namespace hcb::cli {

void apply_config(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  if (!j.contains("schema_version")) throw InputError("config is missing schema_version");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion)
    throw InputError("unsupported schema_version (expected 1)");
  static const std::set<std::string> known = {
      "schema_version", "seed",        "trials",      "tolerance",   "workers",
      "emit_plot",      "gamma_scale", "iterations",  "support_min", "support_max",
      "labels_min",     "labels_max",  "experiment_support", "bounds"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw InputError("unknown config key: " + k);
  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
    if (j.contains("tolerance")) cfg.tolerance = j.at("tolerance").get<double>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<unsigned>();
    if (j.contains("emit_plot")) cfg.emit_plot = j.at("emit_plot").get<bool>();
    if (j.contains("gamma_scale")) cfg.gamma_scale = j.at("gamma_scale").get<double>();
    if (j.contains("iterations")) cfg.iterations = j.at("iterations").get<int>();
    if (j.contains("support_min")) cfg.support_min = j.at("support_min").get<std::size_t>();
    if (j.contains("support_max")) cfg.support_max = j.at("support_max").get<std::size_t>();
    if (j.contains("labels_min")) cfg.labels_min = j.at("labels_min").get<int>();
    if (j.contains("labels_max")) cfg.labels_max = j.at("labels_max").get<int>();
    if (j.contains("experiment_support"))
      cfg.experiment_support = j.at("experiment_support").get<std::size_t>();
    if (j.contains("bounds")) cfg.bounds = j.at("bounds").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad config value: ") + e.what());
  }
}

std::vector<std::string> suite_bounds(const std::string& suite) {
  static const std::map<std::string, std::string> prefix = {
      {"tools", "tool-"}, {"constrained", "constrained-"}, {"tsybakov", "tsybakov-"}, {"ranking", "rank-"}};
  if (suite != "all" && !prefix.count(suite)) throw InputError("unknown suite: " + suite);
  std::vector<std::string> ids;
  for (const auto& id : oracle::registered_bounds())
    if (suite == "all" || id.rfind(prefix.at(suite), 0) == 0) ids.push_back(id);
  return ids;
}

DiscreteDistribution experiment_instance(std::uint64_t seed, std::size_t support) {
  return sample_distribution(seed, support, 2);
}

namespace {

void validate(const RunConfig& cfg) {
  if (cfg.trials < 1) throw InputError("--trials must be >= 1");
  if (!(cfg.tolerance > 0.0)) throw InputError("--tolerance must be > 0");
  if (cfg.workers < 1) throw InputError("--workers must be >= 1");
  if (!(cfg.gamma_scale > 0.0)) throw InputError("--gamma-scale must be > 0");
  if (cfg.iterations < 0) throw InputError("--iterations must be >= 0");
  if (cfg.experiment_support < 2) throw InputError("experiment_support must be >= 2");
}

// Each run gets a fresh directory so every output file appears in exactly one
// manifest record.
struct RunDir {
  fs::path root;
  fs::path dir;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  explicit RunDir(const std::string& out) : root(out) {
    fs::create_directories(root);
    std::size_t lines = 0;
    std::ifstream in(root / "manifest.jsonl");
    for (std::string l; std::getline(in, l);)
      if (!l.empty()) ++lines;
    for (std::size_t k = lines + 1;; ++k) {
      std::ostringstream name;
      name << "run-" << std::setw(4) << std::setfill('0') << k;
      dir = root / name.str();
      if (!fs::exists(dir)) break;
    }
    fs::create_directories(dir);
  }

  void write(const std::string& name, const std::string& content) {
    fs::path p = dir / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InputError("cannot write " + p.string());
    f << content;
    outputs.push_back(p.string());
  }

  void finish(const std::string& command, const RunConfig& cfg) {
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json rec = {{"command", command},
                {"config", cfg.config_path.empty() ? json(nullptr) : json(cfg.config_path)},
                {"seed", cfg.seed},
                {"tool_version", kToolVersion},
                {"outputs", outputs},
                {"wall_time_s", wall}};
    std::ofstream f(root / "manifest.jsonl", std::ios::app);
    f << rec.dump() << '\n';
  }
};

std::string slack_str(double v) {
  if (!std::isfinite(v)) return "n/a";
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

int cmd_verify(const std::string& suite, const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  auto ids = suite_bounds(suite);
  if (!cfg.bounds.empty()) {
    std::vector<std::string> keep;
    for (const auto& b : cfg.bounds) {
      if (std::find(ids.begin(), ids.end(), b) == ids.end())
        throw InputError("bound " + b + " is not part of suite " + suite);
      keep.push_back(b);
    }
    ids = keep;
  }
  oracle::AuditConfig ac;
  ac.trials = cfg.trials;
  ac.seed = cfg.seed;
  ac.tolerance = cfg.tolerance;
  ac.support_min = cfg.support_min;
  ac.support_max = cfg.support_max;
  ac.labels_min = cfg.labels_min;
  ac.labels_max = cfg.labels_max;
  ac.conclusion_scale = cfg.gamma_scale;
  ac.workers = cfg.workers;
  ac.validate();
  RunDir run(cfg.out);
  json bounds = json::array();
  std::ostringstream csv;
  csv << "bound_id,trial,seed,applicable,violated,lhs,rhs,slack,note\n";
  int total = 0;
  for (const auto& id : ids) {
    auto r = oracle::audit_bound(ac, id);
    total += r.violations;
    bounds.push_back(r.to_json());
    std::istringstream rows(r.csv());
    std::string line;
    std::getline(rows, line);  // header
    while (std::getline(rows, line)) csv << id << ',' << line << '\n';
    out << std::left << std::setw(36) << id << " worst_slack=" << slack_str(r.worst_slack)
        << " violations=" << r.violations << " inapplicable=" << r.inapplicable << '\n';
  }
  int code = total == 0 ? kOk : kViolation;
  json summary = {{"schema_version", kSchemaVersion},
                  {"command", "verify"},
                  {"suite", suite},
                  {"seed", cfg.seed},
                  {"trials", cfg.trials},
                  {"tolerance", cfg.tolerance},
                  {"gamma_scale", cfg.gamma_scale},
                  {"bounds", bounds},
                  {"violations", total},
                  {"exit_code", code}};
  run.write("summary.json", summary.dump(2) + "\n");
  run.write("trials.csv", csv.str());
  run.finish("verify " + suite, cfg);
  out << "total violations: " << total << "\noutput: " << run.dir.string() << '\n';
  return code;
}

int cmd_experiment(const std::string& kind, const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  if (kind != "adaboost-rankboost" && kind != "logistic-ranking")
    throw InputError("unknown experiment: " + kind);
  RunDir run(cfg.out);
  auto d = experiment_instance(cfg.seed, cfg.experiment_support);
  BoundOptions opts;
  opts.conclusion_scale = cfg.gamma_scale;
  opts.tol = cfg.tolerance;
  std::vector<TrajectoryPoint> rows;
  if (kind == "adaboost-rankboost") {
    auto traj = train_boosting(d, make_stump_pool(d, true), cfg.iterations, cfg.seed);
    rows = audit_trajectory(traj, d, TrajectoryBound::ExpBound, opts);
  } else {
    auto traj = train_logistic(d, cfg.iterations);
    rows = audit_trajectory(traj, d, TrajectoryBound::LogBound, opts);
  }
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) worst = std::min(worst, r.slack);
  int code = worst >= -cfg.tolerance ? kOk : kViolation;

  run.write("trajectory.csv", trajectory_csv(rows));
  if (cfg.emit_plot) {
    svg::Series lhs{"pair estimation error", "#1f77b4", {}, {}}, rhs{"bound", "#d62728", {}, {}};
    for (const auto& r : rows) {
      lhs.x.push_back(r.iteration);
      lhs.y.push_back(r.pair_estimation_error);
      rhs.x.push_back(r.iteration);
      rhs.y.push_back(r.bound_rhs);
    }
    run.write("trajectory.svg", svg::line_plot(kind, "iteration", "error", {lhs, rhs}));
  }
  json summary = {{"schema_version", kSchemaVersion},
                  {"command", "experiment"},
                  {"kind", kind},
                  {"seed", cfg.seed},
                  {"iterations", cfg.iterations},
                  {"gamma_scale", cfg.gamma_scale},
                  {"rows", rows.size()},
                  {"worst_slack", worst},
                  {"exit_code", code}};
  run.write("summary.json", summary.dump(2) + "\n");
  run.finish("experiment " + kind, cfg);
  out << kind << ": " << rows.size() << " rows, worst slack " << slack_str(worst) << "\noutput: "
      << run.dir.string() << '\n';
  return code;
}

int cmd_counterexample(double eta0, double eta0p, std::ostream& out) {
  auto c = hinge_counterexample(eta0, eta0p);
  out << "instance: " << c.dist.to_json().dump() << '\n';
  out << std::setprecision(17);
  out << "hypothesis: h(x0) = h(x0') = 1\n";
  out << "point regret x0:  " << c.point_regret_x0 << '\n';
  out << "point regret x0': " << c.point_regret_x0p << '\n';
  out << "pair regret:      " << c.pair_regret << '\n';
  return kOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical audits of hypothesis-dependent consistency bounds", "hcb"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  RunConfig cfg;
  std::string emit_plot = "true";
  auto* o_seed = app.add_option("--seed", cfg.seed, "Base seed")->capture_default_str();
  auto* o_trials = app.add_option("--trials", cfg.trials, "Trials per bound")->capture_default_str();
  auto* o_tol = app.add_option("--tolerance", cfg.tolerance, "Violation tolerance")->capture_default_str();
  app.add_option("--config", cfg.config_path, "JSON config file");
  app.add_option("--out", cfg.out, "Output directory")->capture_default_str();
  auto* o_workers = app.add_option("--workers", cfg.workers, "Worker threads")->capture_default_str();
  auto* o_plot = app.add_option("--emit-plot", emit_plot, "Write SVG plots (true/false)")->capture_default_str();
  auto* o_scale = app.add_option("--gamma-scale", cfg.gamma_scale, "Conclusion Gamma scale")->capture_default_str();
  auto* o_iter = app.add_option("--iterations", cfg.iterations, "Training iterations")->capture_default_str();

  std::string suite, kind;
  double eta0 = 0.0, eta0p = 0.0;
  auto* verify = app.add_subcommand("verify", "Audit registered bounds");
  verify->add_option("suite", suite, "tools|constrained|tsybakov|ranking|all")->required();
  auto* experiment = app.add_subcommand("experiment", "Audit a training trajectory");
  experiment->add_option("kind", kind, "adaboost-rankboost|logistic-ranking")->required();
  auto* counter = app.add_subcommand("counterexample", "Hinge ranking counterexample");
  counter->add_option("eta0", eta0)->required();
  counter->add_option("eta0p", eta0p)->required();
  for (auto* sub : {verify, experiment, counter}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (!cfg.config_path.empty()) {
      std::ifstream f(cfg.config_path);
      if (!f) throw InputError("cannot open config: " + cfg.config_path);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::exception& e) {
        throw InputError(std::string("config does not parse: ") + e.what());
      }
      // Flags given on the command line take precedence over the file.
      RunConfig flags = cfg;
      apply_config(cfg, j);
      if (o_seed->count()) cfg.seed = flags.seed;
      if (o_trials->count()) cfg.trials = flags.trials;
      if (o_tol->count()) cfg.tolerance = flags.tolerance;
      if (o_workers->count()) cfg.workers = flags.workers;
      if (o_scale->count()) cfg.gamma_scale = flags.gamma_scale;
      if (o_iter->count()) cfg.iterations = flags.iterations;
    }
    if (o_plot->count() || cfg.config_path.empty()) {
      if (emit_plot == "true" || emit_plot == "1") {
        cfg.emit_plot = true;
      } else if (emit_plot == "false" || emit_plot == "0") {
        cfg.emit_plot = false;
      } else {
        throw InputError("--emit-plot expects true or false");
      }
    }
    if (*verify) return cmd_verify(suite, cfg, out);
    if (*experiment) return cmd_experiment(kind, cfg, out);
    return cmd_counterexample(eta0, eta0p, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace hcb::cli
