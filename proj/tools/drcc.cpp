// drcc command-line front end.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "drcc/compact.hpp"
#include "drcc/config.hpp"
#include "drcc/dr_set.hpp"
#include "drcc/errors.hpp"
#include "drcc/network.hpp"
#include "drcc/robust.hpp"
#include "drcc/uncertainty.hpp"
#include "drcc/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitModel = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::optional<double> theta;
  std::optional<double> epsilon;
  std::optional<std::string> method;
  std::vector<int> kappa;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
  std::string dump_lp;
  std::optional<long> count;
  std::string samples;
  std::string set;
  std::string solution;
  bool quiet = false;
};

drcc::RunConfig effective_config(const Options& o) {
  if (o.config.empty()) throw UsageError("--config is required");
  drcc::RunConfig cfg = drcc::load_config(o.config);
  if (o.theta) cfg.theta = *o.theta;
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (o.method) cfg.method = *o.method;
  if (!o.kappa.empty()) cfg.kappas = o.kappa;
  if (o.seed) cfg.seed = o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.count) cfg.n_samples = *o.count;
  if (!o.samples.empty()) cfg.samples_file = o.samples;
  return cfg;
}

std::vector<int> kappas_or_zero(const drcc::RunConfig& cfg, const drcc::PartitionSpec& partition) {
  return cfg.kappas.empty() ? std::vector<int>(partition.num_groups(), 0) : cfg.kappas;
}

json stamp(const drcc::RunConfig& cfg) {
  return {{"version", drcc::kVersion}, {"config_hash", drcc::config_hash(cfg)}};
}

std::vector<std::string> csv_comments(const drcc::RunConfig& cfg, const std::string& what) {
  return {"drcc " + std::string(drcc::kVersion) + " " + what, "config_hash " + drcc::config_hash(cfg)};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw drcc::Error("cannot write " + path.string());
  os << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw drcc::ParseError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw drcc::ParseError(path.string() + ": " + e.what());
  }
}

fs::path out_path(const Options& o, const drcc::RunConfig& cfg, const char* fallback) {
  return o.out.empty() ? cfg.output / fallback : fs::path(o.out);
}

struct Loaded {
  drcc::RunConfig cfg;
  drcc::NetworkCase net;
  drcc::PartitionSpec partition;
};

Loaded load(const Options& o) {
  Loaded l{effective_config(o), {}, {}};
  l.net = drcc::load_case(l.cfg.case_path);
  drcc::validate_config(l.cfg, l.net);
  l.partition = drcc::make_partition(l.cfg, l.net);
  return l;
}

// Training samples from the configured file, else from the generator (seed required).
drcc::SampleSet training_samples(const Loaded& l) {
  drcc::SampleSet s;
  if (l.cfg.samples_file) {
    s = drcc::read_samples_csv(*l.cfg.samples_file);
  } else {
    if (!l.cfg.seed) throw UsageError("--seed is required when samples are generated");
    s = drcc::generate_samples(drcc::make_generator(l.cfg, l.net), l.cfg.n_samples, *l.cfg.seed);
  }
  if (s.columns != drcc::sample_columns(l.net))
    throw drcc::ValidationError("samples", "columns do not match the case's wind units");
  drcc::check_support(s, l.partition);
  return s;
}

drcc::CompactProblem build_problem(const Loaded& l) {
  return drcc::build_compact(l.net, drcc::resolve_contingencies(l.cfg, l.net), l.cfg.epsilon);
}

int cmd_gen_samples(const Options& o) {
  const Loaded l = load(o);
  if (!o.seed) throw UsageError("--seed is required for gen-samples");
  const drcc::SampleSet s = drcc::generate_samples(drcc::make_generator(l.cfg, l.net), l.cfg.n_samples, *o.seed);
  const fs::path path = out_path(o, l.cfg, "samples.csv");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto comments = csv_comments(l.cfg, "samples");
  comments.push_back("seed " + std::to_string(*o.seed));
  drcc::write_samples_csv(path, s, comments);
  spdlog::info("wrote {} samples to {}", s.size(), path.string());
  return 0;
}

int cmd_build_set(const Options& o) {
  const Loaded l = load(o);
  const drcc::SampleSet s = training_samples(l);
  const drcc::RobustSet set =
      drcc::build_xirob(s, l.partition, kappas_or_zero(l.cfg, l.partition), l.cfg.theta, l.cfg.epsilon);
  json doc = drcc::to_json(set);
  doc.update(stamp(l.cfg));
  const fs::path path = out_path(o, l.cfg, "robust_set.json");
  write_json(path, doc);
  spdlog::info("robust set with {} slabs ({} rows) written to {}", set.n_dr, set.q(), path.string());
  return 0;
}

int cmd_solve(const Options& o) {
  const Loaded l = load(o);
  const drcc::CompactProblem problem = build_problem(l);
  spdlog::info("compact problem: n_x={} K={} deterministic rows={}", problem.n_x(), problem.K(), problem.Lambda.rows());
  if (!o.dump_lp.empty()) write_text(o.dump_lp, drcc::dump_listing(problem));

  drcc::DispatchSolution sol;
  const std::string& method = l.cfg.method;
  if (method == "worstcase") {
    sol = drcc::solve_worstcase(problem, l.partition);
  } else if (method == "scenario") {
    sol = drcc::solve_scenario(problem, training_samples(l));
  } else {
    drcc::RobustSet set;
    if (!o.set.empty()) {
      set = drcc::robust_set_from_json(read_json(o.set));
    } else {
      const std::vector<int> kappas =
          method == "drbox" ? std::vector<int>(l.partition.num_groups(), 0) : kappas_or_zero(l.cfg, l.partition);
      set = drcc::build_xirob(training_samples(l), l.partition, kappas, l.cfg.theta, l.cfg.epsilon);
    }
    sol = drcc::solve_drpoly(problem, set);
    sol.method = method;
  }
  json doc = drcc::to_json(sol, problem);
  doc.update(stamp(l.cfg));
  const fs::path path = out_path(o, l.cfg, "solution.json");
  write_json(path, doc);
  spdlog::info("{}: cost {:.4f}, {} LP vars, {} rows, {:.2f}s, audit {}", sol.method, sol.cost, sol.lp_vars,
               sol.lp_rows, sol.seconds, sol.audit.passed ? "passed" : "FAILED");
  return sol.audit.passed ? 0 : kExitModel;
}

int cmd_validate(const Options& o) {
  if (o.solution.empty()) throw UsageError("--solution is required for validate");
  const Loaded l = load(o);
  const drcc::CompactProblem problem = build_problem(l);
  const drcc::DispatchSolution sol = drcc::solution_from_json(read_json(o.solution), problem);

  drcc::SampleSet validation;
  if (!o.samples.empty()) {
    validation = drcc::read_samples_csv(o.samples);
    if (validation.columns != drcc::sample_columns(l.net))
      throw drcc::ValidationError("samples", "columns do not match the case's wind units");
    drcc::check_support(validation, l.partition);
  } else {
    if (!l.cfg.seed) throw UsageError("--seed or --samples is required for validate");
    validation = drcc::generate_samples(drcc::make_generator(l.cfg, l.net), l.cfg.n_validation,
                                        drcc::validation_seed(*l.cfg.seed));
  }
  if (validation.size() == 0) throw drcc::TooFewSamples("validation set is empty");

  const drcc::ViolationReport rep = drcc::violation_frequency(problem, sol.x, validation);
  json worst = json::array();
  for (const auto& [key, n] : rep.worst_contingencies) worst.push_back({{"contingency", key}, {"samples", n}});
  json doc = {{"method", sol.method},
              {"theta", sol.theta},
              {"cost", sol.cost},
              {"n_validation", rep.n_validation},
              {"n_violated", rep.n_violated},
              {"violation_frequency", rep.violation_frequency},
              {"tolerance", rep.tol},
              {"families",
               {{"reserve_up", rep.family_counts[0]},
                {"reserve_down", rep.family_counts[1]},
                {"line_upper", rep.family_counts[2]},
                {"line_lower", rep.family_counts[3]}}},
              {"worst_contingencies", worst}};
  doc.update(stamp(l.cfg));
  const fs::path path = out_path(o, l.cfg, "validation.json");
  write_json(path, doc);
  spdlog::info("violation frequency {:.5f} over {} samples", rep.violation_frequency, rep.n_validation);
  return 0;
}

int cmd_pareto(const Options& o) {
  const Loaded l = load(o);
  if (!l.cfg.seed) throw UsageError("--seed is required for pareto");
  const drcc::CompactProblem problem = build_problem(l);
  drcc::SweepConfig sc;
  sc.partition = l.partition;
  sc.generator = drcc::make_generator(l.cfg, l.net);
  sc.n_train = l.cfg.n_samples;
  sc.n_validation = l.cfg.n_validation;
  sc.thetas = o.theta ? std::vector<double>{*o.theta} : l.cfg.thetas;
  sc.kappas = kappas_or_zero(l.cfg, l.partition);
  sc.epsilon = l.cfg.epsilon;
  sc.repeats = l.cfg.repeats;
  sc.seed = *l.cfg.seed;
  sc.jobs = l.cfg.jobs;
  const drcc::SweepResult res = drcc::pareto_sweep(problem, sc);

  const fs::path dir = o.out.empty() ? l.cfg.output : fs::path(o.out);
  std::string header;
  for (const auto& c : csv_comments(l.cfg, "pareto")) header += "# " + c + "\n";
  write_text(dir / "pareto.csv", header + drcc::pareto_csv(res.records));
  write_text(dir / "summary.csv", header + drcc::summary_csv(res.tables));
  spdlog::info("wrote {} and {}", (dir / "pareto.csv").string(), (dir / "summary.csv").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("drcc"));

  CLI::App app{"Distributionally robust N-1 dispatch under wind uncertainty"};
  app.set_version_flag("--version", std::string(drcc::kVersion));
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--epsilon", o.epsilon, "Violation tolerance in (0, 1)");
    sub->add_option("--seed", o.seed, "Seed for generated samples");
    sub->add_option("--out", o.out, "Output file (directory for pareto)");
    sub->add_flag("--quiet", o.quiet, "Only log warnings and errors");
  };
  auto set_opts = [&](CLI::App* sub) {
    sub->add_option("--theta", o.theta, "Wasserstein radius")->check(CLI::NonNegativeNumber);
    sub->add_option("--kappa", o.kappa, "Eigen-normals per partition group")->delimiter(',');
    sub->add_option("--samples", o.samples, "Sample CSV overriding the config");
  };

  auto* gen = app.add_subcommand("gen-samples", "Draw samples from the configured generator");
  common(gen);
  gen->add_option("--count", o.count, "Number of samples")->check(CLI::NonNegativeNumber);

  auto* build = app.add_subcommand("build-set", "Construct the polyhedral robust set");
  common(build);
  set_opts(build);

  auto* solve = app.add_subcommand("solve", "Solve the dispatch problem");
  common(solve);
  set_opts(solve);
  solve->add_option("--method", o.method, "drpoly, drbox, scenario or worstcase")
      ->check(CLI::IsMember({"drpoly", "drbox", "scenario", "worstcase"}));
  solve->add_option("--set", o.set, "Prebuilt robust set JSON (drpoly/drbox)");
  solve->add_option("--dump-lp", o.dump_lp, "Write a text listing of the compact problem");

  auto* val = app.add_subcommand("validate", "Monte Carlo violation frequency of a solution");
  common(val);
  val->add_option("--solution", o.solution, "Solution JSON from solve")->required()->check(CLI::ExistingFile);
  val->add_option("--samples", o.samples, "Validation sample CSV");

  auto* par = app.add_subcommand("pareto", "Theta sweep over repeats");
  common(par);
  par->add_option("--theta", o.theta, "Single radius instead of the configured grid");
  par->add_option("--kappa", o.kappa, "Eigen-normals per partition group")->delimiter(',');
  par->add_option("--jobs", o.jobs, "Parallel sweep cells")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (o.quiet) spdlog::set_level(spdlog::level::warn);

  try {
    if (*gen) return cmd_gen_samples(o);
    if (*build) return cmd_build_set(o);
    if (*solve) return cmd_solve(o);
    if (*val) return cmd_validate(o);
    if (*par) return cmd_pareto(o);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const drcc::ValidationError& e) {
    spdlog::error("invalid input at {}", e.what());
    return kExitModel;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitModel;
  }
  return kExitUsage;
}
