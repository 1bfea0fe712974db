#include "glasd/cli.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "glasd/benchmarks.hpp"
#include "glasd/config.hpp"
#include "glasd/corr_manifold.hpp"
#include "glasd/errors.hpp"
#include "glasd/io.hpp"
#include "glasd/parallel.hpp"
#include "glasd/robust_losses.hpp"
#include "glasd/sim_harness.hpp"

namespace glasd {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr const char* kTool = "glasd";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct OutputOptions {
  fs::path dir;
  bool force = false;
  bool quiet = false;
};

void prepare_output(const OutputOptions& o, const char* record) {
  if (o.dir.empty()) throw InvalidArgument("--out is required");
  if (fs::exists(o.dir) && !fs::is_directory(o.dir)) {
    throw InvalidArgument(fmt::format("'{}' exists and is not a directory", o.dir.string()));
  }
  if (fs::exists(o.dir / record) && !o.force) {
    throw InvalidArgument(fmt::format("'{}' already exists; pass --force to overwrite",
                                      (o.dir / record).string()));
  }
  fs::create_directories(o.dir);
}

void write_json(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

Json header(const char* command) {
  Json j;
  j["tool"] = kTool;
  j["command"] = command;
  return j;
}

void write_trace_csv(const fs::path& path, const RunRecord& r) {
  std::string s = "iteration,evaluations,f_best\n";
  for (const auto& t : r.trace) {
    s += fmt::format("{},{},{}\n", t.iteration, t.evaluations, format_machine(t.f_best));
  }
  write_text_file(path, s);
}

std::vector<std::string> default_names(std::size_t M) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < M; ++i) names.push_back(fmt::format("V{}", i + 1));
  return names;
}

std::vector<double> f_bests(const std::vector<RunRecord>& runs) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.f_best);
  return v;
}

std::size_t argmin(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

// ---------------------------------------------------------------- optimize

struct OptimizeRequest {
  BenchmarkSpec bench;
  std::size_t starts = 10;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
  unsigned threads = 1;
};

struct OptimizeOutcome {
  OptimizerConfig config;  // resolved
  std::vector<RunRecord> runs;
  std::size_t best = 0;
  std::optional<ManifoldResult> manifold;
  double seconds = 0.0;
};

std::size_t search_dim(const BenchmarkSpec& b) {
  return b.variant == BenchmarkVariant::kCorr ? angle_dim(b.dim) : b.dim;
}

OptimizeOutcome optimize_benchmark(const OptimizeRequest& req, bool record_trace) {
  if (req.starts == 0) throw InvalidArgument("--starts must be >= 1");
  if (req.bench.dim < 1) throw InvalidArgument("dimension must be >= 1");
  OptimizeOutcome o;
  OptimizerConfig cfg = req.optimizer;
  cfg.seed = req.seed;
  o.config = cfg.resolved(search_dim(req.bench));
  o.config.record_trace = record_trace;
  const auto t0 = Clock::now();
  if (req.bench.variant == BenchmarkVariant::kCorr) {
    const BenchmarkSpec spec = req.bench;
    CorrObjective loss = [spec](const CorrelationMatrix& C) { return eval_benchmark(spec, C); };
    MultiStartOptions opts;
    opts.threads = req.threads;
    ManifoldResult mr = minimize_over_corr(loss, spec.dim, o.config, req.starts, opts);
    o.runs = mr.runs;
    o.best = mr.best_index;
    o.manifold = std::move(mr);
  } else {
    const BoxDomain box = benchmark_box(req.bench.fn, req.bench.dim);
    const BenchmarkFunction fn = req.bench.fn;
    Objective f = [fn](std::span<const double> x) { return evaluate(fn, x); };
    o.runs.resize(req.starts);
    parallel_for(req.starts, req.threads, [&](std::size_t k) {
      OptimizerConfig c = o.config;
      c.seed = restart_seed(o.config.seed, k);
      o.runs[k] = glasd_minimize(f, box, c);
    });
    o.best = argmin(f_bests(o.runs));
  }
  o.seconds = seconds_since(t0);
  return o;
}

Json optimize_record(const OptimizeRequest& req, const OptimizeOutcome& o) {
  Json j = header("optimize");
  j["function"] = std::string(to_string(req.bench.fn));
  j["variant"] = std::string(to_string(req.bench.variant));
  j["dim"] = req.bench.dim;
  j["scale"] = req.bench.variant == BenchmarkVariant::kCorr ? req.bench.resolved_scale() : 1.0;
  j["starts"] = req.starts;
  j["seed"] = req.seed;
  j["threads"] = req.threads;
  j["optimizer"] = to_json(o.config);
  Json seeds = Json::array();
  for (std::size_t k = 0; k < req.starts; ++k) seeds.push_back(restart_seed(o.config.seed, k));
  j["restart_seeds"] = seeds;
  const auto fb = f_bests(o.runs);
  j["min_value"] = fb[o.best];
  j["mean_value"] = mean(fb);
  j["se"] = standard_error(fb);
  j["best_restart"] = o.best;
  Json runs = Json::array();
  for (const auto& r : o.runs) runs.push_back(run_summary_json(r));
  j["runs"] = runs;
  return j;
}

OptimizeRequest optimize_from_record(const Json& j) {
  OptimizeRequest r;
  r.bench.fn = parse_benchmark_function(j.at("function").get<std::string>());
  r.bench.variant = parse_benchmark_variant(j.at("variant").get<std::string>());
  r.bench.dim = j.at("dim").get<std::size_t>();
  if (r.bench.variant == BenchmarkVariant::kCorr) r.bench.scale = j.at("scale").get<double>();
  r.starts = j.at("starts").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.threads = j.at("threads").get<unsigned>();
  r.optimizer = optimizer_from_json(j.at("optimizer"));
  return r;
}

int run_optimize(const OptimizeRequest& req, const OutputOptions& out_opts, std::ostream& out) {
  prepare_output(out_opts, "result.json");
  const OptimizeOutcome o = optimize_benchmark(req, true);
  write_json(out_opts.dir / "result.json", optimize_record(req, o));
  for (std::size_t k = 0; k < o.runs.size(); ++k) {
    write_trace_csv(out_opts.dir / fmt::format("trace_{:03}.csv", k), o.runs[k]);
  }
  if (o.manifold) {
    write_matrix_csv(out_opts.dir / "best_matrix.csv", o.manifold->best.matrix(),
                     default_names(req.bench.dim));
    write_angles_csv(out_opts.dir / "best_angles.csv", o.manifold->best_angles);
  }
  Json timing;
  timing["total_seconds"] = o.seconds;
  timing["mean_seconds_per_restart"] = o.seconds / static_cast<double>(req.starts);
  write_json(out_opts.dir / "timing.json", timing);
  if (!out_opts.quiet) {
    const auto fb = f_bests(o.runs);
    out << fmt::format("{} ({}, dim {}): min {} (se {}) over {} restarts, best restart {}\n",
                       to_string(req.bench.fn), to_string(req.bench.variant), req.bench.dim,
                       format_console(fb[o.best]), format_console(standard_error(fb)),
                       req.starts, o.best);
  }
  return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateRequest {
  fs::path input;
  LossSpec loss;
  std::size_t starts = 10;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
  unsigned threads = 1;
  bool warm_start = true;
};

int run_estimate(const EstimateRequest& req, const OutputOptions& out_opts, std::ostream& out) {
  if (req.starts == 0) throw InvalidArgument("--starts must be >= 1");
  const DataMatrix X = read_data_csv(req.input);
  prepare_output(out_opts, "run.json");
  const auto t0 = Clock::now();
  const DataMatrix Z = standardize_columns(X);
  const LossSpec resolved = resolve_spec(Z, req.loss);
  const std::size_t p = Z.cols();
  OptimizerConfig cfg = req.optimizer;
  cfg.seed = req.seed;
  cfg = cfg.resolved(angle_dim(p));
  cfg.record_trace = false;
  MultiStartOptions opts;
  opts.threads = req.threads;
  if (req.warm_start) {
    opts.warm_starts.push_back(corr_to_angles(pilot_correlation(Z, req.loss.pilot_shrinkage_floor).C));
  }
  const ManifoldResult mr = minimize_over_corr(make_corr_loss(Z, resolved), p, cfg, req.starts, opts);
  const double seconds = seconds_since(t0);

  write_matrix_csv(out_opts.dir / "corr.csv", mr.best.matrix(), Z.names());
  write_heatmap_csv(out_opts.dir / "heatmap.csv", mr.best.matrix(), Z.names());
  write_angles_csv(out_opts.dir / "best_angles.csv", mr.best_angles);

  Json j = header("estimate");
  j["input"] = req.input.string();
  j["rows"] = X.rows();
  j["cols"] = X.cols();
  j["names"] = X.names();
  j["loss"] = to_json(req.loss);
  j["threshold_used"] = resolved.threshold ? Json(*resolved.threshold) : Json(nullptr);
  j["starts"] = req.starts;
  j["seed"] = req.seed;
  j["threads"] = req.threads;
  j["warm_start"] = req.warm_start ? "pilot" : "none";
  j["optimizer"] = to_json(cfg);
  Json seeds = Json::array();
  for (std::size_t k = 0; k < req.starts; ++k) seeds.push_back(restart_seed(cfg.seed, k));
  j["restart_seeds"] = seeds;
  j["loss_value"] = mr.runs[mr.best_index].f_best;
  j["best_restart"] = mr.best_index;
  Json runs = Json::array();
  for (const auto& r : mr.runs) runs.push_back(run_summary_json(r));
  j["runs"] = runs;
  write_json(out_opts.dir / "run.json", j);

  Json timing;
  timing["total_seconds"] = seconds;
  timing["mean_seconds_per_restart"] = seconds / static_cast<double>(req.starts);
  write_json(out_opts.dir / "timing.json", timing);

  if (!out_opts.quiet) {
    out << fmt::format("{} loss on {}x{} data: objective {}", to_string(req.loss.kind), X.rows(),
                       X.cols(), format_console(mr.runs[mr.best_index].f_best));
    if (resolved.threshold) out << fmt::format(", threshold {}", format_console(*resolved.threshold));
    out << fmt::format(", best restart {}\n", mr.best_index);
  }
  return 0;
}

EstimateRequest estimate_from_record(const Json& j) {
  EstimateRequest r;
  r.input = j.at("input").get<std::string>();
  r.loss = loss_from_json(j.at("loss"));
  r.starts = j.at("starts").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.threads = j.at("threads").get<unsigned>();
  r.warm_start = j.at("warm_start").get<std::string>() == "pilot";
  r.optimizer = optimizer_from_json(j.at("optimizer"));
  return r;
}

// --------------------------------------------------------------- benchmark

struct BenchmarkRequest {
  std::vector<BenchmarkFunction> functions;
  std::vector<std::size_t> dims;
  BenchmarkVariant variant = BenchmarkVariant::kCorr;
  std::size_t starts = 10;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
  unsigned threads = 1;
};

int run_benchmark(const BenchmarkRequest& req, const OutputOptions& out_opts, std::ostream& out) {
  if (req.functions.empty() || req.dims.empty()) {
    throw InvalidArgument("benchmark needs at least one function and one dimension");
  }
  prepare_output(out_opts, "benchmark.json");
  Json j = header("benchmark");
  Json fns = Json::array();
  for (auto f : req.functions) fns.push_back(std::string(to_string(f)));
  j["functions"] = fns;
  j["dims"] = req.dims;
  j["variant"] = std::string(to_string(req.variant));
  j["starts"] = req.starts;
  j["seed"] = req.seed;
  j["threads"] = req.threads;
  j["optimizer"] = to_json(req.optimizer);
  Json cells = Json::array();
  Json timing_cells = Json::array();
  std::string table = "function,dim,min_value,mean_value,se\n";
  for (auto fn : req.functions) {
    for (auto dim : req.dims) {
      OptimizeRequest oreq;
      oreq.bench = {fn, req.variant, dim, 0.0};
      oreq.starts = req.starts;
      oreq.seed = req.seed;
      oreq.optimizer = req.optimizer;
      oreq.threads = req.threads;
      const OptimizeOutcome o = optimize_benchmark(oreq, false);
      const auto fb = f_bests(o.runs);
      Json c;
      c["function"] = std::string(to_string(fn));
      c["dim"] = dim;
      c["min_value"] = fb[o.best];
      c["mean_value"] = mean(fb);
      c["se"] = standard_error(fb);
      c["best_restart"] = o.best;
      c["f_best"] = fb;
      c["optimizer"] = to_json(o.config);
      cells.push_back(c);
      timing_cells.push_back({{"function", std::string(to_string(fn))},
                              {"dim", dim},
                              {"total_seconds", o.seconds},
                              {"mean_seconds_per_restart", o.seconds / static_cast<double>(req.starts)}});
      table += fmt::format("{},{},{},{},{}\n", to_string(fn), dim, format_machine(fb[o.best]),
                           format_machine(mean(fb)), format_machine(standard_error(fb)));
      if (!out_opts.quiet) {
        out << fmt::format("{:<11} dim {:>3}: min {:>10} mean {:>10} se {:>10}\n", to_string(fn),
                           dim, format_console(fb[o.best]), format_console(mean(fb)),
                           format_console(standard_error(fb)));
      }
    }
  }
  j["cells"] = cells;
  write_text_file(out_opts.dir / "benchmark_table.csv", table);
  write_json(out_opts.dir / "benchmark.json", j);
  write_json(out_opts.dir / "timing.json", Json{{"cells", timing_cells}});
  return 0;
}

BenchmarkRequest benchmark_from_record(const Json& j) {
  BenchmarkRequest r;
  for (const auto& f : j.at("functions")) r.functions.push_back(parse_benchmark_function(f.get<std::string>()));
  r.dims = j.at("dims").get<std::vector<std::size_t>>();
  r.variant = parse_benchmark_variant(j.at("variant").get<std::string>());
  r.starts = j.at("starts").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.threads = j.at("threads").get<unsigned>();
  r.optimizer = optimizer_from_json(j.at("optimizer"));
  return r;
}

// ---------------------------------------------------------------- simulate

int run_simulate(const ScenarioSpec& spec, const OutputOptions& out_opts, std::ostream& out) {
  spec.validate();
  prepare_output(out_opts, "scenario.json");
  const auto t0 = Clock::now();
  const ScenarioResult res = run_scenario(spec);
  const double seconds = seconds_since(t0);

  std::string table = "loss,mean_rmse,se\n";
  Json summary = Json::array();
  Json timing_losses = Json::array();
  for (const auto& s : res.summary) {
    table += fmt::format("{},{},{}\n", to_string(s.loss), format_machine(s.mean_rmse),
                         format_machine(s.se));
    summary.push_back({{"loss", std::string(to_string(s.loss))},
                       {"mean_rmse", s.mean_rmse},
                       {"se", s.se}});
    timing_losses.push_back({{"loss", std::string(to_string(s.loss))},
                             {"mean_runtime_seconds", s.mean_runtime_seconds}});
  }
  Json cells = Json::array();
  Json timing_cells = Json::array();
  for (const auto& c : res.cells) {
    cells.push_back({{"replicate", c.replicate},
                     {"loss_index", c.loss_index},
                     {"loss", std::string(to_string(c.loss))},
                     {"threshold", c.threshold},
                     {"rmse", c.rmse},
                     {"f_best", c.f_best},
                     {"best_start", c.best_start}});
    timing_cells.push_back({{"replicate", c.replicate},
                            {"loss_index", c.loss_index},
                            {"runtime_seconds", c.runtime_seconds}});
  }
  Json j = header("simulate");
  j["scenario"] = to_json(spec);
  j["replicate_seeds"] = res.replicate_seeds;
  j["summary"] = summary;
  j["cells"] = cells;
  write_text_file(out_opts.dir / "rmse_table.csv", table);
  write_json(out_opts.dir / "scenario.json", j);
  write_json(out_opts.dir / "timing.json",
             Json{{"total_seconds", seconds}, {"losses", timing_losses}, {"cells", timing_cells}});

  if (!out_opts.quiet) {
    out << fmt::format("{} / {} / {}, p={}, n={}, {} replicates\n", to_string(spec.structure.kind),
                       to_string(spec.distribution.kind), to_string(spec.contamination.kind),
                       spec.p(), spec.n, spec.replicates);
    for (const auto& s : res.summary) {
      out << fmt::format("  {:<10} rmse {} (se {})\n", to_string(s.loss),
                         format_console(s.mean_rmse), format_console(s.se));
    }
  }
  return 0;
}

// ---------------------------------------------------------- outlier-report

int run_outlier_report(const fs::path& input, const OutputOptions& out_opts, std::ostream& out) {
  const DataMatrix X = read_data_csv(input);
  prepare_output(out_opts, "report.json");
  const auto report = outlier_report(X);
  std::string table = "variable,q1,q3,lower_fence,upper_fence,outliers\n";
  Json cols = Json::array();
  for (const auto& c : report) {
    table += fmt::format("{},{},{},{},{},{}\n", c.name, format_machine(c.q1), format_machine(c.q3),
                         format_machine(c.lower_fence), format_machine(c.upper_fence), c.count);
    cols.push_back({{"variable", c.name},
                    {"q1", c.q1},
                    {"q3", c.q3},
                    {"lower_fence", c.lower_fence},
                    {"upper_fence", c.upper_fence},
                    {"outliers", c.count}});
  }
  Json j = header("outlier-report");
  j["input"] = input.string();
  j["rows"] = X.rows();
  j["cols"] = X.cols();
  j["columns"] = cols;
  write_text_file(out_opts.dir / "outliers.csv", table);
  write_json(out_opts.dir / "report.json", j);
  if (!out_opts.quiet) {
    for (const auto& c : report) out << fmt::format("{:<16} {}\n", c.name, c.count);
  }
  return 0;
}

// ------------------------------------------------------------------ replay

int run_replay(const fs::path& record, const OutputOptions& out_opts, std::ostream& out) {
  Json j;
  try {
    j = Json::parse(read_text_file(record));
  } catch (const Json::parse_error& e) {
    throw ParseError(fmt::format("'{}' is not valid JSON: {}", record.string(), e.what()));
  }
  if (!j.is_object() || j.value("tool", "") != kTool) {
    throw InvalidArgument(fmt::format("'{}' is not a run record", record.string()));
  }
  const std::string command = j.at("command").get<std::string>();
  if (command == "optimize") return run_optimize(optimize_from_record(j), out_opts, out);
  if (command == "estimate") return run_estimate(estimate_from_record(j), out_opts, out);
  if (command == "benchmark") return run_benchmark(benchmark_from_record(j), out_opts, out);
  if (command == "simulate") return run_simulate(scenario_from_json(j.at("scenario")), out_opts, out);
  if (command == "outlier-report") return run_outlier_report(j.at("input").get<std::string>(), out_opts, out);
  throw InvalidArgument(fmt::format("unknown command '{}' in record", command));
}

// --------------------------------------------------------------- arguments

struct OptimizerFlags {
  double s_init = 0, p_init = 0, s_inc = 0, s_dec = 0, p_inc = 0, p_dec = 0, c = 0, epsilon = 0;
  int m = 0;
  std::size_t max_iters = 0, window = 0;
  std::string radius;
  std::vector<std::pair<CLI::Option*, std::function<void(OptimizerConfig&)>>> setters;
  CLI::Option* no_explore = nullptr;

  void add(CLI::App& app) {
    auto real = [&](const char* name, double& v, double OptimizerConfig::*field, const char* help) {
      setters.emplace_back(app.add_option(name, v, help), [&v, field](OptimizerConfig& c) { c.*field = v; });
    };
    real("--s-init", s_init, &OptimizerConfig::s_init, "initial step size");
    real("--s-inc", s_inc, &OptimizerConfig::s_inc, "step growth factor");
    real("--s-dec", s_dec, &OptimizerConfig::s_dec, "step shrink factor");
    real("--p-inc", p_inc, &OptimizerConfig::p_inc, "probability growth factor");
    real("--p-dec", p_dec, &OptimizerConfig::p_dec, "probability shrink factor");
    real("--epsilon", epsilon, &OptimizerConfig::epsilon, "stagnation tolerance (0 disables)");
    setters.emplace_back(app.add_option("--p-init", p_init, "initial direction probability"),
                         [this](OptimizerConfig& c) { c.p_init = p_init; });
    setters.emplace_back(app.add_option("--c", c, "exploration temperature"),
                         [this](OptimizerConfig& cfg) { cfg.c = c; });
    setters.emplace_back(app.add_option("--m", m, "1/m is the exploration rate"),
                         [this](OptimizerConfig& c) { c.m = m; });
    setters.emplace_back(app.add_option("--max-iters", max_iters, "iteration budget"),
                         [this](OptimizerConfig& c) { c.max_iterations = max_iters; });
    setters.emplace_back(app.add_option("--stagnation-window", window, "stagnation window"),
                         [this](OptimizerConfig& c) { c.stagnation_window = window; });
    setters.emplace_back(app.add_option("--radius", radius, "exploration radius: dynamic or a number"),
                         [this](OptimizerConfig& c) {
                           if (radius == "dynamic") {
                             c.fixed_radius.reset();
                             return;
                           }
                           try {
                             std::size_t used = 0;
                             c.fixed_radius = std::stod(radius, &used);
                             if (used != radius.size()) throw std::invalid_argument(radius);
                           } catch (const std::exception&) {
                             throw InvalidArgument(fmt::format("--radius: '{}' is not a number", radius));
                           }
                         });
    no_explore = app.add_flag("--no-explore", "disable exploration (plain adaptive descent)");
  }

  void apply(OptimizerConfig& c) const {
    for (const auto& [opt, set] : setters) {
      if (opt->count() > 0) set(c);
    }
    if (no_explore->count() > 0) c.explore_enabled = false;
    c.validate();
  }
};

void add_output(CLI::App& app, OutputOptions& o) {
  app.add_option("--out", o.dir, "output directory")->required();
  app.add_flag("--force", o.force, "overwrite an existing run record");
  app.add_flag("-q,--quiet", o.quiet, "no console summary");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::vector<std::string>& items, Parse parse) {
  std::vector<T> out;
  for (const auto& s : items) out.push_back(parse(s));
  return out;
}

OptimizerConfig base_optimizer(const std::string& config_path) {
  return config_path.empty() ? OptimizerConfig{} : load_optimizer_config(config_path);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Global adaptive stochastic descent: box optimization and robust correlation estimation",
               kTool};
  app.require_subcommand(1);

  // optimize
  auto* opt_cmd = app.add_subcommand("optimize", "minimize a benchmark function");
  std::string opt_fn, opt_variant = "corr", opt_config;
  std::size_t opt_dim = 5;
  double opt_scale = 0.0;
  OptimizeRequest opt_req;
  OptimizerFlags opt_flags;
  OutputOptions opt_out;
  opt_cmd->add_option("--fn", opt_fn, "ackley|griewank|rastrigin|rosenbrock|sumsquares")->required();
  opt_cmd->add_option("--variant", opt_variant, "box|corr")->capture_default_str();
  opt_cmd->add_option("--M,--dim", opt_dim, "matrix size (corr) or box dimension")->capture_default_str();
  opt_cmd->add_option("--scale", opt_scale, "correlation multiplier (corr variant)");
  opt_cmd->add_option("--starts", opt_req.starts, "restarts")->capture_default_str();
  opt_cmd->add_option("--seed", opt_req.seed, "master seed")->capture_default_str();
  opt_cmd->add_option("--threads", opt_req.threads, "worker threads (0 = all cores)")->capture_default_str();
  opt_cmd->add_option("--config", opt_config, "optimizer config file");
  opt_flags.add(*opt_cmd);
  add_output(*opt_cmd, opt_out);

  // estimate
  auto* est_cmd = app.add_subcommand("estimate", "robust correlation matrix of a CSV data set");
  std::string est_input, est_loss = "gaussian", est_threshold = "iqr", est_config, est_warm = "pilot";
  EstimateRequest est_req;
  OptimizerFlags est_flags;
  OutputOptions est_out;
  est_cmd->add_option("input", est_input, "data CSV")->required();
  est_cmd->add_option("--loss", est_loss, "gaussian|huber|truncated|tukey")->capture_default_str();
  est_cmd->add_option("--threshold", est_threshold, "iqr or a d^2-scale number")->capture_default_str();
  est_cmd->add_option("--iqr-multiplier", est_req.loss.iqr_multiplier, "fence multiplier")->capture_default_str();
  est_cmd->add_option("--pilot-floor", est_req.loss.pilot_shrinkage_floor, "pilot min eigenvalue")
      ->capture_default_str();
  est_cmd->add_option("--warm-start", est_warm, "pilot|none")->capture_default_str();
  est_cmd->add_option("--starts", est_req.starts, "restarts")->capture_default_str();
  est_cmd->add_option("--seed", est_req.seed, "master seed")->capture_default_str();
  est_cmd->add_option("--threads", est_req.threads, "worker threads (0 = all cores)")->capture_default_str();
  est_cmd->add_option("--config", est_config, "optimizer config file");
  est_flags.add(*est_cmd);
  add_output(*est_cmd, est_out);

  // benchmark
  auto* bench_cmd = app.add_subcommand("benchmark", "sweep benchmark functions over dimensions");
  std::vector<std::string> bench_fns{"ackley", "griewank", "rastrigin", "rosenbrock", "sumsquares"};
  std::string bench_variant = "corr", bench_config;
  BenchmarkRequest bench_req;
  bench_req.dims = {5};
  OptimizerFlags bench_flags;
  OutputOptions bench_out;
  bench_cmd->add_option("--fn", bench_fns, "functions")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--M,--dim", bench_req.dims, "dimensions")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--variant", bench_variant, "box|corr")->capture_default_str();
  bench_cmd->add_option("--starts", bench_req.starts, "restarts per cell")->capture_default_str();
  bench_cmd->add_option("--seed", bench_req.seed, "master seed")->capture_default_str();
  bench_cmd->add_option("--threads", bench_req.threads, "worker threads (0 = all cores)")->capture_default_str();
  bench_cmd->add_option("--config", bench_config, "optimizer config file");
  bench_flags.add(*bench_cmd);
  add_output(*bench_cmd, bench_out);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run a contamination scenario");
  std::string sim_config;
  std::uint64_t sim_seed = 0;
  std::size_t sim_reps = 0, sim_starts = 0, sim_n = 0;
  unsigned sim_threads = 1;
  OptimizerFlags sim_flags;
  OutputOptions sim_out;
  sim_cmd->add_option("--config", sim_config, "scenario config file")->required();
  auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "master seed");
  auto* sim_reps_opt = sim_cmd->add_option("--replicates", sim_reps, "replicates");
  auto* sim_starts_opt = sim_cmd->add_option("--starts", sim_starts, "restarts per estimate");
  auto* sim_n_opt = sim_cmd->add_option("--n", sim_n, "sample size");
  auto* sim_threads_opt = sim_cmd->add_option("--threads", sim_threads, "worker threads (0 = all cores)");
  std::string sim_loss, sim_threshold;
  auto* sim_loss_opt = sim_cmd->add_option("--loss", sim_loss, "comma list of losses");
  auto* sim_thr_opt = sim_cmd->add_option("--threshold", sim_threshold, "iqr or a d^2-scale number");
  sim_flags.add(*sim_cmd);
  add_output(*sim_cmd, sim_out);

  // outlier-report
  auto* out_cmd = app.add_subcommand("outlier-report", "per-variable IQR outlier counts");
  std::string outlier_input;
  OutputOptions outlier_out;
  out_cmd->add_option("input", outlier_input, "data CSV")->required();
  add_output(*out_cmd, outlier_out);

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "re-run a command from its JSON record");
  std::string replay_record;
  OutputOptions replay_out;
  replay_cmd->add_option("record", replay_record, "result.json, run.json, benchmark.json, scenario.json or report.json")
      ->required();
  add_output(*replay_cmd, replay_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (opt_cmd->parsed()) {
      opt_req.bench.fn = parse_benchmark_function(opt_fn);
      opt_req.bench.variant = parse_benchmark_variant(opt_variant);
      opt_req.bench.dim = opt_dim;
      if (opt_scale < 0.0) throw InvalidArgument("--scale must be positive");
      opt_req.bench.scale = opt_scale;
      opt_req.optimizer = base_optimizer(opt_config);
      opt_flags.apply(opt_req.optimizer);
      return run_optimize(opt_req, opt_out, out);
    }
    if (est_cmd->parsed()) {
      est_req.input = est_input;
      est_req.loss.kind = parse_loss_kind(est_loss);
      est_req.loss.threshold =
          est_req.loss.kind == LossKind::kGaussian ? std::nullopt : parse_threshold(est_threshold);
      if (est_warm != "pilot" && est_warm != "none") throw InvalidArgument("--warm-start must be pilot or none");
      est_req.warm_start = est_warm == "pilot";
      est_req.optimizer = base_optimizer(est_config);
      est_flags.apply(est_req.optimizer);
      return run_estimate(est_req, est_out, out);
    }
    if (bench_cmd->parsed()) {
      bench_req.functions = parse_list<BenchmarkFunction>(
          bench_fns, [](const std::string& s) { return parse_benchmark_function(s); });
      bench_req.variant = parse_benchmark_variant(bench_variant);
      bench_req.optimizer = base_optimizer(bench_config);
      bench_flags.apply(bench_req.optimizer);
      return run_benchmark(bench_req, bench_out, out);
    }
    if (sim_cmd->parsed()) {
      ScenarioSpec spec = load_scenario_config(sim_config);
      if (sim_seed_opt->count()) spec.master_seed = sim_seed;
      if (sim_reps_opt->count()) spec.replicates = sim_reps;
      if (sim_starts_opt->count()) spec.n_starts = sim_starts;
      if (sim_n_opt->count()) spec.n = sim_n;
      if (sim_threads_opt->count()) spec.threads = sim_threads;
      if (sim_loss_opt->count()) {
        const LossSpec proto = spec.losses.empty() ? LossSpec{} : spec.losses.front();
        spec.losses.clear();
        std::stringstream ss(sim_loss);
        std::string item;
        while (std::getline(ss, item, ',')) {
          LossSpec l = proto;
          l.kind = parse_loss_kind(item);
          spec.losses.push_back(l);
        }
      }
      if (sim_thr_opt->count()) {
        const auto t = parse_threshold(sim_threshold);
        for (auto& l : spec.losses) l.threshold = l.kind == LossKind::kGaussian ? std::nullopt : t;
      }
      sim_flags.apply(spec.optimizer);
      return run_simulate(spec, sim_out, out);
    }
    if (out_cmd->parsed()) return run_outlier_report(outlier_input, outlier_out, out);
    if (replay_cmd->parsed()) return run_replay(replay_record, replay_out, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    err << "error: malformed record: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace glasd
