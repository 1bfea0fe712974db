// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/core.h>

#include "glasd/benchmarks.hpp"
#include "glasd/box_optimizer.hpp"
#include "glasd/cli.hpp"
#include "glasd/corr_manifold.hpp"
#include "glasd/errors.hpp"
#include "glasd/io.hpp"
#include "glasd/robust_losses.hpp"
#include "glasd/sim_harness.hpp"

using namespace glasd;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> uniform_in(const BoxDomain& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(box.dim());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = box.lower(i) + box.width(i) * u(rng);
  return x;
}

Outcome bijection_round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  double angle_err = 0.0, matrix_err = 0.0;
  std::size_t refactor_failures = 0;
  for (std::size_t M : {2u, 3u, 5u, 10u, 20u}) {
    const BoxDomain box = default_angle_box(M);
    for (int t = 0; t < 1000; ++t) {
      const AngleVector a{M, uniform_in(box, rng)};
      const auto C = angles_to_corr(a);
      const auto back = corr_to_angles(C);
      for (std::size_t i = 0; i < a.angles.size(); ++i)
        angle_err = std::max(angle_err, std::abs(back.angles[i] - a.angles[i]));
      // C -> angles -> C from a matrix that did not come with a factor
      try {
        const auto plain = CorrelationMatrix::from_matrix(C.matrix());
        const auto again = angles_to_corr(corr_to_angles(plain));
        matrix_err = std::max(matrix_err, (again.matrix() - plain.matrix()).cwiseAbs().maxCoeff());
      } catch (const NotPositiveDefinite&) {
        ++refactor_failures;
      }
    }
  }
  const double secs = elapsed(t0);
  return {angle_err <= 1e-8 && matrix_err <= 1e-8 && refactor_failures == 0 && secs < 30.0,
          fmt::format("max angle error {:.3g}, max entry error {:.3g}, {} matrices not "
                      "refactorable, {:.1f} s",
                      angle_err, matrix_err, refactor_failures, secs)};
}

Outcome manifold_validity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  const std::size_t dims[] = {2, 3, 5, 10, 20};
  std::size_t failures = 0, indefinite = 0;
  double worst_diag = 0.0, smallest_eig = 1.0;
  for (int t = 0; t < 100000; ++t) {
    const std::size_t M = dims[t % 5];
    const auto C = angles_to_corr({M, uniform_in(default_angle_box(M), rng)}).matrix();
    const double diag = (C.diagonal().array() - 1.0).abs().maxCoeff();
    const double eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C, Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .minCoeff();
    worst_diag = std::max(worst_diag, diag);
    smallest_eig = std::min(smallest_eig, eig);
    if (!(C == C.transpose()) || diag > 1e-12 || !(eig > 0.0)) {
      ++failures;
      // diagnostic only: rounding error of the solver versus a truly indefinite stored matrix
      using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
      const MatrixXld Cl = C.cast<long double>();
      if (!(Eigen::SelfAdjointEigenSolver<MatrixXld>(Cl, Eigen::EigenvaluesOnly)
                .eigenvalues()
                .minCoeff() > 0.0L))
        ++indefinite;
    }
  }
  const double secs = elapsed(t0);
  return {failures == 0 && secs < 60.0,
          fmt::format("{} failures in 1e5 ({} also indefinite in long double), max diagonal error "
                      "{:.3g}, smallest eigenvalue {:.3g}, {:.1f} s",
                      failures, indefinite, worst_diag, smallest_eig, secs)};
}

Outcome convex_sanity() {
  const auto t0 = Clock::now();
  const BoxDomain box = benchmark_box(BenchmarkFunction::kSumsquares, 10);
  int hits = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    OptimizerConfig cfg;
    cfg.seed = seed;
    cfg.record_trace = false;
    const auto r = glasd_minimize(sumsquares, box, cfg);
    if (r.f_best <= 1e-6) ++hits;
    worst = std::max(worst, r.f_best);
  }
  const double secs = elapsed(t0);
  return {hits >= 9 && secs < 10.0,
          fmt::format("{}/10 seeds reach 1e-6 (worst f_best {:.3g}), {:.2f} s", hits, worst, secs)};
}

Outcome table_brackets() {
  const auto t0 = Clock::now();
  struct Row {
    BenchmarkFunction fn;
    double bracket;
    double value = 0.0;
  };
  std::vector<Row> rows{{BenchmarkFunction::kAckley, 0.5},
                        {BenchmarkFunction::kRastrigin, 30.0},
                        {BenchmarkFunction::kRosenbrock, 1.0}};
  bool ok = true;
  std::string detail;
  for (auto& row : rows) {
    const BenchmarkSpec spec{row.fn, BenchmarkVariant::kCorr, 5};
    OptimizerConfig cfg;  // defaults, master seed 0
    cfg.record_trace = false;
    const auto res = minimize_over_corr(
        [&](const CorrelationMatrix& C) { return eval_benchmark(spec, C); }, 5, cfg, 10);
    row.value = res.runs[res.best_index].f_best;
    ok = ok && row.value <= row.bracket;
    detail += fmt::format("{} {:.3g} (<= {}), ", to_string(row.fn), row.value, row.bracket);
  }
  const double secs = elapsed(t0);
  return {ok && secs < 300.0, detail + fmt::format("{:.1f} s", secs)};
}

Outcome loss_values() {
  std::vector<std::pair<double, double>> checks;
  const DataMatrix one(Eigen::MatrixXd{{3, 4}, {0, 0}});
  checks.emplace_back(loss_gaussian(one, CorrelationMatrix::identity(2)), 12.5);
  Eigen::MatrixXd c(2, 2);
  c << 1.0, 0.5, 0.5, 1.0;
  checks.emplace_back(
      mahalanobis_sq_all(DataMatrix(Eigen::MatrixXd{{1, 1}, {0, 0}}), CorrelationMatrix::from_matrix(c))(0),
      4.0 / 3.0);
  checks.emplace_back(rho_huber(9.0, 4.0), 8.0);
  checks.emplace_back(rho_tukey(4.5, 3.0), 1.3125);
  checks.emplace_back(loss_robust(one, CorrelationMatrix::identity(2), {LossKind::kTruncated, 5.0}), 2.5);
  checks.emplace_back(iqr_threshold(std::vector<double>{1, 2, 3, 4}), 7.75);
  double worst = 0.0;
  for (const auto& [got, want] : checks) worst = std::max(worst, std::abs(got - want));
  return {worst <= 1e-12, fmt::format("6 values, max deviation {:.3g}", worst)};
}

ScenarioSpec table_scenario() {
  ScenarioSpec spec;
  spec.structure.p = 20;
  spec.n = 100;
  spec.replicates = 10;
  spec.n_starts = 10;
  spec.master_seed = 0;
  return spec;
}

const LossSummary& summary_for(const ScenarioResult& r, LossKind k) {
  return *std::find_if(r.summary.begin(), r.summary.end(),
                       [k](const LossSummary& s) { return s.loss == k; });
}

Outcome row_contamination() {
  const auto t0 = Clock::now();
  ScenarioSpec spec = table_scenario();
  spec.structure.kind = StructureKind::kSparseUniform;
  spec.contamination = ContaminationSpec::defaults(ContaminationKind::kRows);
  spec.losses = {LossSpec{}, LossSpec{LossKind::kHuber, std::nullopt}};
  const auto res = run_scenario(spec);
  const auto& g = summary_for(res, LossKind::kGaussian);
  const auto& h = summary_for(res, LossKind::kHuber);
  const double pooled = std::sqrt(g.se * g.se + h.se * h.se);
  const double secs = elapsed(t0);
  return {h.mean_rmse < g.mean_rmse && g.mean_rmse - h.mean_rmse > pooled && secs < 1800.0,
          fmt::format("huber {:.4f} (se {:.4f}) vs gaussian {:.4f} (se {:.4f}), pooled se {:.4f}, "
                      "{:.1f} s",
                      h.mean_rmse, h.se, g.mean_rmse, g.se, pooled, secs)};
}

Outcome heavy_tails() {
  const auto t0 = Clock::now();
  ScenarioSpec spec = table_scenario();
  spec.structure.kind = StructureKind::kBlockToeplitz;
  spec.distribution = {DistributionKind::kStudentT, 3.0};
  spec.losses = {LossSpec{}, LossSpec{LossKind::kTruncated, std::nullopt}};
  const auto res = run_scenario(spec);
  const auto& g = summary_for(res, LossKind::kGaussian);
  const auto& t = summary_for(res, LossKind::kTruncated);
  const double secs = elapsed(t0);
  return {t.mean_rmse < g.mean_rmse && secs < 1800.0,
          fmt::format("truncated {:.4f} (se {:.4f}) vs gaussian {:.4f} (se {:.4f}), {:.1f} s",
                      t.mean_rmse, t.se, g.mean_rmse, g.se, secs)};
}

Outcome geometric_decay() {
  const std::vector<double> eig{1.0, 3.25, 5.5, 7.75, 10.0};
  const Objective f = [&](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += eig[i] * x[i] * x[i];
    return 0.5 * s;
  };
  const BoxDomain box = BoxDomain::uniform(5, -10.0, 10.0);
  const std::vector<double> x0{5.0, -4.0, 3.0, -2.0, 6.0};

  std::vector<std::vector<double>> paths;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    OptimizerConfig cfg;
    cfg.seed = seed;
    cfg.record_trace = false;
    std::vector<double> logs{std::log(f(x0))};
    asd_minimize(f, box, x0, cfg, [&](const IterationInfo& info) {
      if (info.accepted && info.f_current > 0.0) logs.push_back(std::log(info.f_current));
    });
    paths.push_back(std::move(logs));
  }
  std::size_t K = paths.front().size();
  for (const auto& p : paths) K = std::min(K, p.size());

  std::vector<double> med(K);
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> col;
    for (const auto& p : paths) col.push_back(p[k]);
    std::nth_element(col.begin(), col.begin() + 10, col.end());
    const double hi = col[10];
    std::nth_element(col.begin(), col.begin() + 9, col.begin() + 10);
    med[k] = 0.5 * (col[9] + hi);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const double x = static_cast<double>(k);
    sx += x;
    sy += med[k];
    sxx += x * x;
    sxy += x * med[k];
  }
  const double n = static_cast<double>(K);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (std::size_t k = 0; k < K; ++k) {
    const double fit = icept + slope * static_cast<double>(k);
    ss_res += (med[k] - fit) * (med[k] - fit);
    ss_tot += (med[k] - ybar) * (med[k] - ybar);
  }
  const double r2 = 1.0 - ss_res / ss_tot;
  return {slope < 0.0 && r2 >= 0.9,
          fmt::format("{} accepted steps in the common prefix, slope {:.4f}, R^2 {:.4f}", K, slope,
                      r2)};
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "glasd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  const auto t0 = Clock::now();
  const fs::path root = fs::temp_directory_path() / "glasd_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  Rng rng(5);
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(4, 4);
  C(0, 1) = C(1, 0) = 0.5;
  C(2, 3) = C(3, 2) = -0.3;
  Eigen::MatrixXd X = sample_data(CorrelationMatrix::from_matrix(C), 80, {}, rng).values();
  X.row(3).array() += 50.0;
  std::string csv = "a,b,c,d\n";
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    csv += fmt::format("{},{},{},{}\n", format_machine(X(i, 0)), format_machine(X(i, 1)),
                       format_machine(X(i, 2)), format_machine(X(i, 3)));
  write_text_file(root / "data.csv", csv);
  write_text_file(root / "scenario.ini",
                  "[scenario]\nseed = 5\nreplicates = 2\nstarts = 2\nn = 50\n"
                  "[structure]\nkind = sparse-uniform\np = 5\n"
                  "[contamination]\nkind = random\n"
                  "[optimizer]\nmax_iters = 300\n");

  const std::string data = (root / "data.csv").string();
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"optimize-corr", {"optimize", "--fn", "griewank", "--M", "4", "--starts", "3", "--seed", "9",
                         "--threads", "2", "--max-iters", "600"}},
      {"optimize-box", {"optimize", "--fn", "rosenbrock", "--variant", "box", "--dim", "3",
                        "--starts", "2", "--seed", "9"}},
      {"estimate", {"estimate", data, "--loss", "tukey", "--threshold", "iqr", "--starts", "3",
                    "--seed", "9", "--max-iters", "800"}},
      {"benchmark", {"benchmark", "--fn", "ackley,sumsquares", "--M", "3", "--starts", "2",
                     "--max-iters", "200"}},
      {"simulate", {"simulate", "--config", (root / "scenario.ini").string(), "--threads", "2"}},
      {"outlier-report", {"outlier-report", data}},
  };

  std::size_t files = 0;
  std::vector<std::string> problems;
  for (const auto& [name, args] : commands) {
    std::vector<fs::path> dirs;
    for (const char* tag : {"first", "second"}) {
      dirs.push_back(root / name / tag);
      auto a = args;
      a.insert(a.end(), {"--out", dirs.back().string(), "-q"});
      if (cli(a) != 0) problems.push_back(name + " failed");
    }
    if (!problems.empty()) continue;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto file = entry.path().filename();
      if (file == "timing.json") continue;
      ++files;
      if (read_text_file(dirs[0] / file) != read_text_file(dirs[1] / file))
        problems.push_back(name + "/" + file.string());
    }
  }
  const double secs = elapsed(t0);
  std::string detail = fmt::format("{} output files compared across 6 commands", files);
  for (const auto& p : problems) detail += ", differs: " + p;
  return {problems.empty() && files > 0, detail + fmt::format(", {:.1f} s", secs)};
}

Outcome fuzz_invariants() {
  const double pi = std::numbers::pi;
  const std::vector<std::pair<std::string, Objective>> objectives{
      {"sphere", [](std::span<const double> x) {
         double s = 0;
         for (double v : x) s += v * v;
         return s;
       }},
      {"rastrigin", [](std::span<const double> x) { return rastrigin(x); }},
      {"shifted-ackley", [](std::span<const double> x) {
         std::vector<double> y(x.begin(), x.end());
         for (double& v : y) v -= 0.7;
         return ackley(y);
       }},
      {"step", [](std::span<const double> x) {
         double s = 0;
         for (double v : x) s += std::floor(std::abs(3 * v));
         return s;
       }},
      {"wave", [pi](std::span<const double> x) {
         double s = 0;
         for (std::size_t i = 0; i < x.size(); ++i) s += std::sin(pi * x[i] * (i + 1)) + 0.01 * x[i];
         return s;
       }},
  };
  const std::vector<BoxDomain> domains{
      BoxDomain::uniform(2, -5.0, 5.0),
      BoxDomain::uniform(6, 0.0, 1e-3),
      BoxDomain({-1.0, 0.0, 100.0}, {1.0, 1e-9, 1000.0}),
      default_angle_box(4),
  };

  std::size_t cases = 0, violations = 0;
  std::string first;
  auto flag = [&](const std::string& what) {
    if (violations++ == 0) first = what;
  };
  for (std::size_t o = 0; o < objectives.size(); ++o) {
    for (std::size_t d = 0; d < domains.size(); ++d) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ++cases;
        const auto& [name, f] = objectives[o];
        const BoxDomain& box = domains[d];
        OptimizerConfig cfg;
        cfg.seed = seed * 1000 + o * 10 + d;
        cfg.max_iterations = 1500;
        if (seed % 2 == 1) cfg.fixed_radius = 0.05 * box.width(0);
        if (seed == 4) cfg.explore_enabled = false;
        double last_best = std::numeric_limits<double>::infinity();
        double min_seen = std::numeric_limits<double>::infinity();
        const std::string tag = fmt::format("{} on domain {} seed {}", name, d, seed);
        const auto r = glasd_minimize(f, box, cfg, [&](const IterationInfo& info) {
          if (!box.strictly_contains(info.proposal)) flag(tag + ": proposal outside");
          if (!box.strictly_contains(info.x)) flag(tag + ": iterate outside");
          if (info.f_best > last_best) flag(tag + ": best increased");
          min_seen = std::min(min_seen, info.f_proposal);
          last_best = info.f_best;
        });
        if (!box.strictly_contains(r.x_best)) flag(tag + ": best point outside");
        if (r.f_best != f(r.x_best)) flag(tag + ": best value does not match its point");
        if (r.f_best > min_seen) flag(tag + ": best above an evaluated value");
        for (std::size_t k = 1; k < r.trace.size(); ++k)
          if (r.trace[k].f_best > r.trace[k - 1].f_best) flag(tag + ": trace increased");
      }
    }
  }
  return {violations == 0 && cases == 100,
          fmt::format("{} cases, {} violations{}", cases, violations,
                      violations ? " (first: " + first + ")" : "")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 bijection round trip", bijection_round_trip},
      {"2 manifold validity", manifold_validity},
      {"3 convex sanity", convex_sanity},
      {"4 benchmark brackets", table_brackets},
      {"5 loss unit values", loss_values},
      {"6 row contamination ordering", row_contamination},
      {"7 heavy-tail ordering", heavy_tails},
      {"8 ASD geometric decay", geometric_decay},
      {"9 determinism", determinism},
      {"10 fuzzed invariants", fuzz_invariants},
  };
  std::vector<bool> selected(criteria.size(), argc < 2);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[k - 1] = true;
  }
  int failed = 0, ran = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    if (!selected[c]) continue;
    ++ran;
    const auto& [name, run] = criteria[c];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << fmt::format("{}/{} criteria passed", ran - failed, ran)
            << std::endl;
  return failed == 0 ? 0 : 1;
}
