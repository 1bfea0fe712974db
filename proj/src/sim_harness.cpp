#include "glasd/sim_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iterator>
#include <numeric>
#include <optional>
#include <random>

#include <fmt/core.h>

#include "glasd/errors.hpp"
#include "glasd/parallel.hpp"

namespace glasd {

namespace {

std::vector<std::size_t> choose(std::size_t population, std::size_t k, Rng& rng) {
  std::vector<std::size_t> all(population);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> out;
  out.reserve(k);
  std::sample(all.begin(), all.end(), std::back_inserter(out), k, rng);
  return out;
}

std::size_t round_count(double share, std::size_t total) {
  return static_cast<std::size_t>(std::llround(share * static_cast<double>(total)));
}

}  // namespace

std::string_view to_string(StructureKind k) {
  switch (k) {
    case StructureKind::kRandomDense:
      return "random-dense";
    case StructureKind::kSparseUniform:
      return "sparse-uniform";
    case StructureKind::kBlockToeplitz:
      return "block-toeplitz";
  }
  return "unknown";
}

std::string_view to_string(DistributionKind k) {
  return k == DistributionKind::kGaussian ? "gaussian" : "t";
}

std::string_view to_string(ContaminationKind k) {
  switch (k) {
    case ContaminationKind::kNone:
      return "none";
    case ContaminationKind::kRows:
      return "rows";
    case ContaminationKind::kColumns:
      return "columns";
    case ContaminationKind::kRandom:
      return "random";
  }
  return "unknown";
}

StructureKind parse_structure_kind(std::string_view s) {
  if (s == "random-dense") return StructureKind::kRandomDense;
  if (s == "sparse-uniform") return StructureKind::kSparseUniform;
  if (s == "block-toeplitz") return StructureKind::kBlockToeplitz;
  throw InvalidArgument(fmt::format("unknown structure '{}'", s));
}

DistributionKind parse_distribution_kind(std::string_view s) {
  if (s == "gaussian") return DistributionKind::kGaussian;
  if (s == "t") return DistributionKind::kStudentT;
  throw InvalidArgument(fmt::format("unknown distribution '{}'", s));
}

ContaminationKind parse_contamination_kind(std::string_view s) {
  if (s == "none") return ContaminationKind::kNone;
  if (s == "rows") return ContaminationKind::kRows;
  if (s == "columns") return ContaminationKind::kColumns;
  if (s == "random") return ContaminationKind::kRandom;
  throw InvalidArgument(fmt::format("unknown contamination '{}'", s));
}

void StructureSpec::validate() const {
  if (p < 2) throw InvalidArgument("structure dimension p must be >= 2");
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw InvalidArgument("sparsity must lie in [0, 1]");
  if (!(value_lo > 0.0 && value_lo <= value_hi && value_hi < 1.0)) {
    throw InvalidArgument("value range must lie within (0, 1)");
  }
  if (block_fractions.size() != block_decays.size() || block_fractions.empty()) {
    throw InvalidArgument("block fractions and decays must have the same nonzero length");
  }
  const double total = std::accumulate(block_fractions.begin(), block_fractions.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("block fractions must sum to 1");
  for (double f : block_fractions) {
    if (!(f > 0.0)) throw InvalidArgument("block fractions must be positive");
  }
  for (double d : block_decays) {
    if (!(d > 0.0 && d < 1.0)) throw InvalidArgument("block decays must lie in (0, 1)");
  }
  if (!(repair_floor > 0.0 && repair_floor < 1.0)) {
    throw InvalidArgument("repair floor must lie in (0, 1)");
  }
}

void DistributionSpec::validate() const {
  if (kind == DistributionKind::kStudentT && !(df >= 1.0)) {
    throw InvalidArgument("t degrees of freedom must be >= 1");
  }
}

ContaminationSpec ContaminationSpec::defaults(ContaminationKind kind) {
  switch (kind) {
    case ContaminationKind::kNone:
      return {kind, 0.0, 0.3, 0.7, 0.0};
    case ContaminationKind::kRows:
    case ContaminationKind::kColumns:
      return {kind, 0.10, 0.3, 0.7, 10.0};
    case ContaminationKind::kRandom:
      return {kind, 0.05, 0.3, 0.7, 100.0};
  }
  return {};
}

void ContaminationSpec::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(fraction) || !unit(entry_fraction_lo) || !unit(entry_fraction_hi) ||
      entry_fraction_lo > entry_fraction_hi) {
    throw InvalidArgument("contamination fractions must lie in [0, 1] with lo <= hi");
  }
  if (!std::isfinite(shift)) throw InvalidArgument("contamination shift must be finite");
}

void ScenarioSpec::validate() const {
  structure.validate();
  distribution.validate();
  contamination.validate();
  if (n < 2) throw InvalidArgument("n must be >= 2");
  if (replicates < 1) throw InvalidArgument("replicates must be >= 1");
  if (n_starts < 1) throw InvalidArgument("starts must be >= 1");
  if (losses.empty()) throw InvalidArgument("at least one loss is required");
  optimizer.validate();
}

std::vector<std::size_t> block_sizes(std::size_t p, const std::vector<double>& fractions) {
  if (p < 4) throw InvalidArgument(fmt::format("block structure needs p >= 4, got {}", p));
  std::vector<std::size_t> sizes;
  std::size_t used = 0;
  for (std::size_t b = 0; b + 1 < fractions.size(); ++b) {
    sizes.push_back(round_count(fractions[b], p));
    used += sizes.back();
  }
  if (used >= p) throw InvalidArgument("block fractions leave the last block empty");
  sizes.push_back(p - used);
  for (auto s : sizes) {
    if (s == 0) throw InvalidArgument(fmt::format("p = {} is too small for nonempty blocks", p));
  }
  return sizes;
}

CorrelationMatrix gen_structure(const StructureSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t p = spec.p;
  const auto dim = static_cast<Eigen::Index>(p);
  switch (spec.kind) {
    case StructureKind::kRandomDense: {
      const BoxDomain box = default_angle_box(p);
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      AngleVector a{p, std::vector<double>(box.dim())};
      for (std::size_t i = 0; i < box.dim(); ++i) {
        a.angles[i] = box.lower(i) + u01(rng) * box.width(i);
      }
      return angles_to_corr(a);
    }
    case StructureKind::kSparseUniform: {
      std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
      for (Eigen::Index r = 1; r < dim; ++r) {
        for (Eigen::Index c = 0; c < r; ++c) pairs.emplace_back(r, c);
      }
      const std::size_t keep = round_count(1.0 - spec.sparsity, pairs.size());
      Eigen::MatrixXd C = Eigen::MatrixXd::Identity(dim, dim);
      std::uniform_real_distribution<double> value(spec.value_lo, spec.value_hi);
      for (std::size_t idx : choose(pairs.size(), keep, rng)) {
        const auto [r, c] = pairs[idx];
        C(r, c) = C(c, r) = value(rng);
      }
      return CorrelationMatrix::from_matrix(shrink_to_min_eigenvalue(C, spec.repair_floor).C);
    }
    case StructureKind::kBlockToeplitz: {
      const auto sizes = block_sizes(p, spec.block_fractions);
      Eigen::MatrixXd C = Eigen::MatrixXd::Zero(dim, dim);
      Eigen::Index start = 0;
      for (std::size_t b = 0; b < sizes.size(); ++b) {
        const auto len = static_cast<Eigen::Index>(sizes[b]);
        for (Eigen::Index i = 0; i < len; ++i) {
          for (Eigen::Index j = 0; j < len; ++j) {
            C(start + i, start + j) =
                std::pow(spec.block_decays[b], static_cast<double>(std::abs(i - j)));
          }
        }
        start += len;
      }
      return CorrelationMatrix::from_matrix(C);
    }
  }
  throw InvalidArgument("unknown structure kind");
}

DataMatrix sample_data(const CorrelationMatrix& C, std::size_t n, const DistributionSpec& dist,
                       Rng& rng) {
  dist.validate();
  const Eigen::MatrixXd L = C.cholesky().L;
  const auto p = static_cast<Eigen::Index>(C.dim());
  const auto rows = static_cast<Eigen::Index>(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd Z(rows, p);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) Z(i, j) = normal(rng);
  }
  Eigen::MatrixXd X = Z * L.transpose();
  if (dist.kind == DistributionKind::kStudentT) {
    std::chi_squared_distribution<double> chi2(dist.df);
    for (Eigen::Index i = 0; i < rows; ++i) X.row(i) /= std::sqrt(chi2(rng) / dist.df);
  }
  return DataMatrix(std::move(X));
}

DataMatrix contaminate(const DataMatrix& X, const ContaminationSpec& spec, Rng& rng) {
  spec.validate();
  Eigen::MatrixXd out = X.values();
  const std::size_t n = X.rows();
  const std::size_t p = X.cols();
  std::uniform_real_distribution<double> entry_share(spec.entry_fraction_lo,
                                                     spec.entry_fraction_hi);
  switch (spec.kind) {
    case ContaminationKind::kNone:
      break;
    case ContaminationKind::kRows:
      for (std::size_t r : choose(n, round_count(spec.fraction, n), rng)) {
        const std::size_t k = round_count(entry_share(rng), p);
        for (std::size_t c : choose(p, k, rng)) {
          out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += spec.shift;
        }
      }
      break;
    case ContaminationKind::kColumns:
      for (std::size_t c : choose(p, round_count(spec.fraction, p), rng)) {
        const std::size_t k = round_count(entry_share(rng), n);
        for (std::size_t r : choose(n, k, rng)) {
          out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += spec.shift;
        }
      }
      break;
    case ContaminationKind::kRandom:
      for (std::size_t cell : choose(n * p, round_count(spec.fraction, n * p), rng)) {
        out(static_cast<Eigen::Index>(cell / p), static_cast<Eigen::Index>(cell % p)) +=
            spec.shift;
      }
      break;
  }
  return DataMatrix(std::move(out), X.names());
}

double rmse(const CorrelationMatrix& estimate, const CorrelationMatrix& truth) {
  if (estimate.dim() != truth.dim()) {
    throw DimensionMismatch(
        fmt::format("rmse of {}x{} against {}x{}", estimate.dim(), estimate.dim(), truth.dim(),
                    truth.dim()));
  }
  const std::size_t M = truth.dim();
  double sum = 0.0;
  for (std::size_t r = 1; r < M; ++r) {
    for (std::size_t c = 0; c < r; ++c) {
      const double d = estimate(r, c) - truth(r, c);
      sum += d * d;
    }
  }
  return std::sqrt(sum / static_cast<double>(M * (M - 1) / 2));
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return sd / std::sqrt(static_cast<double>(v.size()));
}

std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate) {
  return derive_seed(master, streams::kReplicate, replicate);
}

namespace {

struct PreparedReplicate {
  CorrelationMatrix truth;
  DataMatrix data;  // standardized
  AngleVector warm_start;
};

PreparedReplicate prepare_replicate(const ScenarioSpec& spec, std::uint64_t seed) {
  Rng structure_rng(derive_seed(seed, streams::kStructure));
  CorrelationMatrix truth = gen_structure(spec.structure, structure_rng);
  Rng sample_rng(derive_seed(seed, streams::kSample));
  DataMatrix raw = sample_data(truth, spec.n, spec.distribution, sample_rng);
  Rng contaminate_rng(derive_seed(seed, streams::kContaminate));
  DataMatrix dirty = contaminate(raw, spec.contamination, contaminate_rng);
  DataMatrix z = standardize_columns(dirty);
  AngleVector warm = corr_to_angles(pilot_correlation(z).C);
  return {std::move(truth), std::move(z), std::move(warm)};
}

}  // namespace

ScenarioResult run_scenario(const ScenarioSpec& spec) {
  spec.validate();
  const std::size_t R = spec.replicates;
  const std::size_t nl = spec.losses.size();

  ScenarioResult result;
  for (std::size_t r = 0; r < R; ++r) result.replicate_seeds.push_back(replicate_seed(spec.master_seed, r));

  std::vector<std::optional<PreparedReplicate>> prepared(R);
  for (std::size_t r = 0; r < R; ++r) {
    try {
      prepared[r] = prepare_replicate(spec, result.replicate_seeds[r]);
    } catch (const std::exception& e) {
      throw ReplicateError(fmt::format("replicate {}: {}", r, e.what()), r);
    }
  }

  result.cells.resize(R * nl);
  parallel_for(R * nl, spec.threads, [&](std::size_t task) {
    const std::size_t r = task / nl;
    const std::size_t l = task % nl;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const PreparedReplicate& rep = *prepared[r];
      const LossSpec resolved = resolve_spec(rep.data, spec.losses[l]);
      OptimizerConfig cfg = spec.optimizer;
      // Same starting points for every loss within a replicate.
      cfg.seed = derive_seed(result.replicate_seeds[r], streams::kEstimate);
      cfg.record_trace = false;
      MultiStartOptions opts;
      opts.warm_starts.push_back(rep.warm_start);
      const ManifoldResult est = minimize_over_corr(make_corr_loss(rep.data, resolved),
                                                    spec.p(), cfg, spec.n_starts, opts);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      result.cells[task] = ReplicateResult{r,
                                           l,
                                           resolved.kind,
                                           resolved.threshold.value_or(0.0),
                                           rmse(est.best, rep.truth),
                                           est.runs[est.best_index].f_best,
                                           est.best_index,
                                           secs};
    } catch (const ReplicateError&) {
      throw;
    } catch (const std::exception& e) {
      throw ReplicateError(
          fmt::format("replicate {} ({} loss): {}", r, to_string(spec.losses[l].kind), e.what()),
          r);
    }
  });

  for (std::size_t l = 0; l < nl; ++l) {
    std::vector<double> errs;
    std::vector<double> times;
    for (std::size_t r = 0; r < R; ++r) {
      errs.push_back(result.cells[r * nl + l].rmse);
      times.push_back(result.cells[r * nl + l].runtime_seconds);
    }
    result.summary.push_back({spec.losses[l].kind, mean(errs), standard_error(errs), mean(times)});
  }
  return result;
}

}  // namespace glasd
