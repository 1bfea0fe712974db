#pragma once

// Contamination simulation: generate a true correlation structure, draw
// data, corrupt it, estimate with each loss and score against the truth.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "glasd/box_optimizer.hpp"
#include "glasd/corr_manifold.hpp"
#include "glasd/rng.hpp"
#include "glasd/robust_losses.hpp"

namespace glasd {

enum class StructureKind { kRandomDense, kSparseUniform, kBlockToeplitz };
enum class DistributionKind { kGaussian, kStudentT };
enum class ContaminationKind { kNone, kRows, kColumns, kRandom };

std::string_view to_string(StructureKind k);
std::string_view to_string(DistributionKind k);
std::string_view to_string(ContaminationKind k);
StructureKind parse_structure_kind(std::string_view s);
DistributionKind parse_distribution_kind(std::string_view s);
ContaminationKind parse_contamination_kind(std::string_view s);

struct StructureSpec {
  StructureKind kind = StructureKind::kRandomDense;
  std::size_t p = 20;
  double sparsity = 0.9;  // share of off-diagonal pairs left at zero
  double value_lo = 0.1;
  double value_hi = 0.3;
  std::vector<double> block_fractions{0.25, 0.5, 0.25};
  std::vector<double> block_decays{0.6, 0.3, 0.4};
  double repair_floor = 1e-3;

  void validate() const;
};

struct DistributionSpec {
  DistributionKind kind = DistributionKind::kGaussian;
  double df = 3.0;

  void validate() const;
};

struct ContaminationSpec {
  ContaminationKind kind = ContaminationKind::kNone;
  /// Share of rows (rows), columns (columns) or cells (random) hit.
  double fraction = 0.0;
  /// Per selected row/column, the share of its entries shifted is drawn
  /// uniformly from [entry_fraction_lo, entry_fraction_hi].
  double entry_fraction_lo = 0.3;
  double entry_fraction_hi = 0.7;
  double shift = 0.0;

  /// rows/columns: 10% with 30-70% of entries +10; random: 5% of cells +100.
  static ContaminationSpec defaults(ContaminationKind kind);
  void validate() const;
};

struct ScenarioSpec {
  StructureSpec structure;
  DistributionSpec distribution;
  ContaminationSpec contamination;
  std::size_t n = 100;
  std::size_t replicates = 10;
  std::vector<LossSpec> losses;
  std::size_t n_starts = 10;
  std::uint64_t master_seed = 0;
  OptimizerConfig optimizer;
  unsigned threads = 1;

  std::size_t p() const noexcept { return structure.p; }
  void validate() const;
};

struct ReplicateResult {
  std::size_t replicate;
  std::size_t loss_index;
  LossKind loss;
  double threshold;  // 0 for gaussian
  double rmse;
  double f_best;
  std::size_t best_start;
  double runtime_seconds;
};

struct LossSummary {
  LossKind loss;
  double mean_rmse;
  double se;  // sd / sqrt(replicates); 0 with a single replicate
  double mean_runtime_seconds;
};

struct ScenarioResult {
  std::vector<std::uint64_t> replicate_seeds;
  std::vector<ReplicateResult> cells;  // ordered by replicate, then loss
  std::vector<LossSummary> summary;    // one per loss, in spec order
};

CorrelationMatrix gen_structure(const StructureSpec& spec, Rng& rng);

/// Block sizes round(p * fraction), last block takes the remainder.
std::vector<std::size_t> block_sizes(std::size_t p, const std::vector<double>& fractions);

DataMatrix sample_data(const CorrelationMatrix& C, std::size_t n,
                       const DistributionSpec& dist, Rng& rng);

DataMatrix contaminate(const DataMatrix& X, const ContaminationSpec& spec, Rng& rng);

/// Root mean square over the unique off-diagonal pairs.
double rmse(const CorrelationMatrix& estimate, const CorrelationMatrix& truth);

double mean(std::span<const double> v);
/// Sample sd / sqrt(size); 0 for fewer than two values.
double standard_error(std::span<const double> v);

std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate);

ScenarioResult run_scenario(const ScenarioSpec& spec);

}  // namespace glasd
