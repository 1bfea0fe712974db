#pragma once

// Hyperspherical parameterization of full-rank correlation matrices.
//
// Row m of the Cholesky factor L is a unit vector with a positive last entry
// and is encoded by m-1 angles. For M x M matrices that gives
// n = M(M-1)/2 angles, stored row by row:
//
//   (w21 ; w31, w32 ; w41, w42, w43 ; ...)
//
// Within row m >= 3 the first angle sets the diagonal (l_mm = cos w_m1), the
// middle angles peel off one more entry each, and the last angle splits what
// remains between l_m1 and l_m2.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "glasd/box_optimizer.hpp"

namespace glasd {

/// Margin keeping every angle strictly inside its open range.
inline constexpr double kAngleMargin = 1e-6;

std::size_t angle_dim(std::size_t M);

/// Inverse of angle_dim; throws if n is not triangular.
std::size_t matrix_dim_for_angles(std::size_t n);

struct AngleVector {
  std::size_t M = 0;
  std::vector<double> angles;
};

/// Lower-triangular factor with unit-norm rows and positive diagonal.
struct CholeskyFactor {
  Eigen::MatrixXd L;
  std::size_t dim() const noexcept { return static_cast<std::size_t>(L.rows()); }
};

class CorrelationMatrix {
 public:
  /// Validates symmetry (within tol) and unit diagonal (within tol), then
  /// stores the matrix exactly symmetric with an exact unit diagonal.
  /// Positive definiteness is checked when a factor is requested.
  static CorrelationMatrix from_matrix(const Eigen::MatrixXd& C, double tol = 1e-8);

  /// C = L L^T, keeping L for later solves.
  static CorrelationMatrix from_factor(CholeskyFactor factor);

  static CorrelationMatrix identity(std::size_t M);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(C_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return C_; }
  double operator()(std::size_t r, std::size_t c) const { return C_(r, c); }

  /// Cholesky factor with positive diagonal. Uses the stored factor when the
  /// matrix was built from one; otherwise factors C (NotPositiveDefinite on
  /// failure).
  CholeskyFactor cholesky() const;

  bool has_factor() const noexcept { return L_.has_value(); }

 private:
  explicit CorrelationMatrix(Eigen::MatrixXd C) : C_(std::move(C)) {}
  Eigen::MatrixXd C_;
  std::optional<Eigen::MatrixXd> L_;
};

CholeskyFactor angles_to_cholesky(const AngleVector& a);
CholeskyFactor angles_to_cholesky(std::size_t M, std::span<const double> angles);
CorrelationMatrix angles_to_corr(const AngleVector& a);

/// Inverse map. Angles are clamped into default_angle_box(M). Where a row has
/// no unexplained mass left (prefix norm < 1e-12) the remaining angles are
/// set to the midpoints of their ranges.
AngleVector corr_to_angles(const CorrelationMatrix& C);

BoxDomain default_angle_box(std::size_t M);

/// Smallest lambda >= 0 with min eig((C + lambda I) / (1 + lambda)) >= floor,
/// and the shrunk matrix. Shrinking toward I keeps the unit diagonal and the
/// zero pattern.
struct ShrinkResult {
  Eigen::MatrixXd C;
  double lambda;
};
ShrinkResult shrink_to_min_eigenvalue(const Eigen::MatrixXd& C, double floor);

double min_eigenvalue(const Eigen::MatrixXd& C);

using CorrObjective = std::function<double(const CorrelationMatrix&)>;

struct MultiStartOptions {
  /// Used, in order, as the first starting points; the rest are uniform.
  std::vector<AngleVector> warm_starts;
  /// 0 means std::thread::hardware_concurrency().
  unsigned threads = 1;
};

struct ManifoldResult {
  CorrelationMatrix best;
  AngleVector best_angles;
  std::size_t best_index = 0;
  std::vector<RunRecord> runs;
};

/// Seed of restart k under a master seed.
std::uint64_t restart_seed(std::uint64_t master, std::size_t k);

/// n_starts independent GLASD runs of loss(angles_to_corr(.)) over the angle
/// box; keeps the run with the smallest f_best (lowest index on ties).
ManifoldResult minimize_over_corr(const CorrObjective& loss, std::size_t M,
                                  const OptimizerConfig& config,
                                  std::size_t n_starts,
                                  const MultiStartOptions& options = {});

}  // namespace glasd
