#pragma once

// Mahalanobis-distance objectives for correlation estimation.
//
// Every loss has the form
//
//   (n/2) log det C + (1/2) sum_i rho(d_i^2),   d_i^2 = x_i^T C^{-1} x_i
//
// with rho the identity (Gaussian), Huber, truncation at tau, or Tukey's
// biweight. Thresholds are always expressed on the d^2 scale; for Tukey the
// threshold is tau^2.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "glasd/corr_manifold.hpp"

namespace glasd {

class DataMatrix {
 public:
  /// n x p values; names default to V1..Vp. Requires n >= 2, p >= 2 and
  /// finite entries.
  explicit DataMatrix(Eigen::MatrixXd values, std::vector<std::string> names = {});

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
};

enum class LossKind { kGaussian, kHuber, kTruncated, kTukey };

std::string_view to_string(LossKind kind);
/// Throws InvalidArgument on an unknown name.
LossKind parse_loss_kind(std::string_view name);

struct LossSpec {
  LossKind kind = LossKind::kGaussian;
  /// d^2-scale threshold; empty means "choose from the data" (IQR rule).
  std::optional<double> threshold;
  double pilot_shrinkage_floor = 1e-3;
  double iqr_multiplier = 3.0;
};

Eigen::VectorXd mahalanobis_sq_all(const DataMatrix& X, const CorrelationMatrix& C);
Eigen::VectorXd mahalanobis_sq_all(const Eigen::MatrixXd& X, const CholeskyFactor& L);

double loss_gaussian(const DataMatrix& X, const CorrelationMatrix& C);

double rho_huber(double d2, double delta);
double rho_truncated(double d2, double tau);
/// tau is on the d scale: d2 is compared with tau^2.
double rho_tukey(double d2, double tau);

/// rho for a kind with a d^2-scale threshold (Tukey uses tau = sqrt(threshold)).
double rho(LossKind kind, double d2, double threshold);

/// Throws InvalidArgument if a robust kind has no resolved threshold.
double loss_robust(const DataMatrix& X, const CorrelationMatrix& C, const LossSpec& spec);

/// Same objective from precomputed distances and log det.
double loss_from_distances(std::span<const double> d2, double log_det, LossKind kind,
                           double threshold);

/// Linear interpolation between order statistics at 1-based position
/// 1 + (k - 1) q.
double quantile_linear(std::span<const double> values, double q);

struct Quartiles {
  double q1;
  double q3;
  double iqr() const noexcept { return q3 - q1; }
};
Quartiles quartiles(std::span<const double> values);

/// Q3 + multiplier * IQR. Needs at least 4 values.
double iqr_threshold(std::span<const double> values, double multiplier = 3.0);

Eigen::MatrixXd sample_correlation(const DataMatrix& X);

/// Column-wise (x - mean) / sd with the n-1 denominator. DegenerateData on a
/// zero-variance column.
DataMatrix standardize_columns(const DataMatrix& X);

struct PilotEstimate {
  CorrelationMatrix C;
  double lambda;
};

/// Sample correlation shrunk toward I until its smallest eigenvalue reaches
/// the floor.
PilotEstimate pilot_correlation(const DataMatrix& X, double floor = 1e-3);

/// Threshold for the given spec: the fixed value if one is set, otherwise the
/// IQR fence of the squared distances under the pilot estimate.
double resolve_threshold(const DataMatrix& X, const LossSpec& spec);

/// Copy of spec with its threshold filled in (no-op for gaussian).
LossSpec resolve_spec(const DataMatrix& X, const LossSpec& spec);

struct ColumnOutliers {
  std::string name;
  double q1;
  double q3;
  double lower_fence;
  double upper_fence;
  std::size_t count;
};

/// Per-column count of entries outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR].
std::vector<ColumnOutliers> outlier_report(const DataMatrix& X);

/// Objective over correlation matrices for the resolved spec. Holds a copy
/// of X; safe to call concurrently.
CorrObjective make_corr_loss(const DataMatrix& X, const LossSpec& resolved);

}  // namespace glasd
