#include "glasd/robust_losses.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <fmt/core.h>

#include "glasd/errors.hpp"

namespace glasd {

namespace {

double tukey_sq(double d2, double tau_sq) {
  const double plateau = tau_sq / 6.0;
  if (d2 > tau_sq) return plateau;
  const double u = 1.0 - d2 / tau_sq;
  return plateau * (1.0 - u * u * u);
}

double log_det(const CholeskyFactor& f) {
  return 2.0 * f.L.diagonal().array().log().sum();
}

// Xt is p x n (one observation per column).
Eigen::VectorXd distances_from_transposed(const Eigen::MatrixXd& Xt, const CholeskyFactor& f) {
  if (f.L.rows() != Xt.rows()) {
    throw DimensionMismatch(fmt::format("data has {} variables, matrix is {}x{}", Xt.rows(),
                                        f.L.rows(), f.L.cols()));
  }
  const Eigen::MatrixXd Y = f.L.triangularView<Eigen::Lower>().solve(Xt);
  return Y.colwise().squaredNorm().transpose();
}

void require_threshold(LossKind kind, double threshold) {
  if (kind != LossKind::kGaussian && !(threshold > 0.0 && std::isfinite(threshold))) {
    throw InvalidArgument(fmt::format("{} loss needs a positive finite threshold, got {}",
                                      to_string(kind), threshold));
  }
}

}  // namespace

DataMatrix::DataMatrix(Eigen::MatrixXd values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
  if (values_.rows() < 2 || values_.cols() < 2) {
    throw InvalidArgument(fmt::format("data needs at least 2 rows and 2 columns, got {}x{}",
                                      values_.rows(), values_.cols()));
  }
  if (!values_.allFinite()) throw InvalidArgument("data contains NaN or infinite entries");
  if (names_.empty()) {
    for (Eigen::Index j = 0; j < values_.cols(); ++j) names_.push_back(fmt::format("V{}", j + 1));
  }
  if (names_.size() != cols()) {
    throw DimensionMismatch(
        fmt::format("{} column names for {} columns", names_.size(), cols()));
  }
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kGaussian:
      return "gaussian";
    case LossKind::kHuber:
      return "huber";
    case LossKind::kTruncated:
      return "truncated";
    case LossKind::kTukey:
      return "tukey";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "gaussian") return LossKind::kGaussian;
  if (name == "huber") return LossKind::kHuber;
  if (name == "truncated") return LossKind::kTruncated;
  if (name == "tukey") return LossKind::kTukey;
  throw InvalidArgument(fmt::format("unknown loss '{}'", name));
}

Eigen::VectorXd mahalanobis_sq_all(const Eigen::MatrixXd& X, const CholeskyFactor& L) {
  return distances_from_transposed(X.transpose(), L);
}

Eigen::VectorXd mahalanobis_sq_all(const DataMatrix& X, const CorrelationMatrix& C) {
  if (X.cols() != C.dim()) {
    throw DimensionMismatch(
        fmt::format("data has {} variables, matrix is {}x{}", X.cols(), C.dim(), C.dim()));
  }
  return mahalanobis_sq_all(X.values(), C.cholesky());
}

double loss_gaussian(const DataMatrix& X, const CorrelationMatrix& C) {
  const auto f = C.cholesky();
  const Eigen::VectorXd d2 = mahalanobis_sq_all(X.values(), f);
  return loss_from_distances({d2.data(), static_cast<std::size_t>(d2.size())}, log_det(f),
                             LossKind::kGaussian, 0.0);
}

double rho_huber(double d2, double delta) {
  if (d2 <= delta) return d2;
  return 2.0 * std::sqrt(delta) * std::sqrt(d2) - delta;
}

double rho_truncated(double d2, double tau) { return std::min(d2, tau); }

double rho_tukey(double d2, double tau) { return tukey_sq(d2, tau * tau); }

double rho(LossKind kind, double d2, double threshold) {
  switch (kind) {
    case LossKind::kGaussian:
      return d2;
    case LossKind::kHuber:
      return rho_huber(d2, threshold);
    case LossKind::kTruncated:
      return rho_truncated(d2, threshold);
    case LossKind::kTukey:
      return tukey_sq(d2, threshold);
  }
  return d2;
}

double loss_from_distances(std::span<const double> d2, double log_det_c, LossKind kind,
                           double threshold) {
  require_threshold(kind, threshold);
  double sum = 0.0;
  for (double v : d2) sum += rho(kind, v, threshold);
  return 0.5 * static_cast<double>(d2.size()) * log_det_c + 0.5 * sum;
}

double loss_robust(const DataMatrix& X, const CorrelationMatrix& C, const LossSpec& spec) {
  if (spec.kind != LossKind::kGaussian && !spec.threshold) {
    throw InvalidArgument("robust loss threshold has not been resolved");
  }
  const auto f = C.cholesky();
  if (X.cols() != f.dim()) throw DimensionMismatch("data and matrix dimensions differ");
  const Eigen::VectorXd d2 = mahalanobis_sq_all(X.values(), f);
  return loss_from_distances({d2.data(), static_cast<std::size_t>(d2.size())}, log_det(f),
                             spec.kind, spec.threshold.value_or(0.0));
}

double quantile_linear(std::span<const double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

Quartiles quartiles(std::span<const double> values) {
  return {quantile_linear(values, 0.25), quantile_linear(values, 0.75)};
}

double iqr_threshold(std::span<const double> values, double multiplier) {
  if (values.size() < 4) {
    throw InvalidArgument(fmt::format("IQR threshold needs at least 4 values, got {}", values.size()));
  }
  const Quartiles q = quartiles(values);
  return q.q3 + multiplier * q.iqr();
}

namespace {

struct ColumnMoments {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd sd;
};

ColumnMoments column_moments(const DataMatrix& X) {
  const Eigen::MatrixXd& v = X.values();
  ColumnMoments m;
  m.mean = v.colwise().mean();
  const Eigen::MatrixXd centered = v.rowwise() - m.mean;
  m.sd = (centered.colwise().squaredNorm() / static_cast<double>(v.rows() - 1))
             .array()
             .sqrt();
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    if (!(m.sd(j) > 1e-12 * std::max(1.0, std::abs(m.mean(j))))) {
      throw DegenerateData(
          fmt::format("column '{}' has zero variance", X.names()[static_cast<std::size_t>(j)]));
    }
  }
  return m;
}

}  // namespace

Eigen::MatrixXd sample_correlation(const DataMatrix& X) {
  const ColumnMoments m = column_moments(X);
  Eigen::MatrixXd z = X.values().rowwise() - m.mean;
  z = z.array().rowwise() / m.sd.array();
  Eigen::MatrixXd S = (z.transpose() * z) / static_cast<double>(X.rows() - 1);
  S = (S + S.transpose()) / 2.0;
  S.diagonal().setOnes();
  return S;
}

DataMatrix standardize_columns(const DataMatrix& X) {
  const ColumnMoments m = column_moments(X);
  Eigen::MatrixXd z = X.values().rowwise() - m.mean;
  z = z.array().rowwise() / m.sd.array();
  return DataMatrix(std::move(z), X.names());
}

PilotEstimate pilot_correlation(const DataMatrix& X, double floor) {
  auto shrunk = shrink_to_min_eigenvalue(sample_correlation(X), floor);
  return {CorrelationMatrix::from_matrix(shrunk.C), shrunk.lambda};
}

double resolve_threshold(const DataMatrix& X, const LossSpec& spec) {
  if (spec.threshold) {
    if (!(*spec.threshold > 0.0 && std::isfinite(*spec.threshold))) {
      throw InvalidArgument("threshold must be positive and finite");
    }
    return *spec.threshold;
  }
  const PilotEstimate pilot = pilot_correlation(X, spec.pilot_shrinkage_floor);
  const Eigen::VectorXd d2 = mahalanobis_sq_all(X, pilot.C);
  const double t = iqr_threshold({d2.data(), static_cast<std::size_t>(d2.size())},
                                 spec.iqr_multiplier);
  if (!(t > 0.0)) throw DegenerateData("IQR threshold is not positive");
  return t;
}

LossSpec resolve_spec(const DataMatrix& X, const LossSpec& spec) {
  LossSpec out = spec;
  if (spec.kind != LossKind::kGaussian) out.threshold = resolve_threshold(X, spec);
  return out;
}

std::vector<ColumnOutliers> outlier_report(const DataMatrix& X) {
  std::vector<ColumnOutliers> out;
  const Eigen::MatrixXd& v = X.values();
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const Eigen::VectorXd col = v.col(j);
    const std::span<const double> s(col.data(), static_cast<std::size_t>(col.size()));
    const Quartiles q = quartiles(s);
    ColumnOutliers r{X.names()[static_cast<std::size_t>(j)], q.q1, q.q3,
                     q.q1 - 1.5 * q.iqr(), q.q3 + 1.5 * q.iqr(), 0};
    for (double x : s) {
      if (x < r.lower_fence || x > r.upper_fence) ++r.count;
    }
    out.push_back(std::move(r));
  }
  return out;
}

CorrObjective make_corr_loss(const DataMatrix& X, const LossSpec& resolved) {
  const double threshold = resolved.threshold.value_or(0.0);
  require_threshold(resolved.kind, threshold);
  auto Xt = std::make_shared<const Eigen::MatrixXd>(X.values().transpose());
  const LossKind kind = resolved.kind;
  return [Xt, kind, threshold](const CorrelationMatrix& C) {
    const auto f = C.cholesky();
    const Eigen::VectorXd d2 = distances_from_transposed(*Xt, f);
    return loss_from_distances({d2.data(), static_cast<std::size_t>(d2.size())}, log_det(f),
                               kind, threshold);
  };
}

}  // namespace glasd
