#include "glasd/corr_manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/core.h>

#include "glasd/errors.hpp"
#include "glasd/parallel.hpp"
#include "glasd/rng.hpp"

namespace glasd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegenerateNorm = std::numeric_limits<double>::min();

// First angle index of (1-based) row m >= 2.
std::size_t row_offset(std::size_t m) { return (m - 1) * (m - 2) / 2; }

Eigen::MatrixXd symmetric_product(const Eigen::MatrixXd& L) {
  const Eigen::Index M = L.rows();
  Eigen::MatrixXd C(M, M);
  for (Eigen::Index r = 0; r < M; ++r) {
    for (Eigen::Index c = 0; c <= r; ++c) {
      const Eigen::Index len = c + 1;
      const double v = L.row(r).head(len).dot(L.row(c).head(len));
      C(r, c) = v;
      C(c, r) = v;
    }
  }
  return C;
}

}  // namespace

std::size_t angle_dim(std::size_t M) {
  if (M < 2) throw InvalidArgument(fmt::format("matrix dimension must be >= 2, got {}", M));
  return M * (M - 1) / 2;
}

std::size_t matrix_dim_for_angles(std::size_t n) {
  for (std::size_t M = 2; M * (M - 1) / 2 <= n; ++M) {
    if (M * (M - 1) / 2 == n) return M;
  }
  throw DimensionMismatch(fmt::format("{} is not a valid angle count M(M-1)/2", n));
}

CorrelationMatrix CorrelationMatrix::from_matrix(const Eigen::MatrixXd& C, double tol) {
  if (C.rows() != C.cols() || C.rows() < 2) {
    throw DimensionMismatch(
        fmt::format("correlation matrix must be square with M >= 2, got {}x{}",
                    C.rows(), C.cols()));
  }
  if (!C.allFinite()) throw InvalidArgument("correlation matrix has non-finite entries");
  const Eigen::Index M = C.rows();
  for (Eigen::Index r = 0; r < M; ++r) {
    if (std::abs(C(r, r) - 1.0) > tol) {
      throw InvalidArgument(fmt::format("diagonal entry {} is {}, expected 1", r, C(r, r)));
    }
    for (Eigen::Index c = 0; c < r; ++c) {
      if (std::abs(C(r, c) - C(c, r)) > tol) {
        throw InvalidArgument(fmt::format("matrix is not symmetric at ({}, {})", r, c));
      }
    }
  }
  Eigen::MatrixXd S = (C + C.transpose()) / 2.0;
  S.diagonal().setOnes();
  return CorrelationMatrix(std::move(S));
}

CorrelationMatrix CorrelationMatrix::from_factor(CholeskyFactor factor) {
  CorrelationMatrix out(symmetric_product(factor.L));
  out.L_ = std::move(factor.L);
  return out;
}

CorrelationMatrix CorrelationMatrix::identity(std::size_t M) {
  const auto m = static_cast<Eigen::Index>(M);
  return from_factor({Eigen::MatrixXd::Identity(m, m)});
}

CholeskyFactor CorrelationMatrix::cholesky() const {
  if (L_) return {*L_};
  Eigen::LLT<Eigen::MatrixXd> llt(C_);
  Eigen::MatrixXd L;
  if (llt.info() == Eigen::Success) {
    L = llt.matrixL();
  } else {
    // extended precision for matrices too close to singular for double
    using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::LLT<MatrixXld> wide(C_.cast<long double>());
    if (wide.info() != Eigen::Success) {
      throw NotPositiveDefinite("Cholesky factorization failed: matrix is not positive definite");
    }
    L = MatrixXld(wide.matrixL()).cast<double>();
  }
  if ((L.diagonal().array() <= 0.0).any()) {
    throw NotPositiveDefinite("Cholesky factor has a non-positive diagonal entry");
  }
  return {std::move(L)};
}

CholeskyFactor angles_to_cholesky(std::size_t M, std::span<const double> w) {
  if (w.size() != angle_dim(M)) {
    throw DimensionMismatch(fmt::format("M = {} needs {} angles, got {}", M,
                                        angle_dim(M), w.size()));
  }
  const auto dim = static_cast<Eigen::Index>(M);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(dim, dim);
  L(0, 0) = 1.0;
  L(1, 0) = std::sin(w[0]);
  L(1, 1) = std::cos(w[0]);
  for (std::size_t m = 3; m <= M; ++m) {
    const auto r = static_cast<Eigen::Index>(m - 1);
    const double* row = w.data() + row_offset(m);
    double prod = 1.0;
    for (std::size_t k = 0; k + 2 < m; ++k) {
      L(r, r - static_cast<Eigen::Index>(k)) = prod * std::cos(row[k]);
      prod *= std::sin(row[k]);
    }
    L(r, 1) = prod * std::cos(row[m - 2]);
    L(r, 0) = prod * std::sin(row[m - 2]);
  }
  return {std::move(L)};
}

CholeskyFactor angles_to_cholesky(const AngleVector& a) {
  return angles_to_cholesky(a.M, a.angles);
}

CorrelationMatrix angles_to_corr(const AngleVector& a) {
  return CorrelationMatrix::from_factor(angles_to_cholesky(a));
}

BoxDomain default_angle_box(std::size_t M) {
  const std::size_t n = angle_dim(M);
  std::vector<double> lo(n);
  std::vector<double> hi(n);
  lo[0] = -kPi / 2 + kAngleMargin;
  hi[0] = kPi / 2 - kAngleMargin;
  for (std::size_t m = 3; m <= M; ++m) {
    const std::size_t off = row_offset(m);
    lo[off] = 0.0;
    hi[off] = kPi / 2 - kAngleMargin;
    for (std::size_t k = 1; k + 2 < m; ++k) {
      lo[off + k] = kAngleMargin;
      hi[off + k] = kPi - kAngleMargin;
    }
    lo[off + m - 2] = 0.0;
    hi[off + m - 2] = 2 * kPi - kAngleMargin;
  }
  return BoxDomain(std::move(lo), std::move(hi));
}

AngleVector corr_to_angles(const CorrelationMatrix& C) {
  const std::size_t M = C.dim();
  const Eigen::MatrixXd L = C.cholesky().L;
  const BoxDomain box = default_angle_box(M);
  AngleVector out{M, std::vector<double>(angle_dim(M))};
  auto& w = out.angles;

  w[0] = std::atan2(L(1, 0), L(1, 1));

  for (std::size_t m = 3; m <= M; ++m) {
    const auto r = static_cast<Eigen::Index>(m - 1);
    const std::size_t off = row_offset(m);
    // prefix[c] = norm of l_r0 .. l_rc
    std::vector<double> prefix(m);
    double acc = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      acc = std::hypot(acc, L(r, static_cast<Eigen::Index>(c)));
      prefix[c] = acc;
    }
    std::size_t k = 0;
    bool degenerate = false;
    for (; k + 2 < m; ++k) {
      const std::size_t col = m - 1 - k;
      if (prefix[col] < kDegenerateNorm) {
        degenerate = true;
        break;
      }
      w[off + k] = std::atan2(prefix[col - 1], L(r, static_cast<Eigen::Index>(col)));
    }
    if (!degenerate && prefix[1] < kDegenerateNorm) degenerate = true;
    if (degenerate) {
      for (; k + 1 < m; ++k) {
        w[off + k] = 0.5 * (box.lower(off + k) + box.upper(off + k));
      }
      continue;
    }
    double last = std::atan2(L(r, 0), L(r, 1));
    if (last < 0.0) last += 2 * kPi;
    w[off + m - 2] = last;
  }

  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::clamp(w[i], box.lower(i), box.upper(i));
  return out;
}

double min_eigenvalue(const Eigen::MatrixXd& C) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("eigenvalue computation failed");
  return es.eigenvalues().minCoeff();
}

ShrinkResult shrink_to_min_eigenvalue(const Eigen::MatrixXd& C, double floor) {
  if (!(floor > 0.0 && floor < 1.0)) {
    throw InvalidArgument(fmt::format("eigenvalue floor must lie in (0, 1), got {}", floor));
  }
  const double mu = min_eigenvalue(C);
  if (mu >= floor) return {C, 0.0};
  // Eigenvalues map as (mu + lambda) / (1 + lambda); the small relative pad
  // absorbs rounding so the floor is met, not just approached.
  const double lambda = (floor - mu) / (1.0 - floor) * (1.0 + 1e-9) + 1e-15;
  const auto M = C.rows();
  Eigen::MatrixXd S = (C + lambda * Eigen::MatrixXd::Identity(M, M)) / (1.0 + lambda);
  S.diagonal().setOnes();
  return {std::move(S), lambda};
}

std::uint64_t restart_seed(std::uint64_t master, std::size_t k) {
  return derive_seed(master, streams::kRestart, k);
}

ManifoldResult minimize_over_corr(const CorrObjective& loss, std::size_t M,
                                  const OptimizerConfig& config,
                                  std::size_t n_starts,
                                  const MultiStartOptions& options) {
  if (n_starts == 0) throw InvalidArgument("n_starts must be >= 1");
  const BoxDomain box = default_angle_box(M);
  for (const auto& warm : options.warm_starts) {
    if (warm.M != M || warm.angles.size() != box.dim()) {
      throw DimensionMismatch("warm start does not match the matrix dimension");
    }
  }

  const Objective objective = [&](std::span<const double> angles) {
    return loss(CorrelationMatrix::from_factor(angles_to_cholesky(M, angles)));
  };

  std::vector<RunRecord> runs(n_starts);
  parallel_for(n_starts, options.threads, [&](std::size_t k) {
    OptimizerConfig cfg = config;
    cfg.seed = restart_seed(config.seed, k);
    std::vector<double> x0;
    if (k < options.warm_starts.size()) {
      x0 = options.warm_starts[k].angles;
      for (std::size_t i = 0; i < x0.size(); ++i) {
        x0[i] = std::clamp(x0[i], box.lower(i), box.upper(i));
      }
    } else {
      x0 = sample_uniform_point(box, cfg.seed);
    }
    runs[k] = glasd_minimize(objective, box, x0, cfg);
  });

  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    if (runs[k].f_best < runs[best].f_best) best = k;
  }
  AngleVector angles{M, runs[best].x_best};
  return ManifoldResult{angles_to_corr(angles), std::move(angles), best, std::move(runs)};
}

}  // namespace glasd
