#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "glasd/corr_manifold.hpp"
#include "glasd/errors.hpp"
#include "glasd/robust_losses.hpp"

using namespace glasd;

namespace {

CorrelationMatrix corr2(double r) {
  Eigen::MatrixXd C(2, 2);
  C << 1.0, r, r, 1.0;
  return CorrelationMatrix::from_matrix(C);
}

DataMatrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Eigen::MatrixXd X(r.size(), r.begin()->size());
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) X(i, j++) = v;
    ++i;
  }
  return DataMatrix(X);
}

Eigen::MatrixXd normal_sample(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = z(rng);
  return X;
}

CorrelationMatrix random_corr(std::size_t M, std::mt19937_64& rng) {
  const BoxDomain box = default_angle_box(M);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(box.dim());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = box.lower(i) + box.width(i) * u(rng);
  return angles_to_corr({M, w});
}

}  // namespace

TEST_CASE("data matrix validation") {
  CHECK_THROWS_AS(DataMatrix(Eigen::MatrixXd::Zero(1, 3)), InvalidArgument);
  CHECK_THROWS_AS(DataMatrix(Eigen::MatrixXd::Zero(3, 1)), InvalidArgument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(DataMatrix{bad}, InvalidArgument);
  const DataMatrix ok(Eigen::MatrixXd::Zero(3, 2));
  CHECK(ok.names() == std::vector<std::string>{"V1", "V2"});
}

TEST_CASE("squared distances") {
  const auto I2 = CorrelationMatrix::identity(2);
  const auto d = mahalanobis_sq_all(rows({{3, 4}, {1, 1}, {0, 0}}), I2);
  CHECK(d(0) == doctest::Approx(25.0).epsilon(1e-15));
  CHECK(d(2) == 0.0);
  const auto h = mahalanobis_sq_all(rows({{1, 1}, {0, 0}}), corr2(0.5));
  CHECK(std::abs(h(0) - 4.0 / 3.0) <= 1e-12);
  CHECK(h(1) == 0.0);

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(mahalanobis_sq_all(rows({{1, 1}, {0, 0}}), CorrelationMatrix::from_matrix(bad)),
                  NotPositiveDefinite);
  CHECK_THROWS_AS(mahalanobis_sq_all(rows({{1, 1, 1}, {0, 0, 0}}), I2), DimensionMismatch);
}

TEST_CASE("squared distances agree with an explicit inverse") {
  std::mt19937_64 rng(12);
  for (std::size_t p = 2; p <= 6; ++p) {
    for (int t = 0; t < 20; ++t) {
      const auto C = random_corr(p, rng);
      const Eigen::MatrixXd X = normal_sample(15, p, rng());
      const Eigen::MatrixXd Ci = C.matrix().inverse();
      const auto d = mahalanobis_sq_all(DataMatrix(X), C);
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double ref = X.row(i) * Ci * X.row(i).transpose();
        CHECK(std::abs(d(i) - ref) <= 1e-8 * std::max(1.0, std::abs(ref)));
      }
    }
  }
}

TEST_CASE("gaussian loss") {
  CHECK(std::abs(loss_gaussian(DataMatrix(Eigen::MatrixXd{{3, 4}, {0, 0}}), CorrelationMatrix::identity(2)) -
                 12.5) <= 1e-12);
  const double v = loss_gaussian(rows({{1, 0}, {0, 1}}), corr2(0.5));
  CHECK(std::abs(v - 1.0456512608815525) <= 1e-12);
  CHECK(std::abs(v - (std::log(0.75) + 4.0 / 3.0)) <= 1e-12);
  CHECK(loss_gaussian(rows({{2, 0}, {-3, 0}, {0.5, 0}}), CorrelationMatrix::identity(2)) ==
        doctest::Approx((4.0 + 9.0 + 0.25) / 2));
}

TEST_CASE("rho functions") {
  CHECK(rho_huber(1, 4) == 1.0);
  CHECK(std::abs(rho_huber(9, 4) - 8.0) <= 1e-12);
  CHECK(rho_huber(4, 4) == 4.0);

  CHECK(rho_tukey(0, 3) == 0.0);
  CHECK(std::abs(rho_tukey(9, 3) - 1.5) <= 1e-12);
  CHECK(std::abs(rho_tukey(4.5, 3) - 1.3125) <= 1e-12);
  CHECK(rho_tukey(1e6, 3) == 1.5);

  CHECK(rho_truncated(3, 5) == 3.0);
  CHECK(rho_truncated(25, 5) == 5.0);

  CHECK(rho(LossKind::kGaussian, 7.0, 1.0) == 7.0);
  CHECK(rho(LossKind::kTukey, 4.5, 9.0) == rho_tukey(4.5, 3.0));
}

TEST_CASE("rho properties") {
  for (double t : {0.5, 1.0, 4.0, 11.3}) {
    const double eps = 1e-9;
    CHECK(std::abs(rho_huber(t + eps, t) - rho_huber(t - eps, t)) <= 1e-6);
    CHECK(std::abs(rho_truncated(t + eps, t) - rho_truncated(t - eps, t)) <= 1e-6);
    const double tau = std::sqrt(t);
    CHECK(std::abs(rho_tukey(t + eps, tau) - rho_tukey(t - eps, tau)) <= 1e-6);

    double prev_h = -1, prev_tr = -1, prev_tk = -1;
    for (double d2 = 0.0; d2 <= 5 * t; d2 += t / 97) {
      const double h = rho_huber(d2, t), tr = rho_truncated(d2, t), tk = rho_tukey(d2, tau);
      CHECK(h >= prev_h);
      CHECK(tr >= prev_tr);
      CHECK(tk >= prev_tk);
      CHECK(h <= d2 + 1e-12);
      CHECK(tr <= d2);
      CHECK(tk <= t / 6 + 1e-15);
      prev_h = h;
      prev_tr = tr;
      prev_tk = tk;
    }
  }
}

TEST_CASE("robust losses") {
  const DataMatrix X = DataMatrix(Eigen::MatrixXd{{3, 4}, {0, 0}});
  const auto I2 = CorrelationMatrix::identity(2);
  LossSpec s;
  s.kind = LossKind::kTruncated;
  s.threshold = 5.0;
  // rows (3,4) and (0,0): 0 + (min(25,5) + 0)/2
  CHECK(std::abs(loss_robust(X, I2, s) - 2.5) <= 1e-12);

  s.threshold.reset();
  CHECK_THROWS_AS(loss_robust(X, I2, s), InvalidArgument);

  SUBCASE("benign data matches the gaussian loss") {
    const DataMatrix Y(normal_sample(50, 3, 3));
    std::mt19937_64 rng(8);
    const auto C = random_corr(3, rng);
    const double g = loss_gaussian(Y, C);
    const double big = mahalanobis_sq_all(Y, C).maxCoeff() + 1.0;
    for (auto kind : {LossKind::kHuber, LossKind::kTruncated}) {
      LossSpec r{kind, big};
      CHECK(loss_robust(Y, C, r) == g);
    }
  }

  SUBCASE("robust losses never exceed the gaussian loss") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 60; ++t) {
      const std::size_t p = 2 + t % 4;
      Eigen::MatrixXd raw = normal_sample(30, p, rng());
      raw.row(0).array() += 8.0;
      const DataMatrix Y(raw);
      const auto C = random_corr(p, rng);
      const double g = loss_gaussian(Y, C);
      const double thr = 0.5 + 10.0 * std::uniform_real_distribution<double>(0, 1)(rng);
      for (auto kind : {LossKind::kHuber, LossKind::kTruncated, LossKind::kTukey}) {
        LossSpec r{kind, thr};
        CHECK(loss_robust(Y, C, r) <= g + 1e-9 * std::abs(g));
      }
    }
  }

  SUBCASE("distances form") {
    const std::vector<double> d2{1.0, 9.0};
    CHECK(loss_from_distances(d2, 0.0, LossKind::kHuber, 4.0) == doctest::Approx(4.5));
    CHECK(loss_from_distances(d2, 0.0, LossKind::kGaussian, 0.0) == doctest::Approx(5.0));
    CHECK(loss_from_distances(d2, -1.0, LossKind::kTruncated, 4.0) == doctest::Approx(-1.0 + 2.5));
  }
}

TEST_CASE("quartiles and the IQR fence") {
  const std::vector<double> a{1, 2, 3, 4};
  const auto q = quartiles(a);
  CHECK(std::abs(q.q1 - 1.75) <= 1e-12);
  CHECK(std::abs(q.q3 - 3.25) <= 1e-12);
  CHECK(std::abs(iqr_threshold(a) - 7.75) <= 1e-12);

  const std::vector<double> c(9, 2.5);
  CHECK(iqr_threshold(c) == 2.5);

  const std::vector<double> b{4, 100, 2, 3, 1};
  CHECK(std::abs(iqr_threshold(b, 1.5) - 7.0) <= 1e-12);

  CHECK(quantile_linear(std::vector<double>{5, 1, 3}, 0.5) == 3.0);
  CHECK(quantile_linear(std::vector<double>{0, 10}, 0.3) == doctest::Approx(3.0));
  CHECK_THROWS_AS(iqr_threshold(std::vector<double>{1, 2, 3}), InvalidArgument);
}

TEST_CASE("outlier report") {
  Eigen::MatrixXd X(5, 2);
  X << 1, 7, 2, 7, 3, 7, 4, 7, 100, 7;
  const auto rep = outlier_report(DataMatrix(X, {"a", "b"}));
  REQUIRE(rep.size() == 2);
  CHECK(rep[0].name == "a");
  CHECK(rep[0].count == 1);
  CHECK(rep[0].upper_fence == doctest::Approx(7.0));
  CHECK(rep[0].lower_fence == doctest::Approx(-1.0));
  CHECK(rep[1].count == 0);

  const auto big = outlier_report(DataMatrix(normal_sample(10000, 2, 17)));
  for (const auto& col : big) {
    const double rate = static_cast<double>(col.count) / 10000.0;
    CHECK(rate >= 0.003);
    CHECK(rate <= 0.012);
  }
}

TEST_CASE("automatic threshold") {
  const DataMatrix X = standardize_columns(DataMatrix(normal_sample(1000, 5, 44)));
  LossSpec s{LossKind::kHuber, std::nullopt};
  const double t = resolve_threshold(X, s);
  CHECK(t >= 11.0);
  CHECK(t <= 30.0);
  const auto r = resolve_spec(X, s);
  REQUIRE(r.threshold.has_value());
  CHECK(*r.threshold == t);
  CHECK(resolve_threshold(X, LossSpec{LossKind::kTukey, 3.5}) == 3.5);

  SUBCASE("whitened data uses plain squared norms") {
    // columns orthogonal with zero mean and unit sd
    Eigen::MatrixXd W(8, 2);
    W << 1, 1, 1, -1, -1, 1, -1, -1, 1, 1, 1, -1, -1, 1, -1, -1;
    const DataMatrix Z = standardize_columns(DataMatrix(W));
    CHECK(pilot_correlation(Z).lambda == 0.0);
    std::vector<double> norms;
    for (Eigen::Index i = 0; i < Z.values().rows(); ++i) norms.push_back(Z.values().row(i).squaredNorm());
    CHECK(resolve_threshold(Z, s) == doctest::Approx(iqr_threshold(norms)));
  }

  SUBCASE("a shifted row exceeds the threshold") {
    Eigen::MatrixXd raw = normal_sample(200, 5, 9);
    raw.row(17).array() += 100.0;
    const DataMatrix Z = standardize_columns(DataMatrix(raw));
    const double thr = resolve_threshold(Z, s);
    const auto pilot = pilot_correlation(Z);
    CHECK(mahalanobis_sq_all(Z, pilot.C)(17) > thr);
  }
}

TEST_CASE("standardization and sample correlation") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 10, 2, 20, 3, 30, 4, 41;
  const DataMatrix Z = standardize_columns(DataMatrix(X));
  for (Eigen::Index j = 0; j < 2; ++j) {
    CHECK(std::abs(Z.values().col(j).mean()) <= 1e-15);
    const double var = Z.values().col(j).squaredNorm() / 3.0;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-14));
  }
  const Eigen::MatrixXd S = sample_correlation(Z);
  CHECK(S(0, 0) == 1.0);
  CHECK(S(0, 1) == S(1, 0));
  CHECK(S(0, 1) > 0.99);

  Eigen::MatrixXd flat(3, 2);
  flat << 1, 5, 2, 5, 3, 5;
  CHECK_THROWS_AS(standardize_columns(DataMatrix(flat)), DegenerateData);
}

TEST_CASE("objective over correlation matrices") {
  const DataMatrix Z = standardize_columns(DataMatrix(normal_sample(40, 3, 2)));
  std::mt19937_64 rng(3);
  const auto C = random_corr(3, rng);
  CHECK(make_corr_loss(Z, LossSpec{})(C) == doctest::Approx(loss_gaussian(Z, C)));
  const LossSpec h{LossKind::kHuber, 2.0};
  CHECK(make_corr_loss(Z, h)(C) == doctest::Approx(loss_robust(Z, C, h)));
  CHECK(to_string(parse_loss_kind("tukey")) == "tukey");
  CHECK_THROWS_AS(parse_loss_kind("cauchy"), InvalidArgument);
}
