#include "glasd/benchmarks.hpp"

#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "glasd/errors.hpp"

namespace glasd {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::string_view to_string(BenchmarkFunction fn) {
  switch (fn) {
    case BenchmarkFunction::kAckley:
      return "ackley";
    case BenchmarkFunction::kGriewank:
      return "griewank";
    case BenchmarkFunction::kRastrigin:
      return "rastrigin";
    case BenchmarkFunction::kRosenbrock:
      return "rosenbrock";
    case BenchmarkFunction::kSumsquares:
      return "sumsquares";
  }
  return "unknown";
}

std::string_view to_string(BenchmarkVariant v) {
  return v == BenchmarkVariant::kBox ? "box" : "corr";
}

BenchmarkFunction parse_benchmark_function(std::string_view name) {
  for (auto fn : {BenchmarkFunction::kAckley, BenchmarkFunction::kGriewank,
                  BenchmarkFunction::kRastrigin, BenchmarkFunction::kRosenbrock,
                  BenchmarkFunction::kSumsquares}) {
    if (name == to_string(fn)) return fn;
  }
  throw InvalidArgument(fmt::format("unknown benchmark function '{}'", name));
}

BenchmarkVariant parse_benchmark_variant(std::string_view name) {
  if (name == "box") return BenchmarkVariant::kBox;
  if (name == "corr" || name == "corr-manifold") return BenchmarkVariant::kCorr;
  throw InvalidArgument(fmt::format("unknown benchmark variant '{}'", name));
}

double ackley(std::span<const double> x) {
  const double d = static_cast<double>(x.size());
  double sq = 0.0;
  double cs = 0.0;
  for (double v : x) {
    sq += v * v;
    cs += std::cos(kTwoPi * v);
  }
  return -20.0 * std::exp(-0.2 * std::sqrt(sq / d)) - std::exp(cs / d) + 20.0 + std::numbers::e;
}

double griewank(std::span<const double> x) {
  double sum = 0.0;
  double prod = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += x[i] * x[i];
    prod *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return sum / 4000.0 - prod + 1.0;
}

double rastrigin(std::span<const double> x) {
  double sum = 10.0 * static_cast<double>(x.size());
  for (double v : x) sum += v * v - 10.0 * std::cos(kTwoPi * v);
  return sum;
}

double rosenbrock(std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = x[i] - 1.0;
    sum += 100.0 * a * a + b * b;
  }
  return sum;
}

double sumsquares(std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += static_cast<double>(i + 1) * x[i] * x[i];
  return sum;
}

double evaluate(BenchmarkFunction fn, std::span<const double> x) {
  if (x.empty()) throw DimensionMismatch("benchmark input is empty");
  switch (fn) {
    case BenchmarkFunction::kAckley:
      return ackley(x);
    case BenchmarkFunction::kGriewank:
      return griewank(x);
    case BenchmarkFunction::kRastrigin:
      return rastrigin(x);
    case BenchmarkFunction::kRosenbrock:
      return rosenbrock(x);
    case BenchmarkFunction::kSumsquares:
      return sumsquares(x);
  }
  return 0.0;
}

double default_corr_scale(BenchmarkFunction fn) {
  switch (fn) {
    case BenchmarkFunction::kGriewank:
    case BenchmarkFunction::kRosenbrock:
      return 100.0;
    default:
      return 10.0;
  }
}

BoxDomain benchmark_box(BenchmarkFunction fn, std::size_t dim) {
  switch (fn) {
    case BenchmarkFunction::kAckley:
      return BoxDomain::uniform(dim, -32.768, 32.768);
    case BenchmarkFunction::kGriewank:
      return BoxDomain::uniform(dim, -600.0, 600.0);
    case BenchmarkFunction::kRastrigin:
      return BoxDomain::uniform(dim, -5.12, 5.12);
    case BenchmarkFunction::kRosenbrock:
      return BoxDomain::uniform(dim, -5.0, 10.0);
    case BenchmarkFunction::kSumsquares:
      return BoxDomain::uniform(dim, -10.0, 10.0);
  }
  throw InvalidArgument("unknown benchmark function");
}

std::vector<double> vec_offdiag(const CorrelationMatrix& C, double scale) {
  const std::size_t M = C.dim();
  std::vector<double> out;
  out.reserve(M * (M - 1));
  for (std::size_t p = 0; p < M; ++p) {
    for (std::size_t q = 0; q < M; ++q) {
      if (p != q) out.push_back(scale * C(p, q));
    }
  }
  return out;
}

double eval_benchmark(const BenchmarkSpec& spec, std::span<const double> point) {
  if (spec.variant == BenchmarkVariant::kCorr) {
    // Point is an angle vector.
    if (point.size() != angle_dim(spec.dim)) {
      throw DimensionMismatch(fmt::format("corr benchmark with M = {} needs {} angles, got {}",
                                          spec.dim, angle_dim(spec.dim), point.size()));
    }
    return eval_benchmark(spec, CorrelationMatrix::from_factor(angles_to_cholesky(spec.dim, point)));
  }
  if (point.size() != spec.dim) {
    throw DimensionMismatch(
        fmt::format("benchmark expects dimension {}, got {}", spec.dim, point.size()));
  }
  return evaluate(spec.fn, point);
}

double eval_benchmark(const BenchmarkSpec& spec, const CorrelationMatrix& C) {
  if (spec.variant != BenchmarkVariant::kCorr) {
    throw InvalidArgument("box benchmark evaluated on a correlation matrix");
  }
  if (C.dim() != spec.dim) {
    throw DimensionMismatch(fmt::format("benchmark expects M = {}, got {}", spec.dim, C.dim()));
  }
  return evaluate(spec.fn, vec_offdiag(C, spec.resolved_scale()));
}

}  // namespace glasd
