#pragma once

// Standard box test functions and their correlation-matrix adaptations,
// where the function is applied to the scaled off-diagonal entries of C.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "glasd/box_optimizer.hpp"
#include "glasd/corr_manifold.hpp"

namespace glasd {

enum class BenchmarkFunction { kAckley, kGriewank, kRastrigin, kRosenbrock, kSumsquares };
enum class BenchmarkVariant { kBox, kCorr };

std::string_view to_string(BenchmarkFunction fn);
std::string_view to_string(BenchmarkVariant v);
BenchmarkFunction parse_benchmark_function(std::string_view name);
/// Accepts "box", "corr" and "corr-manifold".
BenchmarkVariant parse_benchmark_variant(std::string_view name);

double ackley(std::span<const double> x);
double griewank(std::span<const double> x);
double rastrigin(std::span<const double> x);
double rosenbrock(std::span<const double> x);
double sumsquares(std::span<const double> x);

double evaluate(BenchmarkFunction fn, std::span<const double> x);

/// Multiplier applied to correlations: 10 for Ackley, Rastrigin and
/// Sumsquares, 100 for Griewank and Rosenbrock.
double default_corr_scale(BenchmarkFunction fn);

/// Conventional search box for the plain variant.
BoxDomain benchmark_box(BenchmarkFunction fn, std::size_t dim);

/// All ordered pairs (p, q), p != q, row-major, times scale. Length M(M-1).
std::vector<double> vec_offdiag(const CorrelationMatrix& C, double scale);

struct BenchmarkSpec {
  BenchmarkFunction fn = BenchmarkFunction::kAckley;
  BenchmarkVariant variant = BenchmarkVariant::kBox;
  std::size_t dim = 2;  // box dimension, or M for the corr variant
  double scale = 0.0;   // 0 selects default_corr_scale(fn)

  double resolved_scale() const { return scale > 0.0 ? scale : default_corr_scale(fn); }
};

double eval_benchmark(const BenchmarkSpec& spec, std::span<const double> point);
double eval_benchmark(const BenchmarkSpec& spec, const CorrelationMatrix& C);

}  // namespace glasd
