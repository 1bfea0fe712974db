#pragma once

// Global Adaptive Stochastic Descent over a compact hyperrectangle.
//
// Each of the 2n signed coordinate directions carries its own step size and
// selection probability. Greedy iterations sample a direction from those
// probabilities and adapt both multiplicatively; exploration iterations take
// a uniform random coordinate move and may accept an uphill result with a
// logarithmically cooling probability. With exploration disabled the method
// reduces to plain adaptive stochastic descent (ASD).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace glasd {

using Objective = std::function<double(std::span<const double>)>;

class BoxDomain {
 public:
  BoxDomain(std::vector<double> lower, std::vector<double> upper);

  /// [lo, hi]^n
  static BoxDomain uniform(std::size_t n, double lo, double hi);

  std::size_t dim() const noexcept { return lower_.size(); }
  double lower(std::size_t i) const { return lower_[i]; }
  double upper(std::size_t i) const { return upper_[i]; }
  double width(std::size_t i) const { return upper_[i] - lower_[i]; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }

  bool contains(std::span<const double> x) const;
  bool strictly_contains(std::span<const double> x) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

enum class Termination { kMaxIterations, kStagnation };
std::string_view to_string(Termination t);

/// Tuning parameters. Fields left empty take dimension-dependent defaults
/// when the config is resolved against a domain.
struct OptimizerConfig {
  double s_init = 0.1;
  std::optional<double> p_init;  // 1/(2n); sets the starting weight of every direction
  double s_inc = 2.0;
  double s_dec = 2.0;
  double p_inc = 2.0;
  double p_dec = 2.0;
  int m = 5;                                // 1/m is the exploration rate
  std::optional<double> c;                  // 0.001 ln n
  std::optional<double> fixed_radius;       // empty: distance to the facing bound
  std::optional<std::size_t> max_iterations;     // round(3000 ln n)
  std::optional<std::size_t> stagnation_window;  // 4n
  double epsilon = 1e-20;
  bool explore_enabled = true;
  std::uint64_t seed = 0;
  bool record_trace = true;

  /// Fills every empty field for an n-dimensional problem and validates.
  OptimizerConfig resolved(std::size_t n) const;
  void validate() const;
};

struct TraceEntry {
  std::size_t iteration;
  std::size_t evaluations;
  double f_best;
};

struct RunRecord {
  std::vector<double> x_best;
  double f_best = 0.0;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  std::size_t accepted_steps = 0;
  Termination termination = Termination::kMaxIterations;
  std::uint64_t seed = 0;
  std::vector<TraceEntry> trace;  // entry 0 is the starting point
};

enum class StepMode { kGreedy, kExplore };

/// Snapshot handed to an observer after every iteration.
struct IterationInfo {
  std::size_t iteration;
  StepMode mode;
  std::size_t coordinate;
  int sign;
  std::span<const double> proposal;
  double f_proposal;
  bool accepted;
  std::span<const double> x;
  double f_current;
  double f_best;
  std::span<const double> step_sizes;
  std::span<const double> probabilities;
};

using IterationObserver = std::function<void(const IterationInfo&)>;

/// min(1, m c / ln(1 + t)).
double acceptance_prob(double t, int m, double c);

/// Signed displacement along coordinate i: sign * min(magnitude, half the
/// distance to the bound being approached). Never lands on a bound when x is
/// strictly interior.
double clip_step(std::span<const double> x, const BoxDomain& domain,
                 std::size_t i, int sign, double magnitude);

/// Full displacement vector form of clip_step (one nonzero entry at most).
std::vector<double> clip_step_vector(std::span<const double> x,
                                     const BoxDomain& domain, std::size_t i,
                                     int sign, double magnitude);

RunRecord glasd_minimize(const Objective& f, const BoxDomain& domain,
                         std::span<const double> x0,
                         const OptimizerConfig& config,
                         const IterationObserver& observer = {});

/// Starting point drawn uniformly in the domain from the run seed.
RunRecord glasd_minimize(const Objective& f, const BoxDomain& domain,
                         const OptimizerConfig& config,
                         const IterationObserver& observer = {});

/// glasd_minimize with exploration switched off.
RunRecord asd_minimize(const Objective& f, const BoxDomain& domain,
                       std::span<const double> x0, const OptimizerConfig& config,
                       const IterationObserver& observer = {});

/// Uniform point in the domain, used when no start is supplied.
std::vector<double> sample_uniform_point(const BoxDomain& domain,
                                         std::uint64_t seed);

}  // namespace glasd
