#include "glasd/box_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <string>

#include <fmt/core.h>

#include "glasd/errors.hpp"
#include "glasd/rng.hpp"

namespace glasd {

namespace {

constexpr double kMinStep = 1e-12;
constexpr double kMinProbability = 1e-12;

double log_dim(std::size_t n) {
  // ln n vanishes at n = 1; keep the defaults positive there.
  return std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
}

void normalize(std::vector<double>& p) {
  double total = 0.0;
  for (double& v : p) {
    v = std::max(v, kMinProbability);
    total += v;
  }
  for (double& v : p) v /= total;
}

std::size_t sample_direction(const std::vector<double>& p, double u) {
  double target = u * std::accumulate(p.begin(), p.end(), 0.0);
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    acc += p[j];
    if (target < acc) return j;
  }
  return p.size() - 1;
}

class Evaluator {
 public:
  explicit Evaluator(const Objective& f) : f_(f) {}

  double operator()(std::span<const double> x) {
    ++count_;
    double v;
    try {
      v = f_(x);
    } catch (const ObjectiveError&) {
      throw;
    } catch (const std::exception& e) {
      throw ObjectiveError(fmt::format("objective evaluation failed: {}", e.what()),
                           std::vector<double>(x.begin(), x.end()));
    }
    if (!std::isfinite(v)) {
      throw ObjectiveError("objective returned a non-finite value",
                           std::vector<double>(x.begin(), x.end()));
    }
    return v;
  }

  std::size_t count() const noexcept { return count_; }

 private:
  const Objective& f_;
  std::size_t count_ = 0;
};

}  // namespace

BoxDomain::BoxDomain(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw DimensionMismatch(fmt::format("box bounds have lengths {} and {}",
                                        lower_.size(), upper_.size()));
  }
  if (lower_.empty()) throw InvalidArgument("box domain must have dimension >= 1");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) ||
        !(lower_[i] < upper_[i])) {
      throw InvalidArgument(fmt::format("invalid bound [{}, {}] at coordinate {}",
                                        lower_[i], upper_[i], i));
    }
  }
}

BoxDomain BoxDomain::uniform(std::size_t n, double lo, double hi) {
  return BoxDomain(std::vector<double>(n, lo), std::vector<double>(n, hi));
}

bool BoxDomain::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
  }
  return true;
}

bool BoxDomain::strictly_contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > lower_[i] && x[i] < upper_[i])) return false;
  }
  return true;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kMaxIterations:
      return "max-iterations";
    case Termination::kStagnation:
      return "stagnation";
  }
  return "unknown";
}

OptimizerConfig OptimizerConfig::resolved(std::size_t n) const {
  if (n == 0) throw InvalidArgument("problem dimension must be >= 1");
  OptimizerConfig out = *this;
  const double ln_n = log_dim(n);
  if (!out.p_init) out.p_init = 1.0 / (2.0 * static_cast<double>(n));
  if (!out.c) out.c = 0.001 * ln_n;
  if (!out.max_iterations) {
    out.max_iterations = static_cast<std::size_t>(std::llround(3000.0 * ln_n));
  }
  if (!out.stagnation_window) out.stagnation_window = 4 * n;
  out.validate();
  return out;
}

void OptimizerConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
  };
  require(s_init > 0.0 && std::isfinite(s_init), "s_init must be positive");
  require(!p_init || (*p_init > 0.0 && *p_init <= 1.0), "p_init must lie in (0, 1]");
  require(s_inc > 1.0 && s_dec > 1.0, "s_inc and s_dec must exceed 1");
  require(p_inc > 1.0 && p_dec > 1.0, "p_inc and p_dec must exceed 1");
  require(m >= 1, "m must be >= 1");
  require(!c || (*c > 0.0 && std::isfinite(*c)), "c must be positive");
  require(!fixed_radius || (*fixed_radius > 0.0 && std::isfinite(*fixed_radius)),
          "exploration radius must be positive");
  require(!max_iterations || *max_iterations >= 1, "max_iterations must be >= 1");
  require(!stagnation_window || *stagnation_window >= 1,
          "stagnation_window must be >= 1");
  require(epsilon >= 0.0, "epsilon must be nonnegative");
}

double acceptance_prob(double t, int m, double c) {
  return std::min(1.0, static_cast<double>(m) * c / std::log1p(t));
}

double clip_step(std::span<const double> x, const BoxDomain& domain,
                 std::size_t i, int sign, double magnitude) {
  const double xi = x[i];
  if (sign > 0) {
    const double ub = domain.upper(i);
    double step = std::min(magnitude, (ub - xi) / 2.0);
    if (step > 0.0 && xi < ub && xi + step >= ub) step = 0.0;
    return std::max(step, 0.0);
  }
  const double lb = domain.lower(i);
  double step = std::min(magnitude, (xi - lb) / 2.0);
  if (step > 0.0 && xi > lb && xi - step <= lb) step = 0.0;
  return -std::max(step, 0.0);
}

std::vector<double> clip_step_vector(std::span<const double> x,
                                     const BoxDomain& domain, std::size_t i,
                                     int sign, double magnitude) {
  std::vector<double> delta(x.size(), 0.0);
  delta[i] = clip_step(x, domain, i, sign, magnitude);
  return delta;
}

std::vector<double> sample_uniform_point(const BoxDomain& domain,
                                         std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5eedULL));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> x(domain.dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = domain.lower(i) + u01(rng) * domain.width(i);
  }
  return x;
}

RunRecord glasd_minimize(const Objective& f, const BoxDomain& domain,
                         std::span<const double> x0,
                         const OptimizerConfig& config,
                         const IterationObserver& observer) {
  const std::size_t n = domain.dim();
  if (x0.size() != n) {
    throw DimensionMismatch(fmt::format(
        "starting point has dimension {}, domain has dimension {}", x0.size(), n));
  }
  if (!domain.contains(x0)) throw InvalidArgument("starting point lies outside the domain");

  const OptimizerConfig cfg = config.resolved(n);
  const std::size_t max_iter = *cfg.max_iterations;
  const std::size_t window = *cfg.stagnation_window;
  const double c = *cfg.c;
  const double greedy_prob = 1.0 - 1.0 / static_cast<double>(cfg.m);

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Evaluator eval(f);

  auto clamp_step = [&](double s, std::size_t i) {
    return std::clamp(s, kMinStep, std::max(kMinStep, domain.width(i)));
  };

  std::vector<double> x(x0.begin(), x0.end());
  double e_current = eval(x);

  RunRecord rec;
  rec.seed = cfg.seed;
  rec.x_best = x;
  rec.f_best = e_current;
  std::vector<double> best_buffer{rec.f_best};
  best_buffer.reserve(max_iter + 1);
  if (cfg.record_trace) {
    rec.trace.reserve(max_iter + 1);
    rec.trace.push_back({0, eval.count(), rec.f_best});
  }

  // Direction j covers coordinate j / 2; even j moves up, odd j moves down.
  std::vector<double> steps(2 * n);
  for (std::size_t j = 0; j < steps.size(); ++j) steps[j] = clamp_step(cfg.s_init, j / 2);
  std::vector<double> probs(2 * n, *cfg.p_init);
  normalize(probs);

  std::vector<double> proposal(n);
  for (std::size_t k = 1; k <= max_iter; ++k) {
    const double q = acceptance_prob(static_cast<double>(k), cfg.m, c);

    bool explore = false;
    if (cfg.explore_enabled) explore = !(u01(rng) < greedy_prob);

    std::size_t j = 0;
    std::size_t i;
    int sign;
    double delta;
    if (!explore) {
      j = sample_direction(probs, u01(rng));
      i = j / 2;
      sign = (j % 2 == 0) ? 1 : -1;
      delta = clip_step(x, domain, i, sign, steps[j]);
    } else {
      i = std::min(n - 1, static_cast<std::size_t>(u01(rng) * static_cast<double>(n)));
      sign = u01(rng) < 0.5 ? 1 : -1;
      const double radius = cfg.fixed_radius
                                ? *cfg.fixed_radius
                                : (sign > 0 ? domain.upper(i) - x[i] : x[i] - domain.lower(i));
      delta = clip_step(x, domain, i, sign, u01(rng) * radius);
    }

    proposal = x;
    proposal[i] += delta;
    const double e_new = eval(proposal);

    bool accepted = false;
    if (e_new < e_current) {
      accepted = true;
      if (!explore) {
        steps[j] = clamp_step(steps[j] * cfg.s_inc, i);
        probs[j] *= cfg.p_inc;
        normalize(probs);
      }
    } else if (explore) {
      accepted = u01(rng) < q;
    } else {
      steps[j] = clamp_step(steps[j] / cfg.s_dec, i);
      probs[j] /= cfg.p_dec;
      normalize(probs);
    }

    if (accepted) {
      x.swap(proposal);
      e_current = e_new;
      ++rec.accepted_steps;
      if (e_current < rec.f_best) {
        rec.f_best = e_current;
        rec.x_best = x;
      }
    }
    best_buffer.push_back(rec.f_best);
    rec.iterations = k;
    if (cfg.record_trace) rec.trace.push_back({k, eval.count(), rec.f_best});

    if (observer) {
      observer(IterationInfo{k, explore ? StepMode::kExplore : StepMode::kGreedy, i,
                             sign, accepted ? std::span<const double>(x)
                                            : std::span<const double>(proposal),
                             e_new, accepted, x, e_current, rec.f_best, steps,
                             probs});
    }

    if (k >= window && best_buffer[k - window] - best_buffer[k] < cfg.epsilon) {
      rec.termination = Termination::kStagnation;
      break;
    }
  }
  rec.evaluations = eval.count();
  return rec;
}

RunRecord glasd_minimize(const Objective& f, const BoxDomain& domain,
                         const OptimizerConfig& config,
                         const IterationObserver& observer) {
  const auto x0 = sample_uniform_point(domain, config.seed);
  return glasd_minimize(f, domain, x0, config, observer);
}

RunRecord asd_minimize(const Objective& f, const BoxDomain& domain,
                       std::span<const double> x0, const OptimizerConfig& config,
                       const IterationObserver& observer) {
  OptimizerConfig cfg = config;
  cfg.explore_enabled = false;
  return glasd_minimize(f, domain, x0, cfg, observer);
}

}  // namespace glasd
