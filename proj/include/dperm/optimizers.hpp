#ifndef DPERM_OPTIMIZERS_HPP
#define DPERM_OPTIMIZERS_HPP

#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "dperm/erm.hpp"
#include "dperm/privacy.hpp"
#include "dperm/rng.hpp"

namespace dperm {

// Minimal objective surface the full-gradient optimizers need. ErmObjective
// models it; tests substitute synthetic objectives (e.g. non-convex wells).
template <typename T>
concept SmoothObjective = requires(const T& o, const Eigen::VectorXd& x) {
  { o.dimension() } -> std::convertible_to<Eigen::Index>;
  { o.sample_count() } -> std::convertible_to<Eigen::Index>;
  { o.value(x) } -> std::convertible_to<double>;
  { o.full_gradient(x) } -> std::convertible_to<Eigen::VectorXd>;
};

struct EpochRecord {
  std::int64_t epoch = 0;  // 0 is the initial point
  double objective = 0.0;
  double excess_risk = std::numeric_limits<double>::quiet_NaN();
  double grad_norm_sq = 0.0;
  std::uint64_t cum_sample_gradients = 0;
  double wall_ms = 0.0;  // cumulative
};

struct RunTrace {
  std::vector<EpochRecord> epochs;
  std::uint64_t total_sample_gradients = 0;
  NoiseMode noise_mode = NoiseMode::off;
  double sigma = 0.0;
  bool calibration_switched = false;   // set by the harness when it re-calibrated
  std::int64_t returned_iterate = -1;  // uniform-output DP-GD only

  const EpochRecord& final_record() const {
    if (epochs.empty()) throw std::logic_error("RunTrace: empty trace");
    return epochs.back();
  }
};

struct OptimizeResult {
  Eigen::VectorXd point;
  RunTrace trace;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Diagnostic pass; deliberately not counted against the oracle ledger.
template <SmoothObjective O>
void record_epoch(RunTrace& trace, const O& obj, const Eigen::VectorXd& x, std::int64_t epoch,
                  double reference_value, std::uint64_t cum, const Stopwatch& watch) {
  EpochRecord rec;
  rec.epoch = epoch;
  rec.objective = obj.value(x);
  if (!std::isnan(reference_value)) rec.excess_risk = rec.objective - reference_value;
  rec.grad_norm_sq = obj.full_gradient(x).squaredNorm();
  rec.cum_sample_gradients = cum;
  rec.wall_ms = watch.elapsed_ms();
  trace.epochs.push_back(rec);
}

inline void fill_noise(Eigen::VectorXd& buf, double sigma, Xoshiro256& rng) {
  for (Eigen::Index i = 0; i < buf.size(); ++i) buf[i] = sigma * rng.normal();
}

}  // namespace detail

struct SvrgConfig {
  std::int64_t outer_epochs = 1;  // T
  std::int64_t inner_steps = 1;   // m
  double step_size = 0.0;         // eta
  Eigen::VectorXd x0;
  NoisePlan noise;
  double reference_value = std::numeric_limits<double>::quiet_NaN();
};

struct SvrgPpConfig {
  std::int64_t outer_epochs = 1;      // T; epoch s runs 2^s * m inner steps
  std::int64_t base_inner_steps = 1;  // m
  double step_size = 0.0;
  Eigen::VectorXd x0;
  NoisePlan noise;
  double reference_value = std::numeric_limits<double>::quiet_NaN();
};

enum class GdOutput { last_iterate, uniform_iterate };

struct GdConfig {
  std::int64_t iterations = 1;  // T
  double step_size = 0.0;       // eta in (0, 1/L]
  double smoothness = 0.0;      // L, used to validate the step size
  Eigen::VectorXd x0;
  NoisePlan noise;
  GdOutput output_mode = GdOutput::last_iterate;
  double reference_value = std::numeric_limits<double>::quiet_NaN();
};

// Variance-reduced stochastic prox steps with per-epoch full-gradient
// snapshots. Each epoch: snapshot mean gradient, m inner steps of
//   v = grad f(x_{t-1}, z_i) - grad f(snapshot, z_i) + snapshot_grad + noise,
//   x_t = prox_{eta r}(x_{t-1} - eta v),
// epoch output is the in-epoch average, which also seeds the next epoch.
// Oracle cost is exactly n + 2m sample gradients per epoch.
inline OptimizeResult dp_svrg(const ErmObjective& obj, const SvrgConfig& cfg, RunRng& rng) {
  if (cfg.outer_epochs < 1 || cfg.inner_steps < 1)
    throw std::invalid_argument("dp_svrg: epoch counts must be at least 1");
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("dp_svrg: step size must be positive");
  if (cfg.x0.size() != obj.dimension()) throw std::invalid_argument("dp_svrg: x0 dimension mismatch");

  const Eigen::Index n = obj.sample_count();
  const Eigen::Index p = obj.dimension();
  const double eta = cfg.step_size;
  const double sigma = cfg.noise.sigma;

  RunTrace trace;
  trace.noise_mode = cfg.noise.mode;
  trace.sigma = sigma;
  detail::Stopwatch watch;
  std::uint64_t cum = 0;

  Eigen::VectorXd snapshot = cfg.x0;
  Eigen::VectorXd x = cfg.x0;
  Eigen::VectorXd snapshot_grad(p);
  Eigen::VectorXd direction(p);
  Eigen::VectorXd noise_buf(p);
  Eigen::VectorXd epoch_mean(p);

  detail::record_epoch(trace, obj, snapshot, 0, cfg.reference_value, cum, watch);

  for (std::int64_t s = 1; s <= cfg.outer_epochs; ++s) {
    snapshot_grad = obj.full_gradient(snapshot);
    cum += static_cast<std::uint64_t>(n);
    x = snapshot;
    epoch_mean.setZero();
    for (std::int64_t t = 1; t <= cfg.inner_steps; ++t) {
      const auto i = static_cast<Eigen::Index>(rng.index.uniform_index(static_cast<std::size_t>(n)));
      direction = snapshot_grad;
      obj.add_sample_gradient(x, i, 1.0, direction);
      obj.add_sample_gradient(snapshot, i, -1.0, direction);
      cum += 2;
      if (sigma > 0.0) {
        detail::fill_noise(noise_buf, sigma, rng.noise);
        direction += noise_buf;
      }
      x = obj.prox(eta, x - eta * direction);
      epoch_mean += (x - epoch_mean) / static_cast<double>(t);
    }
    snapshot = epoch_mean;
    detail::record_epoch(trace, obj, snapshot, s, cfg.reference_value, cum, watch);
  }

  trace.total_sample_gradients = cum;
  return OptimizeResult{snapshot, std::move(trace)};
}

// Doubling-epoch variant for objectives without strong convexity. Epoch s
// runs 2^s * m inner steps; the gradient anchor is the previous epoch
// average while the iterate chain continues from the last inner iterate.
inline OptimizeResult dp_svrg_pp(const ErmObjective& obj, const SvrgPpConfig& cfg, RunRng& rng) {
  if (cfg.outer_epochs < 1 || cfg.base_inner_steps < 1)
    throw std::invalid_argument("dp_svrg_pp: epoch counts must be at least 1");
  if (cfg.outer_epochs > 40) throw std::invalid_argument("dp_svrg_pp: epoch count out of range");
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("dp_svrg_pp: step size must be positive");
  if (cfg.x0.size() != obj.dimension())
    throw std::invalid_argument("dp_svrg_pp: x0 dimension mismatch");

  const Eigen::Index n = obj.sample_count();
  const Eigen::Index p = obj.dimension();
  const double eta = cfg.step_size;
  const double sigma = cfg.noise.sigma;

  RunTrace trace;
  trace.noise_mode = cfg.noise.mode;
  trace.sigma = sigma;
  detail::Stopwatch watch;
  std::uint64_t cum = 0;

  Eigen::VectorXd anchor = cfg.x0;  // epoch average of the previous epoch
  Eigen::VectorXd x = cfg.x0;       // inner iterate chain
  Eigen::VectorXd anchor_grad(p);
  Eigen::VectorXd direction(p);
  Eigen::VectorXd noise_buf(p);
  Eigen::VectorXd epoch_mean(p);

  detail::record_epoch(trace, obj, anchor, 0, cfg.reference_value, cum, watch);

  for (std::int64_t s = 1; s <= cfg.outer_epochs; ++s) {
    anchor_grad = obj.full_gradient(anchor);
    cum += static_cast<std::uint64_t>(n);
    const std::int64_t epoch_steps = cfg.base_inner_steps * (std::int64_t{1} << s);
    epoch_mean.setZero();
    for (std::int64_t t = 1; t <= epoch_steps; ++t) {
      const auto i = static_cast<Eigen::Index>(rng.index.uniform_index(static_cast<std::size_t>(n)));
      direction = anchor_grad;
      obj.add_sample_gradient(x, i, 1.0, direction);
      obj.add_sample_gradient(anchor, i, -1.0, direction);
      cum += 2;
      if (sigma > 0.0) {
        detail::fill_noise(noise_buf, sigma, rng.noise);
        direction += noise_buf;
      }
      x = obj.prox(eta, x - eta * direction);
      epoch_mean += (x - epoch_mean) / static_cast<double>(t);
    }
    anchor = epoch_mean;  // next epoch's gradient anchor; x continues as-is
    detail::record_epoch(trace, obj, anchor, s, cfg.reference_value, cum, watch);
  }

  trace.total_sample_gradients = cum;
  return OptimizeResult{anchor, std::move(trace)};
}

namespace detail {

template <typename T>
concept HasRegularizer = requires(const T& o) {
  { o.regularizer() } -> std::convertible_to<const Regularizer&>;
};

template <typename O>
void reject_regularized(const O& obj, const char* who) {
  if constexpr (HasRegularizer<O>) {
    if (obj.regularizer().kind() != RegKind::none) {
      throw std::invalid_argument(std::string(who) +
                                  ": regularized objectives are not supported; use dp_svrg");
    }
  }
}

}  // namespace detail

// Full-gradient descent with per-step Gaussian perturbation:
//   x_t = x_{t-1} - eta (grad F(x_{t-1}) + z_{t-1}).
// Returns the last iterate, or an iterate drawn uniformly from
// {x_0, ..., x_{T-1}} in uniform mode.
template <SmoothObjective O>
OptimizeResult dp_gd(const O& obj, const GdConfig& cfg, RunRng& rng) {
  detail::reject_regularized(obj, "dp_gd");
  if (cfg.iterations < 1) throw std::invalid_argument("dp_gd: iterations must be at least 1");
  if (!(cfg.smoothness > 0.0)) throw std::invalid_argument("dp_gd: smoothness must be positive");
  if (!(cfg.step_size > 0.0) || cfg.step_size > 1.0 / cfg.smoothness + 1e-15)
    throw std::invalid_argument("dp_gd: step size must lie in (0, 1/L]");
  if (cfg.x0.size() != obj.dimension()) throw std::invalid_argument("dp_gd: x0 dimension mismatch");

  const Eigen::Index n = obj.sample_count();
  const Eigen::Index p = obj.dimension();
  const double sigma = cfg.noise.sigma;

  RunTrace trace;
  trace.noise_mode = cfg.noise.mode;
  trace.sigma = sigma;
  detail::Stopwatch watch;
  std::uint64_t cum = 0;

  std::int64_t pick = -1;
  if (cfg.output_mode == GdOutput::uniform_iterate) {
    pick = static_cast<std::int64_t>(
        rng.index.uniform_index(static_cast<std::size_t>(cfg.iterations)));
    trace.returned_iterate = pick;
  }

  Eigen::VectorXd x = cfg.x0;
  Eigen::VectorXd picked = cfg.x0;
  Eigen::VectorXd noise_buf(p);

  detail::record_epoch(trace, obj, x, 0, cfg.reference_value, cum, watch);

  for (std::int64_t t = 1; t <= cfg.iterations; ++t) {
    if (pick == t - 1) picked = x;
    Eigen::VectorXd grad = obj.full_gradient(x);
    cum += static_cast<std::uint64_t>(n);
    if (sigma > 0.0) {
      detail::fill_noise(noise_buf, sigma, rng.noise);
      grad += noise_buf;
    }
    x -= cfg.step_size * grad;
    detail::record_epoch(trace, obj, x, t, cfg.reference_value, cum, watch);
  }

  trace.total_sample_gradients = cum;
  Eigen::VectorXd out = cfg.output_mode == GdOutput::last_iterate ? x : picked;
  return OptimizeResult{std::move(out), std::move(trace)};
}

struct SvrgCondition {
  double value = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Epoch-contraction certificate for the strongly convex analysis:
//   value = 1 / (eta (1 - 8 eta L) mu m) + 8 L eta (m + 1) / (m (1 - 8 L eta)),
// ok when value < 1/2 and eta <= 1/(12 L).
inline SvrgCondition check_svrg_condition(double eta, double smooth_l, double mu,
                                          std::int64_t inner_steps) {
  if (!(smooth_l > 0.0)) throw std::invalid_argument("check_svrg_condition: L must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("check_svrg_condition: mu must be positive");
  if (inner_steps < 1) throw std::invalid_argument("check_svrg_condition: m must be at least 1");
  if (!(eta > 0.0) || eta >= 1.0 / (8.0 * smooth_l))
    throw std::invalid_argument("check_svrg_condition: eta must lie in (0, 1/(8L))");

  const double m = static_cast<double>(inner_steps);
  const double one_minus = 1.0 - 8.0 * eta * smooth_l;
  SvrgCondition cond;
  cond.value = 1.0 / (eta * one_minus * mu * m) + 8.0 * smooth_l * eta * (m + 1.0) / (m * one_minus);
  cond.ok = cond.value < 0.5 && eta <= 1.0 / (12.0 * smooth_l);
  return cond;
}

struct SvrgSchedule {
  double eta = 0.0;
  std::int64_t inner_steps = 0;
  std::int64_t outer_epochs = 0;
  double condition_value = 0.0;
};

// Grid search over eta = 1/(cL) and m = k * ceil(L/mu) for the smallest m
// admitting the contraction certificate, then the log-scale epoch count.
// Throws when the ladder has no feasible pair.
inline SvrgSchedule recommend_svrg_schedule(double smooth_l, double mu, std::int64_t n,
                                            std::int64_t p, double lipschitz_g,
                                            const PrivacyBudget& budget) {
  if (!(mu > 0.0)) throw std::invalid_argument("recommend_svrg_schedule: mu must be positive");
  if (!(smooth_l > 0.0)) throw std::invalid_argument("recommend_svrg_schedule: L must be positive");

  static constexpr double kStepDivisors[] = {12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0, 128.0};
  const auto base_m = static_cast<std::int64_t>(std::ceil(smooth_l / mu));

  SvrgSchedule best;
  bool found = false;
  for (std::int64_t k = 1; k <= 8192 && !found; k *= 2) {
    const std::int64_t m = base_m * k;
    for (const double c : kStepDivisors) {
      const double eta = 1.0 / (c * smooth_l);
      const SvrgCondition cond = check_svrg_condition(eta, smooth_l, mu, m);
      if (cond.ok) {
        best.eta = eta;
        best.inner_steps = m;
        best.condition_value = cond.value;
        found = true;
        break;
      }
    }
  }
  if (!found) {
    throw std::runtime_error("recommend_svrg_schedule: no feasible (eta, m) pair in the ladder");
  }

  const double nn = static_cast<double>(n) * static_cast<double>(n);
  const double arg = nn * budget.epsilon * budget.epsilon * mu /
                     (static_cast<double>(p) * lipschitz_g * lipschitz_g *
                      std::log(1.0 / budget.delta));
  best.outer_epochs =
      arg > 2.0 ? static_cast<std::int64_t>(std::ceil(std::log2(arg))) : std::int64_t{1};
  return best;
}

// Epoch count for the doubling-epoch scheme, log2 of n eps / (G sqrt(p ln(1/delta))).
inline std::int64_t recommend_svrg_pp_epochs(std::int64_t n, std::int64_t p, double lipschitz_g,
                                             const PrivacyBudget& budget) {
  const double arg =
      static_cast<double>(n) * budget.epsilon /
      (lipschitz_g * std::sqrt(static_cast<double>(p) * std::log(1.0 / budget.delta)));
  return arg > 2.0 ? static_cast<std::int64_t>(std::ceil(std::log2(arg))) : std::int64_t{1};
}

// T = ceil(ln(n^2 eps^2 / (p G^2 ln(1/delta)))) with hidden constants 1.
inline std::int64_t recommend_T_pl(std::int64_t n, std::int64_t p, double lipschitz_g,
                                   const PrivacyBudget& budget) {
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  const double arg = nn * budget.epsilon * budget.epsilon /
                     (static_cast<double>(p) * lipschitz_g * lipschitz_g *
                      std::log(1.0 / budget.delta));
  return arg > std::exp(1.0) ? static_cast<std::int64_t>(std::ceil(std::log(arg))) : std::int64_t{1};
}

// T = ceil(sqrt(L) n eps / (sqrt(p ln(1/delta)) G)) with hidden constants 1.
inline std::int64_t recommend_T_gradnorm(double smooth_l, std::int64_t n, std::int64_t p,
                                         double lipschitz_g, const PrivacyBudget& budget) {
  const double t = std::sqrt(smooth_l) * static_cast<double>(n) * budget.epsilon /
                   (std::sqrt(static_cast<double>(p) * std::log(1.0 / budget.delta)) * lipschitz_g);
  return t > 1.0 ? static_cast<std::int64_t>(std::ceil(t)) : std::int64_t{1};
}

struct PlReport {
  double worst_ratio = std::numeric_limits<double>::infinity();
  bool holds = false;
  std::int64_t points_checked = 0;
  std::int64_t points_skipped = 0;
};

// Evaluates ||grad F(x)||^2 >= 2 mu (F(x) - F*) on the sample points;
// points with F - F* below 1e-14 are skipped (ratio undefined there).
template <SmoothObjective O>
PlReport pl_check(const O& obj, double mu_pl, double f_star,
                  const std::vector<Eigen::VectorXd>& sample_points) {
  PlReport report;
  for (const auto& x : sample_points) {
    const double gap = obj.value(x) - f_star;
    if (gap < 1e-14) {
      ++report.points_skipped;
      continue;
    }
    const double ratio = obj.full_gradient(x).squaredNorm() / (2.0 * gap);
    report.worst_ratio = std::min(report.worst_ratio, ratio);
    ++report.points_checked;
  }
  report.holds = report.points_checked > 0 && report.worst_ratio >= mu_pl;
  return report;
}

}  // namespace dperm

#endif  // DPERM_OPTIMIZERS_HPP
