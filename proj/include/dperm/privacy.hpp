#ifndef DPERM_PRIVACY_HPP
#define DPERM_PRIVACY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "dperm/rng.hpp"

namespace dperm {

struct PrivacyBudget {
  double epsilon;
  double delta;

  PrivacyBudget(double eps, double del) : epsilon(eps), delta(del) {
    if (!(eps > 0.0)) throw std::invalid_argument("PrivacyBudget: epsilon must be positive");
    if (!(del > 0.0 && del < 1.0)) throw std::invalid_argument("PrivacyBudget: delta must be in (0,1)");
  }
};

enum class NoiseMode { moments, advanced, off };

inline const char* to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::moments:
      return "moments";
    case NoiseMode::advanced:
      return "advanced";
    case NoiseMode::off:
      return "off";
  }
  return "off";
}

// Calibrated per-step Gaussian noise. sigma is the per-coordinate standard
// deviation. The moments-mode formulas carry an unpinned multiplicative
// constant, exposed as `constant` (default 1); their output is therefore
// constant-dependent. The advanced-composition mode is fully explicit.
//
// `valid` is false when the epsilon-range precondition of the moments
// calibration fails; `diagnostic` then says why and the caller should either
// switch to advanced mode or accept a constant-dependent guarantee.
struct NoisePlan {
  double sigma = 0.0;
  NoiseMode mode = NoiseMode::off;
  double constant = 1.0;
  std::uint64_t total_queries = 1;
  double sampling_ratio = 1.0;  // q: 1/n for per-sample queries, 1 for full-gradient queries
  bool valid = true;
  std::string diagnostic;

  double sigma_sq() const { return sigma * sigma; }

  static NoisePlan off_plan(std::uint64_t queries = 1) {
    NoisePlan plan;
    plan.sigma = 0.0;
    plan.mode = NoiseMode::off;
    plan.total_queries = queries == 0 ? 1 : queries;
    return plan;
  }
};

namespace detail {

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0)) {
    throw std::invalid_argument(std::string("calibration: ") + name + " must be positive");
  }
}

inline void require_at_least_one(std::int64_t v, const char* name) {
  if (v < 1) {
    throw std::invalid_argument(std::string("calibration: ") + name + " must be at least 1");
  }
}

// 2^t as a double; exact for the t <= 60 range we support.
inline double pow2(std::int64_t t) {
  if (t < 0 || t > 60) throw std::invalid_argument("calibration: epoch count out of range [0, 60]");
  return std::ldexp(1.0, static_cast<int>(t));
}

inline std::uint64_t saturating_queries(double q) {
  const double cap = 9e18;
  return q >= cap ? static_cast<std::uint64_t>(cap) : static_cast<std::uint64_t>(q);
}

}  // namespace detail

// Per-sample variance-reduced queries, T outer epochs of m inner steps:
//   sigma^2 = c * G^2 * T * m * ln(1/delta) / (n^2 eps^2),
// valid for eps <= c1 * T*m / n^2. Outside that range the plan is flagged
// invalid and advanced-mode recalibration is the defensible fallback.
inline NoisePlan calibrate_svrg(double lipschitz_g, std::int64_t outer_epochs,
                                std::int64_t inner_steps, std::int64_t n,
                                const PrivacyBudget& budget, double constant = 1.0,
                                double range_constant = 1.0) {
  detail::require_positive(lipschitz_g, "G");
  detail::require_at_least_one(outer_epochs, "T");
  detail::require_at_least_one(inner_steps, "m");
  detail::require_at_least_one(n, "n");
  detail::require_positive(constant, "c");
  detail::require_positive(range_constant, "c1");

  const double queries = static_cast<double>(outer_epochs) * static_cast<double>(inner_steps);
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  NoisePlan plan;
  plan.mode = NoiseMode::moments;
  plan.constant = constant;
  plan.total_queries = detail::saturating_queries(queries);
  plan.sampling_ratio = 1.0 / static_cast<double>(n);
  const double sigma_sq = constant * lipschitz_g * lipschitz_g * queries *
                          std::log(1.0 / budget.delta) / (nn * budget.epsilon * budget.epsilon);
  plan.sigma = std::sqrt(sigma_sq);
  const double eps_cap = range_constant * queries / nn;
  if (budget.epsilon > eps_cap) {
    plan.valid = false;
    std::ostringstream msg;
    msg << "epsilon " << budget.epsilon << " exceeds the moments-accountant range "
        << "c1*T*m/n^2 = " << eps_cap << "; switch to advanced mode";
    plan.diagnostic = msg.str();
  }
  return plan;
}

// Doubling-epoch variant: epochs s = 1..T run 2^s * m inner steps, so
//   sigma^2 = c * G^2 * 2^T * m * ln(2/delta) / (n^2 eps^2),
// valid for eps <= c1 * 2^T * m / n^2. Total queries (2^{T+1} - 2) * m.
inline NoisePlan calibrate_svrg_pp(double lipschitz_g, std::int64_t outer_epochs,
                                   std::int64_t base_inner_steps, std::int64_t n,
                                   const PrivacyBudget& budget, double constant = 1.0,
                                   double range_constant = 1.0) {
  detail::require_positive(lipschitz_g, "G");
  if (outer_epochs < 0) throw std::invalid_argument("calibration: T must be non-negative");
  detail::require_at_least_one(base_inner_steps, "m");
  detail::require_at_least_one(n, "n");
  detail::require_positive(constant, "c");
  detail::require_positive(range_constant, "c1");

  const double two_t = detail::pow2(outer_epochs);
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  NoisePlan plan;
  plan.mode = NoiseMode::moments;
  plan.constant = constant;
  plan.total_queries = std::max<std::uint64_t>(
      1, detail::saturating_queries((2.0 * two_t - 2.0) * static_cast<double>(base_inner_steps)));
  plan.sampling_ratio = 1.0 / static_cast<double>(n);
  const double sigma_sq = constant * lipschitz_g * lipschitz_g * two_t *
                          static_cast<double>(base_inner_steps) * std::log(2.0 / budget.delta) /
                          (nn * budget.epsilon * budget.epsilon);
  plan.sigma = std::sqrt(sigma_sq);
  const double eps_cap = range_constant * two_t * static_cast<double>(base_inner_steps) / nn;
  if (budget.epsilon > eps_cap) {
    plan.valid = false;
    std::ostringstream msg;
    msg << "epsilon " << budget.epsilon << " exceeds the moments-accountant range "
        << "c1*2^T*m/n^2 = " << eps_cap << "; switch to advanced mode";
    plan.diagnostic = msg.str();
  }
  return plan;
}

// Full-gradient queries (one per iteration):
//   sigma^2 = c * G^2 * T * ln(1/delta) / (n^2 eps^2), no epsilon range
// restriction.
inline NoisePlan calibrate_full_gradient(double lipschitz_g, std::int64_t iterations,
                                         std::int64_t n, const PrivacyBudget& budget,
                                         double constant = 1.0) {
  detail::require_positive(lipschitz_g, "G");
  detail::require_at_least_one(iterations, "T");
  detail::require_at_least_one(n, "n");
  detail::require_positive(constant, "c");

  const double nn = static_cast<double>(n) * static_cast<double>(n);
  NoisePlan plan;
  plan.mode = NoiseMode::moments;
  plan.constant = constant;
  plan.total_queries = static_cast<std::uint64_t>(iterations);
  plan.sampling_ratio = 1.0;
  const double sigma_sq = constant * lipschitz_g * lipschitz_g * static_cast<double>(iterations) *
                          std::log(1.0 / budget.delta) / (nn * budget.epsilon * budget.epsilon);
  plan.sigma = std::sqrt(sigma_sq);
  return plan;
}

// Advanced composition plus amplification by sampling, for per-sample queries
// counted in total:
//   sigma^2 = c2 * G^2 * Q * ln(Q/delta) * ln(1/delta) / (n^2 eps^2).
// The extra ln(Q/delta) factor is the price of removing the epsilon range
// restriction. The sensitivity argument behind this bound scales with G, so
// the variance carries G^2.
inline NoisePlan calibrate_advanced(double lipschitz_g, std::int64_t total_queries, std::int64_t n,
                                    const PrivacyBudget& budget, double constant2 = 1.0) {
  detail::require_positive(lipschitz_g, "G");
  detail::require_at_least_one(total_queries, "T");
  detail::require_at_least_one(n, "n");
  detail::require_positive(constant2, "c2");

  const double q = static_cast<double>(total_queries);
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  NoisePlan plan;
  plan.mode = NoiseMode::advanced;
  plan.constant = constant2;
  plan.total_queries = static_cast<std::uint64_t>(total_queries);
  plan.sampling_ratio = 1.0 / static_cast<double>(n);
  const double sigma_sq = constant2 * lipschitz_g * lipschitz_g * q *
                          std::log(q / budget.delta) * std::log(1.0 / budget.delta) /
                          (nn * budget.epsilon * budget.epsilon);
  plan.sigma = std::sqrt(sigma_sq);
  return plan;
}

// Classical single-query Gaussian mechanism:
//   sigma = sqrt(2 ln(1.25/delta)) * sensitivity / epsilon.
inline double gaussian_mechanism_sigma(double l2_sensitivity, const PrivacyBudget& budget) {
  if (!(l2_sensitivity > 0.0))
    throw std::invalid_argument("gaussian_mechanism_sigma: sensitivity must be positive");
  return std::sqrt(2.0 * std::log(1.25 / budget.delta)) * l2_sensitivity / budget.epsilon;
}

// dim independent draws from N(0, sigma^2). sigma = 0 yields the zero vector
// without consuming generator state.
inline Eigen::VectorXd sample_noise(Eigen::Index dim, double sigma, Xoshiro256& rng) {
  if (dim < 1) throw std::invalid_argument("sample_noise: dim must be at least 1");
  if (sigma < 0.0) throw std::invalid_argument("sample_noise: sigma must be non-negative");
  if (sigma == 0.0) return Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd out(dim);
  for (Eigen::Index i = 0; i < dim; ++i) out[i] = sigma * rng.normal();
  return out;
}

}  // namespace dperm

#endif  // DPERM_PRIVACY_HPP
