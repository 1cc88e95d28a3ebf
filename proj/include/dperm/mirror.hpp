#ifndef DPERM_MIRROR_HPP
#define DPERM_MIRROR_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

#include "dperm/convex_body.hpp"
#include "dperm/optimizers.hpp"
#include "dperm/privacy.hpp"
#include "dperm/rng.hpp"

namespace dperm {

// Canonical mirror map per body: w(x) = (s/2) ||x||_2^2 with s chosen so that
// w is 1-strongly convex w.r.t. the body's gauge norm.
//   l2 ball radius R: s = 1/R^2      (exact: B_w = ||d||^2 / (2R^2) = gauge^2/2)
//   l1 ball radius R: s = p/R^2      (via ||d||_1^2 <= p ||d||_2^2)
// The quadratic surrogate for the l1 ball is looser by a factor p in B_w,
// traded for closed-form constrained steps.
class MirrorMap {
 public:
  explicit MirrorMap(ConvexBody body) : body_(std::move(body)) {
    const double r2 = body_.radius() * body_.radius();
    quad_scale_ = body_.kind() == BodyKind::l2_ball
                      ? 1.0 / r2
                      : static_cast<double>(body_.dimension()) / r2;
  }

  const ConvexBody& body() const { return body_; }
  double quad_scale() const { return quad_scale_; }

  double value(const Eigen::VectorXd& x) const { return 0.5 * quad_scale_ * x.squaredNorm(); }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return quad_scale_ * x; }

  // B_w(y, x) = w(y) - <grad w(x), y - x> - w(x)
  double bregman(const Eigen::VectorXd& y, const Eigen::VectorXd& x) const {
    return value(y) - gradient(x).dot(y - x) - value(x);
  }

 private:
  ConvexBody body_;
  double quad_scale_;
};

inline double bregman(const MirrorMap& map, const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
  return map.bregman(y, x);
}

// y-update: argmin_{y in C} { smooth_l_eff * B_w(y, x) + <g, y - x> } for the
// body's canonical map, which has the closed form project(x - g / (s * L_eff)).
// On the l2 ball with L_eff = L * diam^2 this is project(x - g R^2 / (L diam^2)).
inline Eigen::VectorXd smoothed_min_step(const ConvexBody& body, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& g, double smooth_l_eff) {
  if (!(smooth_l_eff > 0.0))
    throw std::invalid_argument("smoothed_min_step: smoothness must be positive");
  if (!body.contains(x, 1e-9)) throw std::invalid_argument("smoothed_min_step: x must lie in C");
  const MirrorMap map(body);
  return body.euclidean_project(x - g / (map.quad_scale() * smooth_l_eff));
}

// Same subproblem solved by projected gradient to a gradient-mapping
// tolerance; cross-checks the closed form and carries generic bodies.
inline Eigen::VectorXd smoothed_min_step_pg(const ConvexBody& body, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& g, double smooth_l_eff,
                                            double tol = 1e-10, std::int64_t max_iters = 100000) {
  if (!(smooth_l_eff > 0.0))
    throw std::invalid_argument("smoothed_min_step_pg: smoothness must be positive");
  if (!body.contains(x, 1e-9)) throw std::invalid_argument("smoothed_min_step_pg: x must lie in C");
  const MirrorMap map(body);
  const double curvature = map.quad_scale() * smooth_l_eff;
  const double step = 1.0 / curvature;
  Eigen::VectorXd y = body.euclidean_project(x);
  for (std::int64_t it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd grad = curvature * (y - x) + g;
    const Eigen::VectorXd y_next = body.euclidean_project(y - step * grad);
    const double mapping_norm = (y - y_next).norm() / step;
    y = y_next;
    if (mapping_norm <= tol) return y;
  }
  throw std::runtime_error("smoothed_min_step_pg: inner solver did not converge");
}

// z-update: argmin_{z in C} { B_w(z, z_prev) + alpha <g, z - z_prev> },
// closed form project(z_prev - (alpha / s) g) for the quadratic map.
inline Eigen::VectorXd mirror_step(const MirrorMap& map, const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& g_noisy, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("mirror_step: alpha must be non-negative");
  if (!map.body().contains(z, 1e-9)) throw std::invalid_argument("mirror_step: z must lie in C");
  if (alpha == 0.0) return z;
  return map.body().euclidean_project(z - (alpha / map.quad_scale()) * g_noisy);
}

struct AccmdConfig {
  std::int64_t iterations = 1;  // T
  double smoothness = 0.0;      // L of the loss w.r.t. the l2 norm
  Eigen::VectorXd x0;
  NoisePlan noise;
  // Schedule curvature: true uses L' = L * diam(C)^2 uniformly; false keeps
  // the plain-L schedule (the y-update is rescaled either way).
  bool rescale_smoothness = true;
  double reference_value = std::numeric_limits<double>::quiet_NaN();
};

// Accelerated mirror descent with gradient perturbation on the z-sequence:
//   x_{k+1} = r_k z_k + (1 - r_k) y_k
//   y_{k+1} = argmin_{y in C} { (L'/2) ||y - x_{k+1}||_C^2 + <grad F(x_{k+1}), y - x_{k+1}> }
//   z_{k+1} = argmin_{z in C} { B_w(z, z_k) + a_{k+1} <grad F(x_{k+1}) + b_{k+1}, z - z_k> }
// with a_{k+1} = (k+2)/(4 L'), r_k = 1/(2 a_{k+1} L') = 2/(k+2). Returns y_T.
template <SmoothObjective O>
OptimizeResult dp_accmd(const O& obj, const ConvexBody& body, const MirrorMap& map,
                        const AccmdConfig& cfg, RunRng& rng) {
  detail::reject_regularized(obj, "dp_accmd");
  if (cfg.iterations < 1) throw std::invalid_argument("dp_accmd: iterations must be at least 1");
  if (!(cfg.smoothness > 0.0)) throw std::invalid_argument("dp_accmd: smoothness must be positive");
  if (cfg.x0.size() != obj.dimension()) throw std::invalid_argument("dp_accmd: x0 dimension mismatch");
  if (!body.contains(cfg.x0, 1e-9)) throw std::invalid_argument("dp_accmd: x0 must lie in C");
  if (body.dimension() != obj.dimension())
    throw std::invalid_argument("dp_accmd: body dimension mismatch");

  const Eigen::Index n = obj.sample_count();
  const Eigen::Index p = obj.dimension();
  const double diam_sq = body.l2_diameter() * body.l2_diameter();
  const double step_curvature = cfg.smoothness * diam_sq;  // y-update curvature L'
  const double sched_curvature = cfg.rescale_smoothness ? step_curvature : cfg.smoothness;
  const double sigma = cfg.noise.sigma;

  RunTrace trace;
  trace.noise_mode = cfg.noise.mode;
  trace.sigma = sigma;
  detail::Stopwatch watch;
  std::uint64_t cum = 0;

  Eigen::VectorXd y = cfg.x0;
  Eigen::VectorXd z = cfg.x0;
  Eigen::VectorXd noise_buf(p);

  detail::record_epoch(trace, obj, y, 0, cfg.reference_value, cum, watch);

  for (std::int64_t k = 0; k < cfg.iterations; ++k) {
    const double alpha = static_cast<double>(k + 2) / (4.0 * sched_curvature);
    const double r = 1.0 / (2.0 * alpha * sched_curvature);
    const Eigen::VectorXd x = r * z + (1.0 - r) * y;
    Eigen::VectorXd grad = obj.full_gradient(x);
    cum += static_cast<std::uint64_t>(n);
    y = smoothed_min_step(body, x, grad, step_curvature);
    if (sigma > 0.0) {
      detail::fill_noise(noise_buf, sigma, rng.noise);
      grad += noise_buf;
    }
    z = mirror_step(map, z, grad, alpha);
    detail::record_epoch(trace, obj, y, k + 1, cfg.reference_value, cum, watch);
  }

  trace.total_sample_gradients = cum;
  return OptimizeResult{y, std::move(trace)};
}

// T = ceil(sqrt( L diam^2 sqrt(B_w(x*, x0)) n eps /
//                (G sqrt(ln(1/delta)) sqrt(width^2 + diam^2)) )), floored at 1.
inline std::int64_t recommend_T_accmd(double smooth_l, double body_width, double diameter,
                                      double bregman_x0, std::int64_t n, double lipschitz_g,
                                      const PrivacyBudget& budget) {
  if (!(smooth_l > 0.0) || !(diameter > 0.0) || !(lipschitz_g > 0.0) || !(body_width >= 0.0) ||
      !(bregman_x0 >= 0.0) || n < 1)
    throw std::invalid_argument("recommend_T_accmd: invalid arguments");
  const double t_sq = smooth_l * diameter * diameter * std::sqrt(bregman_x0) *
                      static_cast<double>(n) * budget.epsilon /
                      (lipschitz_g * std::sqrt(std::log(1.0 / budget.delta)) *
                       std::sqrt(body_width * body_width + diameter * diameter));
  return t_sq > 1.0 ? static_cast<std::int64_t>(std::ceil(std::sqrt(t_sq))) : std::int64_t{1};
}

}  // namespace dperm

#endif  // DPERM_MIRROR_HPP
