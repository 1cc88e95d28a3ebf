#ifndef DPERM_CONVEX_BODY_HPP
#define DPERM_CONVEX_BODY_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "dperm/rng.hpp"

namespace dperm {

// Exact Euclidean projection onto {x : ||x||_1 <= radius}, by the standard
// sort-and-threshold procedure, O(p log p).
inline Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("project_l1_ball: radius must be positive");
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> mags(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  // Largest k with u_k > (sum_{j<=k} u_j - radius) / k determines the shift.
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumulative += mags[k];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (mags[k] <= candidate) break;
    theta = candidate;
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - theta;
    out[i] = mag > 0.0 ? (v[i] > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

enum class BodyKind { l2_ball, l1_ball };

// Centrally symmetric constraint set: an l2 or l1 ball of a given radius.
// Both have l2-diameter 2R.
class ConvexBody {
 public:
  static ConvexBody l2_ball(double radius, Eigen::Index dim) {
    return ConvexBody(BodyKind::l2_ball, radius, dim);
  }
  static ConvexBody l1_ball(double radius, Eigen::Index dim) {
    return ConvexBody(BodyKind::l1_ball, radius, dim);
  }

  BodyKind kind() const { return kind_; }
  double radius() const { return radius_; }
  Eigen::Index dimension() const { return dim_; }
  double l2_diameter() const { return 2.0 * radius_; }

  // Gauge norm min{r >= 0 : v in rC}.
  double minkowski_norm(const Eigen::VectorXd& v) const {
    check_dim(v);
    return kind_ == BodyKind::l2_ball ? v.norm() / radius_ : v.lpNorm<1>() / radius_;
  }

  // ||v||_{C*} = max_{w in C} |<w, v>|.
  double dual_norm(const Eigen::VectorXd& v) const {
    check_dim(v);
    return kind_ == BodyKind::l2_ball ? radius_ * v.norm()
                                      : radius_ * v.lpNorm<Eigen::Infinity>();
  }

  // Support function max_{w in C} <w, v>; equals dual_norm by central symmetry.
  double support(const Eigen::VectorXd& v) const { return dual_norm(v); }

  bool contains(const Eigen::VectorXd& v, double tol = 1e-12) const {
    return minkowski_norm(v) <= 1.0 + tol;
  }

  Eigen::VectorXd euclidean_project(const Eigen::VectorXd& v) const {
    check_dim(v);
    if (kind_ == BodyKind::l2_ball) {
      const double norm = v.norm();
      return norm <= radius_ ? v : Eigen::VectorXd(v * (radius_ / norm));
    }
    return project_l1_ball(v, radius_);
  }

 private:
  ConvexBody(BodyKind kind, double radius, Eigen::Index dim)
      : kind_(kind), radius_(radius), dim_(dim) {
    if (radius <= 0.0) throw std::invalid_argument("ConvexBody: radius must be positive");
    if (dim < 1) throw std::invalid_argument("ConvexBody: dimension must be at least 1");
  }

  void check_dim(const Eigen::VectorXd& v) const {
    if (v.size() != dim_) throw std::invalid_argument("ConvexBody: dimension mismatch");
  }

  BodyKind kind_;
  double radius_;
  Eigen::Index dim_;
};

// ||v||_2 <= diam(C) * ||v||_C for every v; returns whether the inequality
// holds to tolerance.
inline bool l2_bounded_by_gauge(const ConvexBody& body, const Eigen::VectorXd& v) {
  return v.norm() <= body.l2_diameter() * body.minkowski_norm(v) + 1e-12;
}

struct WidthEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of E_b[ sup_{w in C} <b, w> ] for standard normal b,
// i.e. the mean support-function value.
inline WidthEstimate gaussian_width_mc(const ConvexBody& body, std::int64_t n_samples,
                                       Xoshiro256& rng) {
  if (n_samples < 100) throw std::invalid_argument("gaussian_width_mc: need at least 100 samples");
  double sum = 0.0;
  double sum_sq = 0.0;
  Eigen::VectorXd b(body.dimension());
  for (std::int64_t s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.normal();
    const double w = body.support(b);
    sum += w;
    sum_sq += w * w;
  }
  const double n = static_cast<double>(n_samples);
  WidthEstimate est;
  est.mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - est.mean * est.mean);
  est.std_error = std::sqrt(var / n);
  return est;
}

}  // namespace dperm

#endif  // DPERM_CONVEX_BODY_HPP
