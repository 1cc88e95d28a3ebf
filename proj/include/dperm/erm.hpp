#ifndef DPERM_ERM_HPP
#define DPERM_ERM_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>

#include "dperm/convex_body.hpp"

namespace dperm {

// Row-major feature storage: rows are samples, so per-sample access in the
// stochastic inner loops is contiguous.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DataPoint {
  Eigen::VectorXd features;
  double label = 0.0;
};

struct Dataset {
  FeatureMatrix features;  // n x p
  Eigen::VectorXd labels;  // n

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dimension() const { return features.cols(); }

  DataPoint point(Eigen::Index i) const {
    return DataPoint{features.row(i).transpose(), labels[i]};
  }

  double max_row_norm() const {
    double m = 0.0;
    for (Eigen::Index i = 0; i < features.rows(); ++i)
      m = std::max(m, features.row(i).norm());
    return m;
  }
};

enum class LossKind { logistic, squared };

// Smooth per-sample loss together with its Lipschitz and smoothness
// constants. Gradients have the form scale(m, y) * a with m = <x, a>, which
// is what the optimizers exploit to avoid temporaries.
struct LossModel {
  LossKind kind = LossKind::logistic;
  double lipschitz_g = 1.0;
  double smooth_l = 0.25;

  double value(double margin, double label) const {
    if (kind == LossKind::logistic) {
      const double m = label * margin;
      // log(1 + exp(-m)) evaluated stably for both signs of m.
      return m >= 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    const double r = margin - label;
    return 0.5 * r * r;
  }

  double gradient_scale(double margin, double label) const {
    if (kind == LossKind::logistic) {
      const double m = label * margin;
      // -y * sigmoid(-m)
      return -label / (1.0 + std::exp(m));
    }
    return margin - label;
  }
};

enum class RegKind { none, squared_l2, l1, indicator };

// Proximable regularizer r with closed-form prox per kind.
class Regularizer {
 public:
  static Regularizer none() { return Regularizer(RegKind::none, 0.0, {}); }
  static Regularizer squared_l2(double lambda) {
    require_positive(lambda);
    return Regularizer(RegKind::squared_l2, lambda, {});
  }
  static Regularizer l1(double lambda) {
    require_positive(lambda);
    return Regularizer(RegKind::l1, lambda, {});
  }
  static Regularizer indicator(ConvexBody body) {
    return Regularizer(RegKind::indicator, 0.0, std::move(body));
  }

  RegKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  const ConvexBody& body() const {
    if (kind_ != RegKind::indicator) throw std::logic_error("Regularizer: no body");
    return *body_;
  }

  // lambda for squared_l2, zero otherwise.
  double strong_convexity() const { return kind_ == RegKind::squared_l2 ? lambda_ : 0.0; }

  double value(const Eigen::VectorXd& x) const {
    switch (kind_) {
      case RegKind::none:
        return 0.0;
      case RegKind::squared_l2:
        return 0.5 * lambda_ * x.squaredNorm();
      case RegKind::l1:
        return lambda_ * x.lpNorm<1>();
      case RegKind::indicator:
        return body_->contains(x) ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  // argmin_x { 0.5 ||x - y||^2 + step * r(x) }
  Eigen::VectorXd prox(double step, const Eigen::VectorXd& y) const {
    if (step <= 0.0) throw std::invalid_argument("prox: step must be positive");
    switch (kind_) {
      case RegKind::none:
        return y;
      case RegKind::squared_l2:
        return y / (1.0 + step * lambda_);
      case RegKind::l1: {
        const double threshold = step * lambda_;
        Eigen::VectorXd out(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) {
          const double mag = std::abs(y[i]) - threshold;
          out[i] = mag > 0.0 ? (y[i] > 0.0 ? mag : -mag) : 0.0;
        }
        return out;
      }
      case RegKind::indicator:
        return body_->euclidean_project(y);
    }
    return y;
  }

 private:
  Regularizer(RegKind kind, double lambda, std::optional<ConvexBody> body)
      : kind_(kind), lambda_(lambda), body_(std::move(body)) {}

  static void require_positive(double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("Regularizer: lambda must be positive");
  }

  RegKind kind_;
  double lambda_;
  std::optional<ConvexBody> body_;
};

struct LossConstants {
  double lipschitz_g = 0.0;
  double smooth_l = 0.0;
  bool rows_exceed_unit_norm = false;
};

// Constants from data norms. Logistic: G = max ||a_i||, L = max ||a_i||^2 / 4.
// Squared: L = max ||a_i||^2 and G taken over the declared domain radius,
// G = max_i (R ||a_i|| + |b_i|) ||a_i||. Rows with norm > 1 are flagged so the
// caller can warn; the constants are still the actual-norm ones.
inline LossConstants derive_constants(const Dataset& data, LossKind kind,
                                      double domain_radius = 1.0) {
  if (data.size() == 0) throw std::invalid_argument("derive_constants: empty dataset");
  LossConstants out;
  double max_norm = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double norm = data.features.row(i).norm();
    max_norm = std::max(max_norm, norm);
    if (kind == LossKind::squared) {
      out.lipschitz_g =
          std::max(out.lipschitz_g, (domain_radius * norm + std::abs(data.labels[i])) * norm);
    }
  }
  out.rows_exceed_unit_norm = max_norm > 1.0 + 1e-12;
  if (kind == LossKind::logistic) {
    out.lipschitz_g = max_norm;
    out.smooth_l = max_norm * max_norm / 4.0;
  } else {
    out.smooth_l = max_norm * max_norm;
  }
  return out;
}

// F^r(x, D) = (1/n) sum_i f(x, z_i) + r(x), with its curvature metadata.
class ErmObjective {
 public:
  ErmObjective(Dataset data, LossModel loss, Regularizer reg)
      : ErmObjective(std::move(data), loss, reg, reg.strong_convexity()) {}

  // mu is the strong convexity of the composite F^r; defaults to the
  // regularizer's but may be supplied when the loss itself contributes.
  ErmObjective(Dataset data, LossModel loss, Regularizer reg, double mu)
      : data_(std::move(data)), loss_(loss), reg_(std::move(reg)), mu_(mu) {
    if (data_.size() == 0) throw std::invalid_argument("ErmObjective: empty dataset");
    if (data_.labels.size() != data_.size())
      throw std::invalid_argument("ErmObjective: label count mismatch");
  }

  Eigen::Index sample_count() const { return data_.size(); }
  Eigen::Index dimension() const { return data_.dimension(); }
  const Dataset& data() const { return data_; }
  const LossModel& loss() const { return loss_; }
  const Regularizer& regularizer() const { return reg_; }
  double strong_convexity() const { return mu_; }
  double condition_number() const {
    return mu_ > 0.0 ? loss_.smooth_l / mu_ : std::numeric_limits<double>::infinity();
  }

  // F(x, D), the smooth part only.
  double loss_value(const Eigen::VectorXd& x) const {
    check_dim(x);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < data_.size(); ++i)
      sum += loss_.value(data_.features.row(i).dot(x), data_.labels[i]);
    return sum / static_cast<double>(data_.size());
  }

  // F^r(x, D) = F + r.
  double value(const Eigen::VectorXd& x) const { return loss_value(x) + reg_.value(x); }

  // (1/n) sum_i grad f(x, z_i), accumulated in fixed sample order.
  Eigen::VectorXd full_gradient(const Eigen::VectorXd& x) const {
    check_dim(x);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.size());
    for (Eigen::Index i = 0; i < data_.size(); ++i) {
      const double scale = loss_.gradient_scale(data_.features.row(i).dot(x), data_.labels[i]);
      grad.noalias() += scale * data_.features.row(i).transpose();
    }
    return grad / static_cast<double>(data_.size());
  }

  Eigen::VectorXd sample_gradient(const Eigen::VectorXd& x, Eigen::Index i) const {
    check_dim(x);
    check_index(i);
    const double scale = loss_.gradient_scale(data_.features.row(i).dot(x), data_.labels[i]);
    return scale * data_.features.row(i).transpose();
  }

  // In-place variant used by the stochastic inner loops.
  void add_sample_gradient(const Eigen::VectorXd& x, Eigen::Index i, double weight,
                           Eigen::VectorXd& accum) const {
    check_dim(x);
    check_index(i);
    const double scale = loss_.gradient_scale(data_.features.row(i).dot(x), data_.labels[i]);
    accum.noalias() += (weight * scale) * data_.features.row(i).transpose();
  }

  Eigen::VectorXd prox(double step, const Eigen::VectorXd& y) const { return reg_.prox(step, y); }

 private:
  void check_dim(const Eigen::VectorXd& x) const {
    if (x.size() != data_.dimension()) throw std::invalid_argument("ErmObjective: dimension mismatch");
  }
  void check_index(Eigen::Index i) const {
    if (i < 0 || i >= data_.size()) throw std::out_of_range("ErmObjective: sample index out of range");
  }

  Dataset data_;
  LossModel loss_;
  Regularizer reg_;
  double mu_;
};

inline double excess_risk(const ErmObjective& obj, const Eigen::VectorXd& x, double f_star) {
  return obj.value(x) - f_star;
}

}  // namespace dperm

#endif  // DPERM_ERM_HPP
