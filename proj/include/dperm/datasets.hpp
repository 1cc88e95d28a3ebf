#ifndef DPERM_DATASETS_HPP
#define DPERM_DATASETS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Householder>
#include <Eigen/QR>

#include "dperm/erm.hpp"
#include "dperm/rng.hpp"

namespace dperm {

enum class Normalization { row_l2_unit, minmax_then_row_l2, none };

inline const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::row_l2_unit:
      return "row_l2_unit";
    case Normalization::minmax_then_row_l2:
      return "minmax_then_row_l2";
    case Normalization::none:
      return "none";
  }
  return "none";
}

inline void normalize(Dataset& data, Normalization mode) {
  if (mode == Normalization::none) return;
  if (mode == Normalization::minmax_then_row_l2) {
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      const double lo = data.features.col(j).minCoeff();
      const double hi = data.features.col(j).maxCoeff();
      if (hi > lo) {
        data.features.col(j) = (data.features.col(j).array() - lo) / (hi - lo);
      } else {
        data.features.col(j).setZero();
      }
    }
  }
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    const double norm = data.features.row(i).norm();
    if (norm > 0.0) data.features.row(i) /= norm;
  }
}

// Multi-class labels collapse to +1 on the positive class and -1 otherwise.
inline void binarize_labels(Dataset& data, double positive_class) {
  for (Eigen::Index i = 0; i < data.labels.size(); ++i)
    data.labels[i] = data.labels[i] == positive_class ? 1.0 : -1.0;
}

inline bool labels_are_binary(const Dataset& data) {
  for (Eigen::Index i = 0; i < data.labels.size(); ++i)
    if (data.labels[i] != 1.0 && data.labels[i] != -1.0) return false;
  return true;
}

// LIBSVM format: "<label> <index>:<value> ...", indices 1-based. The
// dimension is the largest index seen unless declared.
inline Dataset load_libsvm(const std::string& path, Eigen::Index declared_dim = 0) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_libsvm: cannot open " + path);

  std::vector<double> labels;
  std::vector<std::vector<std::pair<Eigen::Index, double>>> rows;
  Eigen::Index max_index = declared_dim;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double label;
    if (!(ls >> label)) {
      throw std::runtime_error("load_libsvm: malformed label at " + path + ":" +
                               std::to_string(line_no));
    }
    std::vector<std::pair<Eigen::Index, double>> row;
    std::string token;
    while (ls >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) {
        throw std::runtime_error("load_libsvm: malformed pair '" + token + "' at " + path + ":" +
                                 std::to_string(line_no));
      }
      Eigen::Index idx = 0;
      double value = 0.0;
      try {
        idx = static_cast<Eigen::Index>(std::stoll(token.substr(0, colon)));
        value = std::stod(token.substr(colon + 1));
      } catch (const std::exception&) {
        throw std::runtime_error("load_libsvm: malformed pair '" + token + "' at " + path + ":" +
                                 std::to_string(line_no));
      }
      if (idx < 1) {
        throw std::runtime_error("load_libsvm: indices are 1-based, got " + std::to_string(idx) +
                                 " at " + path + ":" + std::to_string(line_no));
      }
      max_index = std::max(max_index, idx);
      row.emplace_back(idx - 1, value);
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_libsvm: empty dataset in " + path);

  Dataset data;
  data.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(rows.size()), max_index);
  data.labels.resize(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.labels[static_cast<Eigen::Index>(i)] = labels[i];
    for (const auto& [j, v] : rows[i]) data.features(static_cast<Eigen::Index>(i), j) = v;
  }
  return data;
}

// CSV with optional header; the label column is configurable (default last
// when negative).
inline Dataset load_csv(const std::string& path, Eigen::Index label_column = -1) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::int64_t line_no = 0;
  bool header_checked = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (!header_checked && rows.empty()) {
        header_checked = true;  // tolerate one header line
        continue;
      }
      throw std::runtime_error("load_csv: non-numeric cell at " + path + ":" +
                               std::to_string(line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("load_csv: inconsistent column count at " + path + ":" +
                               std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_csv: empty dataset in " + path);

  const auto cols = static_cast<Eigen::Index>(rows.front().size());
  if (cols < 2) throw std::runtime_error("load_csv: need at least one feature column");
  const Eigen::Index label_col = label_column < 0 ? cols - 1 : label_column;
  if (label_col >= cols) throw std::runtime_error("load_csv: label column out of range");

  Dataset data;
  data.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(rows.size()), cols - 1);
  data.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Eigen::Index jj = 0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (j == label_col) {
        data.labels[static_cast<Eigen::Index>(i)] = rows[i][static_cast<std::size_t>(j)];
      } else {
        data.features(static_cast<Eigen::Index>(i), jj++) = rows[i][static_cast<std::size_t>(j)];
      }
    }
  }
  return data;
}

// Seeded subsample without replacement (partial Fisher-Yates).
inline Dataset subsample(const Dataset& data, Eigen::Index count, std::uint64_t seed) {
  if (count <= 0 || count >= data.size()) return data;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  Xoshiro256 rng = make_stream(seed, RngStream::data_synthesis);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto j = i + static_cast<Eigen::Index>(
                           rng.uniform_index(static_cast<std::size_t>(data.size() - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  Dataset out;
  out.features = FeatureMatrix(count, data.dimension());
  out.labels.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    out.features.row(i) = data.features.row(order[static_cast<std::size_t>(i)]);
    out.labels[i] = data.labels[order[static_cast<std::size_t>(i)]];
  }
  return out;
}

// Features uniform on the unit sphere, ground-truth weight on the unit
// sphere, labels +-1 with logistic probability of the margin.
inline Dataset synth_logistic(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  if (n < 2 || p < 1) throw std::invalid_argument("synth_logistic: need n >= 2 and p >= 1");
  Xoshiro256 rng = make_stream(seed, RngStream::data_synthesis);

  Eigen::VectorXd truth = rng.normal_vector(p);
  truth /= truth.norm();

  Dataset data;
  data.features = FeatureMatrix(n, p);
  data.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd a = rng.normal_vector(p);
    a /= a.norm();
    data.features.row(i) = a.transpose();
    const double prob_pos = 1.0 / (1.0 + std::exp(-truth.dot(a)));
    data.labels[i] = rng.next_double() < prob_pos ? 1.0 : -1.0;
  }
  return data;
}

// Least-squares instance whose mean Hessian (1/n) A^T A has spectrum spanning
// [mu, L] exactly: p directions from a seeded orthogonal matrix, eigenvalues
// linearly spaced, labels consistent with a planted solution of the given
// norm (so the unconstrained optimum and F* = 0 are known in closed form).
inline Dataset synth_quadratic(Eigen::Index n, Eigen::Index p, double mu, double smooth_l,
                               std::uint64_t seed, double solution_norm = 1.0) {
  if (n < 2 || p < 1) throw std::invalid_argument("synth_quadratic: need n >= 2 and p >= 1");
  if (n < p) throw std::invalid_argument("synth_quadratic: need n >= p");
  if (!(mu > 0.0) || !(smooth_l >= mu))
    throw std::invalid_argument("synth_quadratic: need 0 < mu <= L");
  Xoshiro256 rng = make_stream(seed, RngStream::data_synthesis);

  Eigen::MatrixXd gauss(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) gauss(i, j) = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ();

  Eigen::VectorXd eigenvalues(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    eigenvalues[j] =
        p == 1 ? smooth_l
               : mu + (smooth_l - mu) * static_cast<double>(j) / static_cast<double>(p - 1);
  }

  Eigen::VectorXd truth = rng.normal_vector(p);
  truth = solution_norm * truth / truth.norm();

  // c_j copies of direction j, each scaled so (1/n) sum a a^T = Q diag Q^T.
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(p), n / p);
  for (Eigen::Index r = 0; r < n % p; ++r) ++counts[static_cast<std::size_t>(r)];

  Dataset data;
  data.features = FeatureMatrix(n, p);
  data.labels.resize(n);
  Eigen::Index row = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double scale = std::sqrt(eigenvalues[j] * static_cast<double>(n) /
                                   static_cast<double>(counts[static_cast<std::size_t>(j)]));
    const Eigen::VectorXd a = scale * q.col(j);
    for (Eigen::Index k = 0; k < counts[static_cast<std::size_t>(j)]; ++k, ++row) {
      data.features.row(row) = a.transpose();
      data.labels[row] = a.dot(truth);
    }
  }
  return data;
}

struct Reference {
  Eigen::VectorXd point;
  double value = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::uint64_t iterations = 0;
};

// Deterministic proximal gradient at step 1/L (no backtracking, no noise),
// run until the prox-gradient-mapping norm falls below tol or the cap is hit.
// The caller is responsible for convexity.
inline Reference reference_minimizer(const ErmObjective& obj, double tol = 1e-10,
                                     std::uint64_t max_iterations = 1000000) {
  const double step = 1.0 / obj.loss().smooth_l;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(obj.dimension());
  if (obj.regularizer().kind() == RegKind::indicator) {
    x = obj.regularizer().body().euclidean_project(x);
  }

  Reference ref;
  for (std::uint64_t it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd next = obj.prox(step, x - step * obj.full_gradient(x));
    ref.residual = (x - next).norm() / step;
    x = next;
    ref.iterations = it + 1;
    if (ref.residual <= tol) {
      ref.converged = true;
      break;
    }
  }
  ref.point = x;
  ref.value = obj.value(x);
  return ref;
}

}  // namespace dperm

#endif  // DPERM_DATASETS_HPP
