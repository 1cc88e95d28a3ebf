#ifndef DPERM_HARNESS_HPP
#define DPERM_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dperm/convex_body.hpp"
#include "dperm/datasets.hpp"
#include "dperm/erm.hpp"
#include "dperm/mirror.hpp"
#include "dperm/optimizers.hpp"
#include "dperm/privacy.hpp"

namespace dperm {

enum class Algorithm { svrg, svrg_pp, gd, accmd };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::svrg:
      return "svrg";
    case Algorithm::svrg_pp:
      return "svrgpp";
    case Algorithm::gd:
      return "gd";
    case Algorithm::accmd:
      return "accmd";
  }
  return "svrg";
}

enum class CalibrationMode { auto_switch, moments, advanced, off };

inline const char* to_string(CalibrationMode m) {
  switch (m) {
    case CalibrationMode::auto_switch:
      return "auto";
    case CalibrationMode::moments:
      return "moments";
    case CalibrationMode::advanced:
      return "advanced";
    case CalibrationMode::off:
      return "off";
  }
  return "auto";
}

struct DatasetSource {
  enum class Kind { libsvm_file, csv_file, synthetic_logistic, synthetic_quadratic };

  Kind kind = Kind::synthetic_logistic;
  std::string path;
  Eigen::Index label_column = -1;
  Eigen::Index n = 1000;
  Eigen::Index p = 10;
  double mu = 0.1;
  double smooth_l = 1.0;
  std::uint64_t seed = 0;

  // Grammar: "synth-logistic:n=..,p=..,seed=..",
  //          "synth-quadratic:n=..,p=..,mu=..,L=..,seed=..",
  //          "libsvm:<path>", "csv:<path>[,label=<col>]",
  //          or a bare path (.csv dispatches to csv, anything else libsvm).
  static DatasetSource parse(const std::string& text);
  std::string describe() const;
};

inline Dataset load_dataset(const DatasetSource& src) {
  switch (src.kind) {
    case DatasetSource::Kind::libsvm_file:
      return load_libsvm(src.path);
    case DatasetSource::Kind::csv_file:
      return load_csv(src.path, src.label_column);
    case DatasetSource::Kind::synthetic_logistic:
      return synth_logistic(src.n, src.p, src.seed);
    case DatasetSource::Kind::synthetic_quadratic:
      return synth_quadratic(src.n, src.p, src.mu, src.smooth_l, src.seed);
  }
  throw std::logic_error("load_dataset: unknown source kind");
}

struct ExperimentSpec {
  Algorithm algorithm = Algorithm::svrg;
  DatasetSource source;
  Normalization normalization = Normalization::row_l2_unit;
  Eigen::Index subsample_n = 0;  // 0 keeps all rows
  double positive_class = 2.0;   // binarization rule for multi-class labels
  LossKind loss = LossKind::logistic;
  RegKind reg_kind = RegKind::squared_l2;
  double lambda = 0.01;
  BodyKind body_kind = BodyKind::l2_ball;  // accmd only
  double body_radius = 1.0;
  std::vector<double> epsilons{1.0};
  double delta = 1e-5;
  CalibrationMode calibration = CalibrationMode::auto_switch;
  double constant_c = 1.0;   // moments formulas
  double constant_c1 = 1.0;  // epsilon-range check
  double constant_c2 = 1.0;  // advanced composition
  std::int64_t outer_epochs = 0;  // T; 0 means recommend
  std::int64_t inner_steps = 0;   // m; 0 means recommend/default
  double step_size = 0.0;         // eta; 0 means recommend/default
  std::int64_t repetitions = 1;
  std::uint64_t base_seed = 0;
  double domain_radius = 1.0;  // squared-loss Lipschitz radius
  double reference_tol = 1e-10;
  std::string out_path;

  void validate() const;
  std::string canonical_string() const;
};

struct RunRow {
  double epsilon = 0.0;
  double delta = 0.0;
  std::int64_t repetition = 0;
  std::uint64_t seed = 0;
  double final_objective = 0.0;
  double final_excess_risk = 0.0;
  double final_grad_norm_sq = 0.0;
  RunTrace trace;
};

struct AggregateRow {
  double epsilon = 0.0;
  double delta = 0.0;
  std::int64_t repetitions = 0;
  double median_final_excess_risk = 0.0;
  double q1_final_excess_risk = 0.0;
  double q3_final_excess_risk = 0.0;
  double median_final_grad_norm_sq = 0.0;
  double median_wall_ms = 0.0;
};

struct ResultRecord {
  int schema_version = 1;
  std::string spec_digest;
  std::string spec_text;
  double reference_value = 0.0;
  double reference_residual = 0.0;
  bool reference_converged = false;
  std::uint64_t reference_iterations = 0;
  double lipschitz_g = 0.0;
  double smooth_l = 0.0;
  std::vector<RunRow> runs;
  std::vector<AggregateRow> aggregates;
  bool aborted = false;
  std::string error;
};

namespace detail {

inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

inline double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  T v{};
  if (!(is >> v) || !(is >> std::ws).eof()) {
    throw std::invalid_argument("spec: cannot parse value '" + text + "' for key '" + key + "'");
  }
  return v;
}

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

inline std::map<std::string, std::string> parse_kv_list(const std::string& text,
                                                        const std::string& context) {
  std::map<std::string, std::string> out;
  for (const auto& piece : split(text, ',')) {
    if (piece.empty()) continue;
    const auto eq = piece.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("spec: expected key=value in '" + context + "', got '" + piece +
                                  "'");
    }
    out[trim(piece.substr(0, eq))] = trim(piece.substr(eq + 1));
  }
  return out;
}

}  // namespace detail

inline DatasetSource DatasetSource::parse(const std::string& text) {
  DatasetSource src;
  const std::string trimmed = detail::trim(text);
  if (trimmed.empty()) throw std::invalid_argument("spec: empty dataset");

  auto apply_synth_keys = [&](const std::string& args, bool quadratic) {
    for (const auto& [k, v] : detail::parse_kv_list(args, trimmed)) {
      if (k == "n") {
        src.n = detail::parse_number<Eigen::Index>(v, "n");
      } else if (k == "p") {
        src.p = detail::parse_number<Eigen::Index>(v, "p");
      } else if (k == "seed") {
        src.seed = detail::parse_number<std::uint64_t>(v, "seed");
      } else if (quadratic && k == "mu") {
        src.mu = detail::parse_number<double>(v, "mu");
      } else if (quadratic && (k == "L" || k == "l")) {
        src.smooth_l = detail::parse_number<double>(v, "L");
      } else {
        throw std::invalid_argument("spec: unknown dataset key '" + k + "'");
      }
    }
  };

  if (trimmed.rfind("synth-logistic:", 0) == 0) {
    src.kind = Kind::synthetic_logistic;
    apply_synth_keys(trimmed.substr(15), false);
  } else if (trimmed.rfind("synth-quadratic:", 0) == 0) {
    src.kind = Kind::synthetic_quadratic;
    apply_synth_keys(trimmed.substr(16), true);
  } else if (trimmed.rfind("libsvm:", 0) == 0) {
    src.kind = Kind::libsvm_file;
    src.path = detail::trim(trimmed.substr(7));
  } else if (trimmed.rfind("csv:", 0) == 0) {
    src.kind = Kind::csv_file;
    const auto parts = detail::split(trimmed.substr(4), ',');
    src.path = parts.at(0);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      if (eq == std::string::npos || parts[i].substr(0, eq) != "label") {
        throw std::invalid_argument("spec: unknown csv option '" + parts[i] + "'");
      }
      src.label_column = detail::parse_number<Eigen::Index>(parts[i].substr(eq + 1), "label");
    }
  } else {
    src.path = trimmed;
    src.kind = trimmed.size() > 4 && trimmed.substr(trimmed.size() - 4) == ".csv"
                   ? Kind::csv_file
                   : Kind::libsvm_file;
  }
  return src;
}

inline std::string DatasetSource::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::libsvm_file:
      os << "libsvm:" << path;
      break;
    case Kind::csv_file:
      os << "csv:" << path << ",label=" << label_column;
      break;
    case Kind::synthetic_logistic:
      os << "synth-logistic:n=" << n << ",p=" << p << ",seed=" << seed;
      break;
    case Kind::synthetic_quadratic:
      os << "synth-quadratic:n=" << n << ",p=" << p << ",mu=" << mu << ",L=" << smooth_l
         << ",seed=" << seed;
      break;
  }
  return os.str();
}

inline void ExperimentSpec::validate() const {
  if (repetitions < 1) throw std::invalid_argument("spec: repetitions must be at least 1");
  if (epsilons.empty()) throw std::invalid_argument("spec: need at least one epsilon");
  for (const double eps : epsilons) {
    if (!(eps > 0.0)) throw std::invalid_argument("spec: epsilon values must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("spec: delta must be in (0,1)");
  if ((algorithm == Algorithm::gd || algorithm == Algorithm::accmd) && reg_kind != RegKind::none) {
    throw std::invalid_argument(
        "spec: gd and accmd are unregularized; use algorithm=svrg for composite objectives");
  }
  if (reg_kind == RegKind::squared_l2 || reg_kind == RegKind::l1) {
    if (!(lambda > 0.0)) throw std::invalid_argument("spec: lambda must be positive");
  }
  if (algorithm == Algorithm::accmd && !(body_radius > 0.0)) {
    throw std::invalid_argument("spec: body radius must be positive");
  }
  if (step_size < 0.0 || outer_epochs < 0 || inner_steps < 0) {
    throw std::invalid_argument("spec: schedule overrides must be non-negative");
  }
}

inline std::string ExperimentSpec::canonical_string() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "algorithm=" << to_string(algorithm) << '\n';
  os << "dataset=" << source.describe() << '\n';
  os << "normalize=" << to_string(normalization) << '\n';
  os << "subsample=" << subsample_n << '\n';
  os << "positive_class=" << positive_class << '\n';
  os << "loss=" << (loss == LossKind::logistic ? "logistic" : "squared") << '\n';
  const char* reg = reg_kind == RegKind::none        ? "none"
                    : reg_kind == RegKind::squared_l2 ? "squared_l2"
                    : reg_kind == RegKind::l1         ? "l1"
                                                      : "indicator";
  os << "regularizer=" << reg << '\n';
  os << "lambda=" << lambda << '\n';
  os << "body=" << (body_kind == BodyKind::l2_ball ? "l2" : "l1") << '\n';
  os << "radius=" << body_radius << '\n';
  os << "epsilon=";
  for (std::size_t i = 0; i < epsilons.size(); ++i) os << (i ? "," : "") << epsilons[i];
  os << '\n';
  os << "delta=" << delta << '\n';
  os << "calibration=" << to_string(calibration) << '\n';
  os << "c=" << constant_c << '\n';
  os << "c1=" << constant_c1 << '\n';
  os << "c2=" << constant_c2 << '\n';
  os << "T=" << outer_epochs << '\n';
  os << "m=" << inner_steps << '\n';
  os << "eta=" << step_size << '\n';
  os << "reps=" << repetitions << '\n';
  os << "seed=" << base_seed << '\n';
  os << "domain_radius=" << domain_radius << '\n';
  os << "reference_tol=" << reference_tol << '\n';
  return os.str();
}

// Applies one "key = value" setting; shared by the spec-file parser and the
// CLI flag overrides.
inline void apply_spec_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  if (key == "algorithm" || key == "algo") {
    if (value == "svrg") {
      spec.algorithm = Algorithm::svrg;
    } else if (value == "svrgpp" || value == "svrg++" || value == "svrg_pp") {
      spec.algorithm = Algorithm::svrg_pp;
    } else if (value == "gd") {
      spec.algorithm = Algorithm::gd;
    } else if (value == "accmd") {
      spec.algorithm = Algorithm::accmd;
    } else {
      throw std::invalid_argument("spec: unknown algorithm '" + value + "'");
    }
  } else if (key == "dataset") {
    spec.source = DatasetSource::parse(value);
  } else if (key == "normalize") {
    if (value == "row_l2_unit") {
      spec.normalization = Normalization::row_l2_unit;
    } else if (value == "minmax_then_row_l2" || value == "minmax") {
      spec.normalization = Normalization::minmax_then_row_l2;
    } else if (value == "none") {
      spec.normalization = Normalization::none;
    } else {
      throw std::invalid_argument("spec: unknown normalization '" + value + "'");
    }
  } else if (key == "subsample") {
    spec.subsample_n = detail::parse_number<Eigen::Index>(value, key);
  } else if (key == "positive_class") {
    spec.positive_class = detail::parse_number<double>(value, key);
  } else if (key == "loss") {
    if (value == "logistic") {
      spec.loss = LossKind::logistic;
    } else if (value == "squared") {
      spec.loss = LossKind::squared;
    } else {
      throw std::invalid_argument("spec: unknown loss '" + value + "'");
    }
  } else if (key == "regularizer") {
    if (value == "none") {
      spec.reg_kind = RegKind::none;
    } else if (value == "squared_l2" || value == "ridge") {
      spec.reg_kind = RegKind::squared_l2;
    } else if (value == "l1") {
      spec.reg_kind = RegKind::l1;
    } else {
      throw std::invalid_argument("spec: unknown regularizer '" + value + "'");
    }
  } else if (key == "lambda") {
    spec.lambda = detail::parse_number<double>(value, key);
  } else if (key == "body") {
    if (value == "l2") {
      spec.body_kind = BodyKind::l2_ball;
    } else if (value == "l1") {
      spec.body_kind = BodyKind::l1_ball;
    } else {
      throw std::invalid_argument("spec: unknown body '" + value + "'");
    }
  } else if (key == "radius") {
    spec.body_radius = detail::parse_number<double>(value, key);
  } else if (key == "epsilon") {
    spec.epsilons.clear();
    for (const auto& piece : detail::split(value, ',')) {
      if (!piece.empty()) spec.epsilons.push_back(detail::parse_number<double>(piece, key));
    }
  } else if (key == "delta") {
    spec.delta = detail::parse_number<double>(value, key);
  } else if (key == "calibration") {
    if (value == "auto") {
      spec.calibration = CalibrationMode::auto_switch;
    } else if (value == "moments") {
      spec.calibration = CalibrationMode::moments;
    } else if (value == "advanced") {
      spec.calibration = CalibrationMode::advanced;
    } else if (value == "off") {
      spec.calibration = CalibrationMode::off;
    } else {
      throw std::invalid_argument("spec: unknown calibration mode '" + value + "'");
    }
  } else if (key == "c") {
    spec.constant_c = detail::parse_number<double>(value, key);
  } else if (key == "c1") {
    spec.constant_c1 = detail::parse_number<double>(value, key);
  } else if (key == "c2") {
    spec.constant_c2 = detail::parse_number<double>(value, key);
  } else if (key == "T" || key == "t") {
    spec.outer_epochs = detail::parse_number<std::int64_t>(value, key);
  } else if (key == "m") {
    spec.inner_steps = detail::parse_number<std::int64_t>(value, key);
  } else if (key == "eta") {
    spec.step_size = detail::parse_number<double>(value, key);
  } else if (key == "reps" || key == "repetitions") {
    spec.repetitions = detail::parse_number<std::int64_t>(value, key);
  } else if (key == "seed") {
    spec.base_seed = detail::parse_number<std::uint64_t>(value, key);
  } else if (key == "domain_radius") {
    spec.domain_radius = detail::parse_number<double>(value, key);
  } else if (key == "reference_tol") {
    spec.reference_tol = detail::parse_number<double>(value, key);
  } else if (key == "out") {
    spec.out_path = value;
  } else {
    throw std::invalid_argument("spec: unknown key '" + key + "'");
  }
}

inline ExperimentSpec parse_spec_text(const std::string& text) {
  ExperimentSpec spec;
  std::istringstream in(text);
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("spec: expected key = value on line " + std::to_string(line_no));
    }
    apply_spec_key(spec, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return spec;
}

inline ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("spec: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_spec_text(buffer.str());
}

struct ResolvedSchedule {
  std::int64_t outer_epochs = 1;
  std::int64_t inner_steps = 1;
  double step_size = 0.0;
};

namespace detail {

inline NoisePlan calibrate_for(const ExperimentSpec& spec, double lipschitz_g,
                               const ResolvedSchedule& sched, Eigen::Index n,
                               const PrivacyBudget& budget, bool& switched) {
  switched = false;
  const auto queries_pp = [&]() {
    return (detail::saturating_queries((std::ldexp(1.0, static_cast<int>(sched.outer_epochs) + 1) -
                                        2.0) *
                                       static_cast<double>(sched.inner_steps)));
  };
  if (spec.calibration == CalibrationMode::off) {
    return NoisePlan::off_plan();
  }
  switch (spec.algorithm) {
    case Algorithm::gd:
    case Algorithm::accmd:
      // Full-gradient calibration has no epsilon-range restriction, so
      // moments/advanced/auto all resolve to the same closed form here.
      return calibrate_full_gradient(lipschitz_g, sched.outer_epochs, n, budget, spec.constant_c);
    case Algorithm::svrg: {
      if (spec.calibration == CalibrationMode::advanced) {
        return calibrate_advanced(lipschitz_g, sched.outer_epochs * sched.inner_steps, n, budget,
                                  spec.constant_c2);
      }
      NoisePlan plan = calibrate_svrg(lipschitz_g, sched.outer_epochs, sched.inner_steps, n,
                                      budget, spec.constant_c, spec.constant_c1);
      if (!plan.valid && spec.calibration == CalibrationMode::auto_switch) {
        switched = true;
        return calibrate_advanced(lipschitz_g, sched.outer_epochs * sched.inner_steps, n, budget,
                                  spec.constant_c2);
      }
      return plan;
    }
    case Algorithm::svrg_pp: {
      if (spec.calibration == CalibrationMode::advanced) {
        return calibrate_advanced(lipschitz_g, static_cast<std::int64_t>(queries_pp()), n, budget,
                                  spec.constant_c2);
      }
      NoisePlan plan = calibrate_svrg_pp(lipschitz_g, sched.outer_epochs, sched.inner_steps, n,
                                         budget, spec.constant_c, spec.constant_c1);
      if (!plan.valid && spec.calibration == CalibrationMode::auto_switch) {
        switched = true;
        return calibrate_advanced(lipschitz_g, static_cast<std::int64_t>(queries_pp()), n, budget,
                                  spec.constant_c2);
      }
      return plan;
    }
  }
  throw std::logic_error("calibrate_for: unknown algorithm");
}

}  // namespace detail

inline ResultRecord run_experiment(const ExperimentSpec& spec) {
  spec.validate();

  ResultRecord record;
  record.spec_text = spec.canonical_string();
  record.spec_digest = detail::hex64(detail::fnv1a64(record.spec_text));

  Dataset data = load_dataset(spec.source);
  normalize(data, spec.normalization);
  if (spec.subsample_n > 0) data = subsample(data, spec.subsample_n, spec.base_seed);
  if (spec.loss == LossKind::logistic && !labels_are_binary(data)) {
    binarize_labels(data, spec.positive_class);
  }

  const LossConstants constants = derive_constants(data, spec.loss, spec.domain_radius);
  if (constants.rows_exceed_unit_norm && spec.normalization == Normalization::none) {
    std::cerr << "warning: feature rows exceed unit norm; constants derived from actual norms "
              << "(G=" << constants.lipschitz_g << ", L=" << constants.smooth_l << ")\n";
  }
  record.lipschitz_g = constants.lipschitz_g;
  record.smooth_l = constants.smooth_l;
  const LossModel loss{spec.loss, constants.lipschitz_g, constants.smooth_l};

  Regularizer reg = Regularizer::none();
  if (spec.reg_kind == RegKind::squared_l2) reg = Regularizer::squared_l2(spec.lambda);
  if (spec.reg_kind == RegKind::l1) reg = Regularizer::l1(spec.lambda);

  const Eigen::Index n = data.size();
  const Eigen::Index p = data.dimension();
  const ErmObjective objective(std::move(data), loss, reg);

  // For the constrained algorithm the reference optimum lives on the body.
  ConvexBody body = spec.body_kind == BodyKind::l2_ball
                        ? ConvexBody::l2_ball(spec.body_radius, p)
                        : ConvexBody::l1_ball(spec.body_radius, p);
  const bool constrained = spec.algorithm == Algorithm::accmd;
  Reference reference;
  if (constrained) {
    const ErmObjective constrained_obj(objective.data(), loss, Regularizer::indicator(body));
    reference = reference_minimizer(constrained_obj, spec.reference_tol);
  } else {
    reference = reference_minimizer(objective, spec.reference_tol);
  }
  record.reference_value = reference.value;
  record.reference_residual = reference.residual;
  record.reference_converged = reference.converged;
  record.reference_iterations = reference.iterations;

  const double mu = objective.strong_convexity();
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(p);

  try {
    for (const double eps : spec.epsilons) {
      const PrivacyBudget budget(eps, spec.delta);

      ResolvedSchedule sched;
      switch (spec.algorithm) {
        case Algorithm::svrg: {
          if (spec.outer_epochs > 0 && spec.inner_steps > 0 && spec.step_size > 0.0) {
            sched = {spec.outer_epochs, spec.inner_steps, spec.step_size};
          } else {
            const SvrgSchedule rec = recommend_svrg_schedule(constants.smooth_l, mu, n, p,
                                                             constants.lipschitz_g, budget);
            sched = {spec.outer_epochs > 0 ? spec.outer_epochs : rec.outer_epochs,
                     spec.inner_steps > 0 ? spec.inner_steps : rec.inner_steps,
                     spec.step_size > 0.0 ? spec.step_size : rec.eta};
          }
          break;
        }
        case Algorithm::svrg_pp:
          sched.outer_epochs = spec.outer_epochs > 0
                                   ? spec.outer_epochs
                                   : recommend_svrg_pp_epochs(n, p, constants.lipschitz_g, budget);
          sched.inner_steps = spec.inner_steps > 0 ? spec.inner_steps : 16;
          sched.step_size =
              spec.step_size > 0.0 ? spec.step_size : 1.0 / (13.0 * constants.smooth_l);
          break;
        case Algorithm::gd:
          sched.outer_epochs =
              spec.outer_epochs > 0
                  ? spec.outer_epochs
                  : (mu > 0.0 ? recommend_T_pl(n, p, constants.lipschitz_g, budget)
                              : recommend_T_gradnorm(constants.smooth_l, n, p,
                                                     constants.lipschitz_g, budget));
          sched.step_size = spec.step_size > 0.0 ? spec.step_size : 1.0 / constants.smooth_l;
          break;
        case Algorithm::accmd: {
          if (spec.outer_epochs > 0) {
            sched.outer_epochs = spec.outer_epochs;
          } else {
            Xoshiro256 width_rng = make_stream(spec.base_seed, RngStream::width_mc);
            const WidthEstimate width = gaussian_width_mc(body, 100000, width_rng);
            const MirrorMap map(body);
            const double bregman_x0 = map.bregman(reference.point, x0);
            sched.outer_epochs =
                recommend_T_accmd(constants.smooth_l, width.mean, body.l2_diameter(), bregman_x0,
                                  n, constants.lipschitz_g, budget);
          }
          break;
        }
      }

      bool switched = false;
      const NoisePlan plan =
          detail::calibrate_for(spec, constants.lipschitz_g, sched, n, budget, switched);

      for (std::int64_t rep = 0; rep < spec.repetitions; ++rep) {
        const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(rep);
        RunRng rng(seed);

        OptimizeResult result{Eigen::VectorXd(), RunTrace{}};
        switch (spec.algorithm) {
          case Algorithm::svrg: {
            SvrgConfig cfg;
            cfg.outer_epochs = sched.outer_epochs;
            cfg.inner_steps = sched.inner_steps;
            cfg.step_size = sched.step_size;
            cfg.x0 = x0;
            cfg.noise = plan;
            cfg.reference_value = reference.value;
            result = dp_svrg(objective, cfg, rng);
            break;
          }
          case Algorithm::svrg_pp: {
            SvrgPpConfig cfg;
            cfg.outer_epochs = sched.outer_epochs;
            cfg.base_inner_steps = sched.inner_steps;
            cfg.step_size = sched.step_size;
            cfg.x0 = x0;
            cfg.noise = plan;
            cfg.reference_value = reference.value;
            result = dp_svrg_pp(objective, cfg, rng);
            break;
          }
          case Algorithm::gd: {
            GdConfig cfg;
            cfg.iterations = sched.outer_epochs;
            cfg.step_size = sched.step_size;
            cfg.smoothness = constants.smooth_l;
            cfg.x0 = x0;
            cfg.noise = plan;
            cfg.reference_value = reference.value;
            result = dp_gd(objective, cfg, rng);
            break;
          }
          case Algorithm::accmd: {
            AccmdConfig cfg;
            cfg.iterations = sched.outer_epochs;
            cfg.smoothness = constants.smooth_l;
            cfg.x0 = x0;
            cfg.noise = plan;
            cfg.reference_value = reference.value;
            const MirrorMap map(body);
            result = dp_accmd(objective, body, map, cfg, rng);
            break;
          }
        }

        result.trace.calibration_switched = switched;
        RunRow row;
        row.epsilon = eps;
        row.delta = spec.delta;
        row.repetition = rep;
        row.seed = seed;
        row.final_objective = result.trace.final_record().objective;
        row.final_excess_risk = result.trace.final_record().excess_risk;
        row.final_grad_norm_sq = result.trace.final_record().grad_norm_sq;
        row.trace = std::move(result.trace);
        record.runs.push_back(std::move(row));
      }
    }
  } catch (const std::exception& e) {
    record.aborted = true;
    record.error = e.what();
  }

  // Aggregates per epsilon, in the order the budgets were given.
  for (const double eps : spec.epsilons) {
    std::vector<double> risks, grads, walls;
    for (const auto& row : record.runs) {
      if (row.epsilon != eps) continue;
      risks.push_back(row.final_excess_risk);
      grads.push_back(row.final_grad_norm_sq);
      walls.push_back(row.trace.final_record().wall_ms);
    }
    if (risks.empty()) continue;
    std::sort(risks.begin(), risks.end());
    AggregateRow agg;
    agg.epsilon = eps;
    agg.delta = spec.delta;
    agg.repetitions = static_cast<std::int64_t>(risks.size());
    agg.median_final_excess_risk = detail::quantile_sorted(risks, 0.5);
    agg.q1_final_excess_risk = detail::quantile_sorted(risks, 0.25);
    agg.q3_final_excess_risk = detail::quantile_sorted(risks, 0.75);
    agg.median_final_grad_norm_sq = detail::median_of(grads);
    agg.median_wall_ms = detail::median_of(walls);
    record.aggregates.push_back(agg);
  }

  return record;
}

inline nlohmann::json to_json(const ResultRecord& record) {
  nlohmann::json j;
  j["schema_version"] = record.schema_version;
  j["spec_digest"] = record.spec_digest;
  j["spec_text"] = record.spec_text;
  j["reference"] = {{"value", record.reference_value},
                    {"residual", record.reference_residual},
                    {"converged", record.reference_converged},
                    {"iterations", record.reference_iterations}};
  j["constants"] = {{"lipschitz_g", record.lipschitz_g}, {"smooth_l", record.smooth_l}};
  j["aborted"] = record.aborted;
  j["error"] = record.error;

  nlohmann::json runs = nlohmann::json::array();
  for (const auto& row : record.runs) {
    nlohmann::json r;
    r["epsilon"] = row.epsilon;
    r["delta"] = row.delta;
    r["repetition"] = row.repetition;
    r["seed"] = row.seed;
    r["noise_mode"] = to_string(row.trace.noise_mode);
    r["sigma"] = row.trace.sigma;
    r["calibration_switched"] = row.trace.calibration_switched;
    r["returned_iterate"] = row.trace.returned_iterate;
    r["total_sample_gradients"] = row.trace.total_sample_gradients;
    r["final_objective"] = row.final_objective;
    r["final_excess_risk"] = row.final_excess_risk;
    r["final_grad_norm_sq"] = row.final_grad_norm_sq;
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : row.trace.epochs) {
      epochs.push_back({{"epoch", e.epoch},
                        {"objective", e.objective},
                        {"excess_risk", e.excess_risk},
                        {"grad_norm_sq", e.grad_norm_sq},
                        {"cum_sample_gradients", e.cum_sample_gradients},
                        {"wall_ms", e.wall_ms}});
    }
    r["epochs"] = std::move(epochs);
    runs.push_back(std::move(r));
  }
  j["runs"] = std::move(runs);

  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& a : record.aggregates) {
    aggs.push_back({{"epsilon", a.epsilon},
                    {"delta", a.delta},
                    {"repetitions", a.repetitions},
                    {"median_final_excess_risk", a.median_final_excess_risk},
                    {"q1_final_excess_risk", a.q1_final_excess_risk},
                    {"q3_final_excess_risk", a.q3_final_excess_risk},
                    {"median_final_grad_norm_sq", a.median_final_grad_norm_sq},
                    {"median_wall_ms", a.median_wall_ms}});
  }
  j["aggregates"] = std::move(aggs);
  return j;
}

inline ResultRecord record_from_json(const nlohmann::json& j) {
  ResultRecord record;
  record.schema_version = j.at("schema_version").get<int>();
  record.spec_digest = j.at("spec_digest").get<std::string>();
  record.spec_text = j.at("spec_text").get<std::string>();
  record.reference_value = j.at("reference").at("value").get<double>();
  record.reference_residual = j.at("reference").at("residual").get<double>();
  record.reference_converged = j.at("reference").at("converged").get<bool>();
  record.reference_iterations = j.at("reference").at("iterations").get<std::uint64_t>();
  record.lipschitz_g = j.at("constants").at("lipschitz_g").get<double>();
  record.smooth_l = j.at("constants").at("smooth_l").get<double>();
  record.aborted = j.at("aborted").get<bool>();
  record.error = j.at("error").get<std::string>();
  for (const auto& r : j.at("runs")) {
    RunRow row;
    row.epsilon = r.at("epsilon").get<double>();
    row.delta = r.at("delta").get<double>();
    row.repetition = r.at("repetition").get<std::int64_t>();
    row.seed = r.at("seed").get<std::uint64_t>();
    row.final_objective = r.at("final_objective").get<double>();
    row.final_excess_risk = r.at("final_excess_risk").get<double>();
    row.final_grad_norm_sq = r.at("final_grad_norm_sq").get<double>();
    const std::string mode = r.at("noise_mode").get<std::string>();
    row.trace.noise_mode = mode == "moments"    ? NoiseMode::moments
                           : mode == "advanced" ? NoiseMode::advanced
                                                : NoiseMode::off;
    row.trace.sigma = r.at("sigma").get<double>();
    row.trace.calibration_switched = r.at("calibration_switched").get<bool>();
    row.trace.returned_iterate = r.at("returned_iterate").get<std::int64_t>();
    row.trace.total_sample_gradients = r.at("total_sample_gradients").get<std::uint64_t>();
    for (const auto& e : r.at("epochs")) {
      EpochRecord rec;
      rec.epoch = e.at("epoch").get<std::int64_t>();
      rec.objective = e.at("objective").get<double>();
      rec.excess_risk = e.at("excess_risk").is_null()
                            ? std::numeric_limits<double>::quiet_NaN()
                            : e.at("excess_risk").get<double>();
      rec.grad_norm_sq = e.at("grad_norm_sq").get<double>();
      rec.cum_sample_gradients = e.at("cum_sample_gradients").get<std::uint64_t>();
      rec.wall_ms = e.at("wall_ms").get<double>();
      row.trace.epochs.push_back(rec);
    }
    record.runs.push_back(std::move(row));
  }
  for (const auto& a : j.at("aggregates")) {
    AggregateRow agg;
    agg.epsilon = a.at("epsilon").get<double>();
    agg.delta = a.at("delta").get<double>();
    agg.repetitions = a.at("repetitions").get<std::int64_t>();
    agg.median_final_excess_risk = a.at("median_final_excess_risk").get<double>();
    agg.q1_final_excess_risk = a.at("q1_final_excess_risk").get<double>();
    agg.q3_final_excess_risk = a.at("q3_final_excess_risk").get<double>();
    agg.median_final_grad_norm_sq = a.at("median_final_grad_norm_sq").get<double>();
    agg.median_wall_ms = a.at("median_wall_ms").get<double>();
    record.aggregates.push_back(agg);
  }
  return record;
}

inline ResultRecord load_result_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_result_record: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return record_from_json(j);
}

inline void write_json(const ResultRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json: cannot open " + path);
  out << to_json(record).dump(2) << '\n';
}

// One row per epoch per repetition:
// algorithm,epsilon,delta,repetition,epoch,excess_risk,grad_norm_sq,cum_sample_grads,wall_ms
inline void write_csv(const ResultRecord& record, const std::string& path,
                      const std::string& algorithm_name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << "algorithm,epsilon,delta,repetition,epoch,excess_risk,grad_norm_sq,cum_sample_grads,"
         "wall_ms\n";
  out << std::setprecision(17);
  for (const auto& row : record.runs) {
    for (const auto& e : row.trace.epochs) {
      out << algorithm_name << ',' << row.epsilon << ',' << row.delta << ',' << row.repetition
          << ',' << e.epoch << ',' << e.excess_risk << ',' << e.grad_norm_sq << ','
          << e.cum_sample_gradients << ',' << e.wall_ms << '\n';
    }
  }
}

// Writes <prefix>.json and <prefix>.csv.
inline void emit_results(const ResultRecord& record, const ExperimentSpec& spec,
                         const std::string& prefix) {
  write_json(record, prefix + ".json");
  write_csv(record, prefix + ".csv", to_string(spec.algorithm));
}

}  // namespace dperm

#endif  // DPERM_HARNESS_HPP
