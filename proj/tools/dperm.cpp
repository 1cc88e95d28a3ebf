// dperm: differentially private ERM benchmark runner.
//
// Subcommands:
//   run        execute an experiment spec and emit JSON + CSV results
//   calibrate  print the noise standard deviation for given parameters
//   reference  solve an instance to high accuracy and print F*
//
// Exit codes: 0 success, 2 invalid spec/arguments, 3 runtime failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dperm/dperm.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidSpec = 2;
constexpr int kExitRuntime = 3;

struct RunOptions {
  std::string spec_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

dperm::ErmObjective build_objective(const dperm::ExperimentSpec& spec, dperm::Dataset data) {
  dperm::normalize(data, spec.normalization);
  if (spec.subsample_n > 0) data = dperm::subsample(data, spec.subsample_n, spec.base_seed);
  if (spec.loss == dperm::LossKind::logistic && !dperm::labels_are_binary(data)) {
    dperm::binarize_labels(data, spec.positive_class);
  }
  const dperm::LossConstants constants =
      dperm::derive_constants(data, spec.loss, spec.domain_radius);
  if (constants.rows_exceed_unit_norm && spec.normalization == dperm::Normalization::none) {
    std::cerr << "warning: feature rows exceed unit norm; constants derived from actual norms "
              << "(G=" << constants.lipschitz_g << ", L=" << constants.smooth_l << ")\n";
  }
  const dperm::LossModel loss{spec.loss, constants.lipschitz_g, constants.smooth_l};
  dperm::Regularizer reg = dperm::Regularizer::none();
  if (spec.reg_kind == dperm::RegKind::squared_l2) reg = dperm::Regularizer::squared_l2(spec.lambda);
  if (spec.reg_kind == dperm::RegKind::l1) reg = dperm::Regularizer::l1(spec.lambda);
  return dperm::ErmObjective(std::move(data), loss, reg);
}

int cmd_run(const RunOptions& opts) {
  dperm::ExperimentSpec spec;
  try {
    if (!opts.spec_path.empty()) spec = dperm::parse_spec_file(opts.spec_path);
    for (const auto& [key, value] : opts.overrides) dperm::apply_spec_key(spec, key, value);
    spec.validate();
  } catch (const std::exception& e) {
    std::cerr << "invalid spec: " << e.what() << '\n';
    return kExitInvalidSpec;
  }

  try {
    const dperm::ResultRecord record = dperm::run_experiment(spec);
    const std::string prefix = spec.out_path.empty() ? "dperm_results" : spec.out_path;
    dperm::emit_results(record, spec, prefix);
    std::cout << "wrote " << prefix << ".json and " << prefix << ".csv\n";
    for (const auto& agg : record.aggregates) {
      std::cout << "epsilon=" << agg.epsilon << " delta=" << agg.delta
                << " reps=" << agg.repetitions
                << " median_final_excess_risk=" << agg.median_final_excess_risk
                << " median_final_grad_norm_sq=" << agg.median_final_grad_norm_sq << '\n';
    }
    if (record.aborted) {
      std::cerr << "run aborted after partial results: " << record.error << '\n';
      return kExitRuntime;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private empirical risk minimization benchmarks"};
  app.require_subcommand(1);

  // --- run ---
  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "run an experiment spec");
  run->add_option("--spec", run_opts.spec_path, "flat key=value spec file");
  std::string algo, epsilon_list, calibration, dataset, out_path;
  std::optional<double> delta, lambda, eta;
  std::optional<std::int64_t> T, m, reps;
  std::optional<std::uint64_t> seed;
  run->add_option("--algo", algo, "svrg | svrgpp | gd | accmd");
  run->add_option("--epsilon", epsilon_list, "comma-separated epsilon list");
  run->add_option("--delta", delta, "privacy delta");
  run->add_option("--calibration", calibration, "auto | moments | advanced | off");
  run->add_option("--dataset", dataset, "dataset source string");
  run->add_option("--lambda", lambda, "regularization weight");
  run->add_option("--T", T, "outer epochs / iterations");
  run->add_option("--m", m, "inner steps per epoch");
  run->add_option("--eta", eta, "step size");
  run->add_option("--reps", reps, "repetitions");
  run->add_option("--seed", seed, "base seed");
  run->add_option("--out", out_path, "output path prefix");

  // --- calibrate ---
  auto* calibrate = app.add_subcommand("calibrate", "print sigma for given parameters");
  std::string cal_algo = "svrg";
  double cal_g = 1.0, cal_eps = 1.0, cal_delta = 1e-5;
  double cal_c = 1.0, cal_c1 = 1.0, cal_c2 = 1.0, sensitivity = 1.0;
  std::int64_t cal_T = 1, cal_m = 1, cal_n = 1;
  std::string cal_mode = "moments";
  calibrate->add_option("--algo", cal_algo, "svrg | svrgpp | gd | accmd | gaussian");
  calibrate->add_option("--G", cal_g, "Lipschitz constant");
  calibrate->add_option("--T", cal_T, "outer epochs / iterations / queries");
  calibrate->add_option("--m", cal_m, "inner steps per epoch");
  calibrate->add_option("--n", cal_n, "dataset size");
  calibrate->add_option("--epsilon", cal_eps, "privacy epsilon");
  calibrate->add_option("--delta", cal_delta, "privacy delta");
  calibrate->add_option("--c", cal_c, "moments constant c");
  calibrate->add_option("--c1", cal_c1, "epsilon range constant c1");
  calibrate->add_option("--c2", cal_c2, "advanced composition constant c2");
  calibrate->add_option("--mode", cal_mode, "moments | advanced");
  calibrate->add_option("--sensitivity", sensitivity, "l2 sensitivity (gaussian)");

  // --- reference ---
  auto* reference = app.add_subcommand("reference", "solve an instance and print F*");
  dperm::ExperimentSpec ref_spec;
  std::string ref_dataset = "synth-logistic:n=1000,p=10,seed=0";
  std::string ref_loss = "logistic", ref_reg = "squared_l2", ref_normalize = "row_l2_unit";
  double ref_lambda = 0.01, ref_tol = 1e-10;
  reference->add_option("--dataset", ref_dataset, "dataset source string");
  reference->add_option("--loss", ref_loss, "logistic | squared");
  reference->add_option("--regularizer", ref_reg, "none | squared_l2 | l1");
  reference->add_option("--lambda", ref_lambda, "regularization weight");
  reference->add_option("--normalize", ref_normalize, "row_l2_unit | minmax | none");
  reference->add_option("--tol", ref_tol, "prox-gradient-mapping tolerance");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    auto push = [&](const std::string& key, const std::string& value) {
      run_opts.overrides.emplace_back(key, value);
    };
    if (!algo.empty()) push("algorithm", algo);
    if (!epsilon_list.empty()) push("epsilon", epsilon_list);
    if (delta) push("delta", std::to_string(*delta));
    if (!calibration.empty()) push("calibration", calibration);
    if (!dataset.empty()) push("dataset", dataset);
    if (lambda) push("lambda", std::to_string(*lambda));
    if (T) push("T", std::to_string(*T));
    if (m) push("m", std::to_string(*m));
    if (eta) push("eta", std::to_string(*eta));
    if (reps) push("reps", std::to_string(*reps));
    if (seed) push("seed", std::to_string(*seed));
    if (!out_path.empty()) push("out", out_path);
    return cmd_run(run_opts);
  }

  if (calibrate->parsed()) {
    try {
      const dperm::PrivacyBudget budget(cal_eps, cal_delta);
      if (cal_algo == "gaussian") {
        std::cout << "sigma=" << dperm::gaussian_mechanism_sigma(sensitivity, budget) << '\n';
        return kExitOk;
      }
      dperm::NoisePlan plan;
      if (cal_algo == "svrg") {
        plan = cal_mode == "advanced"
                   ? dperm::calibrate_advanced(cal_g, cal_T * cal_m, cal_n, budget, cal_c2)
                   : dperm::calibrate_svrg(cal_g, cal_T, cal_m, cal_n, budget, cal_c, cal_c1);
      } else if (cal_algo == "svrgpp") {
        plan = dperm::calibrate_svrg_pp(cal_g, cal_T, cal_m, cal_n, budget, cal_c, cal_c1);
      } else if (cal_algo == "gd" || cal_algo == "accmd") {
        plan = dperm::calibrate_full_gradient(cal_g, cal_T, cal_n, budget, cal_c);
      } else {
        std::cerr << "unknown algorithm '" << cal_algo << "'\n";
        return kExitInvalidSpec;
      }
      std::cout << "sigma=" << plan.sigma << " sigma_sq=" << plan.sigma_sq()
                << " mode=" << dperm::to_string(plan.mode) << " constant=" << plan.constant
                << " queries=" << plan.total_queries << " q=" << plan.sampling_ratio
                << " valid=" << (plan.valid ? "yes" : "no") << '\n';
      if (!plan.valid) std::cout << "note: " << plan.diagnostic << '\n';
      return kExitOk;
    } catch (const std::exception& e) {
      std::cerr << "invalid arguments: " << e.what() << '\n';
      return kExitInvalidSpec;
    }
  }

  if (reference->parsed()) {
    try {
      dperm::apply_spec_key(ref_spec, "dataset", ref_dataset);
      dperm::apply_spec_key(ref_spec, "loss", ref_loss);
      dperm::apply_spec_key(ref_spec, "regularizer", ref_reg);
      dperm::apply_spec_key(ref_spec, "lambda", std::to_string(ref_lambda));
      dperm::apply_spec_key(ref_spec, "normalize", ref_normalize);
    } catch (const std::exception& e) {
      std::cerr << "invalid arguments: " << e.what() << '\n';
      return kExitInvalidSpec;
    }
    try {
      const dperm::ErmObjective obj =
          build_objective(ref_spec, dperm::load_dataset(ref_spec.source));
      const dperm::Reference ref = dperm::reference_minimizer(obj, ref_tol);
      std::cout << "f_star=" << ref.value << " residual=" << ref.residual
                << " iterations=" << ref.iterations
                << " converged=" << (ref.converged ? "yes" : "no") << '\n';
      return ref.converged ? kExitOk : kExitRuntime;
    } catch (const std::exception& e) {
      std::cerr << "runtime failure: " << e.what() << '\n';
      return kExitRuntime;
    }
  }

  return kExitOk;
}
