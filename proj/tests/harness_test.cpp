#include "dperm/harness.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dperm {
namespace {

TEST(DatasetSourceParse, Grammar) {
  const DatasetSource synth = DatasetSource::parse("synth-logistic:n=500,p=8,seed=3");
  EXPECT_EQ(synth.kind, DatasetSource::Kind::synthetic_logistic);
  EXPECT_EQ(synth.n, 500);
  EXPECT_EQ(synth.p, 8);
  EXPECT_EQ(synth.seed, 3u);

  const DatasetSource quad = DatasetSource::parse("synth-quadratic:n=100,p=4,mu=0.2,L=2,seed=1");
  EXPECT_EQ(quad.kind, DatasetSource::Kind::synthetic_quadratic);
  EXPECT_DOUBLE_EQ(quad.mu, 0.2);
  EXPECT_DOUBLE_EQ(quad.smooth_l, 2.0);

  EXPECT_EQ(DatasetSource::parse("libsvm:/data/covtype.libsvm").kind,
            DatasetSource::Kind::libsvm_file);
  EXPECT_EQ(DatasetSource::parse("table.csv").kind, DatasetSource::Kind::csv_file);
  EXPECT_EQ(DatasetSource::parse("data.libsvm").kind, DatasetSource::Kind::libsvm_file);
  const DatasetSource csv = DatasetSource::parse("csv:table.csv,label=0");
  EXPECT_EQ(csv.label_column, 0);

  EXPECT_THROW(DatasetSource::parse("synth-logistic:bogus=1"), std::invalid_argument);
  EXPECT_THROW(DatasetSource::parse(""), std::invalid_argument);
}

TEST(SpecParsing, FlatKeyValueDocument) {
  const std::string text =
      "# experiment\n"
      "algorithm = svrgpp\n"
      "dataset = synth-logistic:n=400,p=6,seed=9\n"
      "loss = logistic\n"
      "regularizer = none\n"
      "epsilon = 0.2, 0.5, 1\n"
      "delta = 0.001\n"
      "calibration = moments\n"
      "T = 4\n"
      "m = 8\n"
      "eta = 0.3\n"
      "reps = 2\n"
      "seed = 11\n";
  const ExperimentSpec spec = parse_spec_text(text);
  EXPECT_EQ(spec.algorithm, Algorithm::svrg_pp);
  EXPECT_EQ(spec.source.n, 400);
  EXPECT_EQ(spec.reg_kind, RegKind::none);
  ASSERT_EQ(spec.epsilons.size(), 3u);
  EXPECT_DOUBLE_EQ(spec.epsilons[1], 0.5);
  EXPECT_DOUBLE_EQ(spec.delta, 0.001);
  EXPECT_EQ(spec.calibration, CalibrationMode::moments);
  EXPECT_EQ(spec.outer_epochs, 4);
  EXPECT_EQ(spec.repetitions, 2);
  EXPECT_EQ(spec.base_seed, 11u);

  EXPECT_THROW(parse_spec_text("nonsense_key = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_spec_text("eta ?= 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_spec_text("eta = notanumber\n"), std::invalid_argument);
}

TEST(SpecValidation, RejectsContradictions) {
  ExperimentSpec spec;
  spec.algorithm = Algorithm::gd;
  spec.reg_kind = RegKind::squared_l2;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.reg_kind = RegKind::none;
  spec.validate();

  spec.repetitions = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.repetitions = 1;
  spec.epsilons = {1.0, -0.5};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.epsilons = {1.0};
  spec.delta = 1.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

ExperimentSpec small_gd_spec() {
  ExperimentSpec spec;
  spec.algorithm = Algorithm::gd;
  spec.source = DatasetSource::parse("synth-quadratic:n=50,p=4,mu=0.2,L=1,seed=5");
  spec.normalization = Normalization::none;
  spec.loss = LossKind::squared;
  spec.reg_kind = RegKind::none;
  spec.epsilons = {1.0};
  spec.delta = 1e-5;
  spec.calibration = CalibrationMode::off;
  spec.outer_epochs = 12;
  spec.repetitions = 2;
  spec.base_seed = 3;
  return spec;
}

TEST(RunExperiment, NoiselessGdRepetitionsIdentical) {
  const ResultRecord record = run_experiment(small_gd_spec());
  ASSERT_FALSE(record.aborted) << record.error;
  ASSERT_EQ(record.runs.size(), 2u);
  const RunTrace& a = record.runs[0].trace;
  const RunTrace& b = record.runs[1].trace;
  ASSERT_EQ(a.epochs.size(), b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    EXPECT_EQ(a.epochs[i].objective, b.epochs[i].objective);
    EXPECT_EQ(a.epochs[i].grad_norm_sq, b.epochs[i].grad_norm_sq);
  }
  EXPECT_NE(record.runs[0].seed, record.runs[1].seed);
}

nlohmann::json strip_wall_times(nlohmann::json j) {
  for (auto& run : j.at("runs")) {
    for (auto& epoch : run.at("epochs")) epoch["wall_ms"] = 0.0;
  }
  for (auto& agg : j.at("aggregates")) agg["median_wall_ms"] = 0.0;
  return j;
}

TEST(RunExperiment, DeterministicModuloTimings) {
  ExperimentSpec spec = small_gd_spec();
  spec.calibration = CalibrationMode::moments;  // exercise the noisy path too
  const nlohmann::json a = strip_wall_times(to_json(run_experiment(spec)));
  const nlohmann::json b = strip_wall_times(to_json(run_experiment(spec)));
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(RunExperiment, EpsilonListYieldsOneAggregatePerBudget) {
  ExperimentSpec spec = small_gd_spec();
  spec.epsilons = {0.2, 0.5, 1.0};
  spec.calibration = CalibrationMode::moments;
  const ResultRecord record = run_experiment(spec);
  ASSERT_FALSE(record.aborted) << record.error;
  ASSERT_EQ(record.aggregates.size(), 3u);
  EXPECT_DOUBLE_EQ(record.aggregates[0].epsilon, 0.2);
  EXPECT_DOUBLE_EQ(record.aggregates[2].epsilon, 1.0);
  EXPECT_EQ(record.runs.size(), 6u);
}

TEST(RunExperiment, AutoCalibrationSwitchRecorded) {
  ExperimentSpec spec;
  spec.algorithm = Algorithm::svrg;
  spec.source = DatasetSource::parse("synth-logistic:n=200,p=4,seed=7");
  spec.loss = LossKind::logistic;
  spec.reg_kind = RegKind::squared_l2;
  spec.lambda = 0.05;
  spec.epsilons = {1.0};  // far outside c1 T m / n^2
  spec.delta = 1e-5;
  spec.outer_epochs = 3;
  spec.inner_steps = 16;
  spec.step_size = 0.1;
  spec.repetitions = 1;
  spec.calibration = CalibrationMode::auto_switch;
  const ResultRecord record = run_experiment(spec);
  ASSERT_FALSE(record.aborted) << record.error;
  EXPECT_TRUE(record.runs[0].trace.calibration_switched);
  EXPECT_EQ(record.runs[0].trace.noise_mode, NoiseMode::advanced);

  spec.calibration = CalibrationMode::moments;
  const ResultRecord forced = run_experiment(spec);
  EXPECT_FALSE(forced.runs[0].trace.calibration_switched);
  EXPECT_EQ(forced.runs[0].trace.noise_mode, NoiseMode::moments);
  EXPECT_GT(record.runs[0].trace.sigma, forced.runs[0].trace.sigma);
}

TEST(RunExperiment, InfeasibleScheduleAbortsWithPartialRecord) {
  ExperimentSpec spec;
  spec.algorithm = Algorithm::svrg;
  spec.source = DatasetSource::parse("synth-logistic:n=100,p=3,seed=2");
  spec.reg_kind = RegKind::none;  // mu = 0: schedule recommendation must fail
  spec.epsilons = {1.0};
  spec.repetitions = 1;
  const ResultRecord record = run_experiment(spec);
  EXPECT_TRUE(record.aborted);
  EXPECT_FALSE(record.error.empty());
  EXPECT_TRUE(record.runs.empty());
}

TEST(Results, JsonRoundTripReproducesAggregates) {
  ExperimentSpec spec = small_gd_spec();
  spec.epsilons = {0.5, 1.0};
  spec.calibration = CalibrationMode::moments;
  spec.repetitions = 3;
  const ResultRecord record = run_experiment(spec);

  const std::string path = ::testing::TempDir() + "dperm_roundtrip.json";
  write_json(record, path);
  const ResultRecord loaded = load_result_record(path);
  std::remove(path.c_str());

  ASSERT_EQ(loaded.runs.size(), record.runs.size());
  ASSERT_EQ(loaded.aggregates.size(), record.aggregates.size());
  for (std::size_t i = 0; i < record.aggregates.size(); ++i) {
    EXPECT_EQ(loaded.aggregates[i].median_final_excess_risk,
              record.aggregates[i].median_final_excess_risk);
    EXPECT_EQ(loaded.aggregates[i].q1_final_excess_risk,
              record.aggregates[i].q1_final_excess_risk);
    EXPECT_EQ(loaded.aggregates[i].q3_final_excess_risk,
              record.aggregates[i].q3_final_excess_risk);
  }

  // Aggregates recomputed from the loaded per-repetition rows agree exactly.
  for (const auto& agg : loaded.aggregates) {
    std::vector<double> risks;
    for (const auto& run : loaded.runs) {
      if (run.epsilon == agg.epsilon) risks.push_back(run.final_excess_risk);
    }
    std::sort(risks.begin(), risks.end());
    EXPECT_EQ(detail::quantile_sorted(risks, 0.5), agg.median_final_excess_risk);
    EXPECT_EQ(detail::quantile_sorted(risks, 0.25), agg.q1_final_excess_risk);
    EXPECT_EQ(detail::quantile_sorted(risks, 0.75), agg.q3_final_excess_risk);
  }
}

TEST(Results, CsvSchemaAndMonotoneEpochs) {
  ExperimentSpec spec = small_gd_spec();
  const ResultRecord record = run_experiment(spec);
  const std::string path = ::testing::TempDir() + "dperm_rows.csv";
  write_csv(record, path, "gd");

  std::ifstream in(path);
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  EXPECT_EQ(line,
            "algorithm,epsilon,delta,repetition,epoch,excess_risk,grad_norm_sq,cum_sample_grads,"
            "wall_ms");
  std::int64_t previous_epoch = -1;
  std::string previous_rep;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 9u);
    if (cells[3] != previous_rep) {
      previous_rep = cells[3];
      previous_epoch = -1;
    }
    const std::int64_t epoch = std::stoll(cells[4]);
    EXPECT_GT(epoch, previous_epoch);
    previous_epoch = epoch;
  }
  EXPECT_EQ(rows, 2 * 13);  // 2 repetitions x (initial point + 12 iterations)
  std::remove(path.c_str());
}

TEST(RunExperiment, MedianRiskDecreasesWithEpsilon) {
  ExperimentSpec spec;
  spec.algorithm = Algorithm::svrg;
  spec.source = DatasetSource::parse("synth-logistic:n=500,p=5,seed=17");
  spec.loss = LossKind::logistic;
  spec.reg_kind = RegKind::squared_l2;
  spec.lambda = 0.01;
  spec.epsilons = {0.2, 0.5, 1.0};
  spec.delta = 0.001;
  spec.calibration = CalibrationMode::moments;
  spec.outer_epochs = 4;
  spec.inner_steps = 400;
  spec.step_size = 0.1;
  spec.repetitions = 30;
  spec.base_seed = 71;
  const ResultRecord record = run_experiment(spec);
  ASSERT_FALSE(record.aborted) << record.error;
  ASSERT_EQ(record.aggregates.size(), 3u);
  EXPECT_GT(record.aggregates[0].median_final_excess_risk,
            record.aggregates[1].median_final_excess_risk);
  EXPECT_GT(record.aggregates[1].median_final_excess_risk,
            record.aggregates[2].median_final_excess_risk);
}

TEST(Results, SpecDigestStableAndSensitive) {
  ExperimentSpec spec = small_gd_spec();
  const ResultRecord a = run_experiment(spec);
  const ResultRecord b = run_experiment(spec);
  EXPECT_EQ(a.spec_digest, b.spec_digest);
  spec.base_seed += 1;
  const ResultRecord c = run_experiment(spec);
  EXPECT_NE(a.spec_digest, c.spec_digest);
}

}  // namespace
}  // namespace dperm
