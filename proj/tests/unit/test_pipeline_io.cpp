#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "horserule/error.hpp"
#include "horserule/experiments.hpp"
#include "horserule/inference.hpp"
#include "horserule/model_io.hpp"
#include "horserule/pipeline.hpp"

using namespace horserule;

namespace {

Dataset small_boston() {
  return load_csv(std::string(HORSERULE_TEST_DATA) + "/boston.csv", "medv");
}

HorseRuleConfig quick_config(std::uint64_t seed) {
  HorseRuleConfig cfg;
  cfg.trees.ntree = 30;
  cfg.sampler.niter = 80;
  cfg.sampler.burnin = 20;
  cfg.seed = seed;
  return cfg;
}

std::string serialize(const FittedModel& m) {
  std::ostringstream out;
  write_model(out, m);
  return out.str();
}

}  // namespace

TEST_CASE("fit pipeline invariants") {
  const Dataset data = small_boston();
  const FitResult r = fit_horserule(data, quick_config(1));
  const FittedModel& m = r.model;
  CHECK(m.n_train == 506);
  CHECK(m.config.mu == 1.0);
  CHECK(m.config.eta == 2.0);
  CHECK(m.columns.size() == static_cast<std::size_t>(r.design.Z.cols()));
  CHECK(m.draws.beta.cols() == r.design.Z.cols());
  CHECK(m.draws.count() == 60);
  CHECK(r.design.linear_count() == 13);
  for (const auto& c : m.columns) {
    if (c.kind == TermKind::rule) {
      REQUIRE(c.ref < m.rules.size());
      CHECK(evaluate_rule(m.rules[c.ref], data.X).mean() == m.rules[c.ref].support);
    }
  }
  for (Eigen::Index j = 0; j < r.design.Z.cols(); ++j) {
    CHECK(std::abs(r.design.Z.col(j).mean()) < 1e-10);
    CHECK(std::abs(std::sqrt(r.design.Z.col(j).squaredNorm() / 505.0) - 1.0) < 1e-10);
  }
  // candidate count: one rule per split, i.e. leaves - 1 per tree, before dedup
  CHECK(m.n_candidate_rules >= m.rules.size());
}

TEST_CASE("mix and linear settings pass through") {
  const Dataset data = small_boston();
  HorseRuleConfig cfg = quick_config(2);
  cfg.trees.mix = 0.0;
  for (const auto& r : fit_horserule(data, cfg).model.rules) CHECK(r.source == TreeSource::boosting);
  cfg.trees.mix = 1.0;
  for (const auto& r : fit_horserule(data, cfg).model.rules) CHECK(r.source == TreeSource::random_forest);
  cfg.linear = LinearTerms::parse("none");
  CHECK(fit_horserule(data, cfg).design.linear_count() == 0);
  cfg.linear = LinearTerms::parse("rm,lstat");
  CHECK(fit_horserule(data, cfg).design.linear_count() == 2);
  cfg.linear = LinearTerms::parse("nope");
  CHECK_THROWS_AS(fit_horserule(data, cfg), UsageError);
}

TEST_CASE("model file round trip is exact and deterministic") {
  const Dataset data = small_boston();
  const FittedModel a = fit_horserule(data, quick_config(7)).model;
  const FittedModel b = fit_horserule(data, quick_config(7)).model;
  const std::string text = serialize(a);
  CHECK(text == serialize(b));
  CHECK(text.rfind("horserule-model 1\n", 0) == 0);

  std::istringstream in(text);
  const FittedModel back = read_model(in);
  CHECK(serialize(back) == text);
  const Prediction p1 = predict(a, data.X, PredictOptions{0.9, false, 0});
  const Prediction p2 = predict(back, data.X, PredictOptions{0.9, false, 0});
  CHECK(p1.mean == p2.mean);
  CHECK(p1.lower == p2.lower);
  CHECK(p1.upper == p2.upper);
  for (std::size_t j = 0; j < a.columns.size(); ++j) CHECK(a.column_label(j) == back.column_label(j));

  const FittedModel c = fit_horserule(data, quick_config(8)).model;
  CHECK(serialize(c) != text);
}

TEST_CASE("model file errors") {
  std::istringstream wrong_version("horserule-model 2\n{}\n");
  CHECK_THROWS_WITH_AS(read_model(wrong_version), doctest::Contains("version"), DataError);
  std::istringstream garbage("hello world\n");
  CHECK_THROWS_AS(read_model(garbage), DataError);
  std::istringstream bad_json("horserule-model 1\n{not json\n");
  CHECK_THROWS_AS(read_model(bad_json), DataError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.hr"), DataError);

  const FittedModel m = fit_horserule(small_boston(), quick_config(3)).model;
  std::string text = serialize(m);
  text.resize(text.size() / 2);
  std::istringstream truncated(text);
  CHECK_THROWS_AS(read_model(truncated), DataError);
}

TEST_CASE("predict rejects a mismatched schema") {
  const FittedModel m = fit_horserule(small_boston(), quick_config(4)).model;
  CHECK_THROWS_AS(predict(m, Eigen::MatrixXd::Zero(3, 5)), DataError);
}

TEST_CASE("log response predictions stay positive") {
  HorseRuleConfig cfg = quick_config(5);
  cfg.y_transform = YTransform::log;
  const Dataset data = small_boston();
  const FittedModel m = fit_horserule(data, cfg).model;
  CHECK((predict(m, data.X).mean.array() > 0.0).all());
}

TEST_CASE("cross-validation bookkeeping") {
  const Dataset data = small_boston();
  CvOptions opts;
  opts.folds = 3;
  opts.seed = 1;
  opts.ols_baseline = true;
  const CvReport one = cross_validate(data, {{"default", quick_config(0)}}, opts);
  REQUIRE(one.configs.size() == 1);
  CHECK(one.configs[0].fold_rmse.size() == 3);
  for (double r : one.configs[0].fold_rrmse) CHECK(r == 1.0);
  CHECK(one.ols_fold_rmse.size() == 3);
  CHECK(one.ols_mean_rmse > 3.0);
  CHECK(one.ols_mean_rmse < 7.0);

  HorseRuleConfig flat = quick_config(0);
  flat.mu = 0.0;
  flat.eta = 0.0;
  const CvReport two = cross_validate(data, {{"mu=0,eta=0", flat}, {"default", quick_config(0)}}, opts);
  REQUIRE(two.configs.size() == 2);
  CHECK(two.configs[1].fold_rmse == one.configs[0].fold_rmse);
  for (std::size_t f = 0; f < 3; ++f) {
    CHECK(std::min(two.configs[0].fold_rrmse[f], two.configs[1].fold_rrmse[f]) == 1.0);
  }
  std::ostringstream out;
  write_cv_summary_csv(out, two);
  CHECK(out.str().find("label,mean_rmse,mean_rrmse\n\"mu=0,eta=0\",") == 0);
  CvOptions bad = opts;
  bad.folds = 1;
  CHECK_THROWS_AS(cross_validate(data, {{"d", quick_config(0)}}, bad), UsageError);
}

TEST_CASE("ordinary least squares baseline recovers an exact linear fit") {
  Eigen::MatrixXd X(6, 2);
  X << 1, 0, 2, 1, 3, 5, 4, 2, 5, 7, 6, 1;
  const Eigen::VectorXd y = 2.0 + 3.0 * X.col(0).array() - X.col(1).array();
  const Eigen::VectorXd p = ols_predict(X, y, X);
  CHECK((p - y).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("noiseless linear simulation with linear terms only") {
  SimulationOptions opts;
  opts.n = 300;
  opts.p = 10;
  opts.n_test = 200;
  opts.reps = 2;
  opts.noise_sd = 0.0;
  opts.config.trees.ntree = 0;
  opts.config.sampler.niter = 300;
  opts.config.sampler.burnin = 100;
  const SimulationReport r = simulate(opts);
  CHECK(r.reps.size() == 2);
  CHECK(r.mean_rmse < 0.05);
  CHECK(r.mean_delta_true < 0.05);
  opts.scenario = "friedman";
  CHECK_THROWS_AS(simulate(opts), UsageError);
}
