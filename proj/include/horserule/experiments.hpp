#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "horserule/data.hpp"
#include "horserule/model.hpp"

namespace horserule {

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Least squares on an intercept plus every non-constant encoded column of
/// the training rows; returns predictions for the test rows.
Eigen::VectorXd ols_predict(const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y_train,
                            const Eigen::MatrixXd& X_test);

struct CvOptions {
  std::size_t folds = 10;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  bool ols_baseline = false;
};

struct NamedConfig {
  std::string label;
  HorseRuleConfig config;
};

struct CvConfigResult {
  std::string label;
  std::vector<double> fold_rmse;   // repeat-major, folds * repeats entries
  std::vector<double> fold_rrmse;  // relative to the best config on the same fold
  double mean_rmse = 0.0;
  double mean_rrmse = 0.0;
};

struct CvReport {
  std::size_t folds = 0;
  std::size_t repeats = 0;
  std::vector<CvConfigResult> configs;
  std::vector<double> ols_fold_rmse;  // empty unless requested
  double ols_mean_rmse = 0.0;
};

/// Every config sees the same folds and the same per-fold fit seed, so
/// differences between configs are not seed noise. The seed stored in each
/// config is ignored.
CvReport cross_validate(const Dataset& data, const std::vector<NamedConfig>& configs, const CvOptions& options);

/// fold-level table: label,repeat,fold,rmse,rrmse
void write_cv_folds_csv(std::ostream& out, const CvReport& report);
/// label,mean_rmse,mean_rrmse
void write_cv_summary_csv(std::ostream& out, const CvReport& report);

struct SimulationOptions {
  std::string scenario = "linear";
  std::size_t n = 1000;
  std::size_t p = 100;
  std::size_t n_test = 1000;
  std::size_t reps = 20;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
  HorseRuleConfig config;  // seed overridden per replicate
};

struct SimulationRep {
  double rmse = 0.0;  // fitted mean vs true mean on fresh test rows
  double delta_true = 0.0;
  double delta_noise = 0.0;
  std::size_t columns = 0;
};

struct SimulationReport {
  std::vector<SimulationRep> reps;
  double mean_rmse = 0.0;
  double mean_delta_true = 0.0;
  double mean_delta_noise = 0.0;
};

/// "linear": X ~ N(0, I_p), y = 5 x1 + 3 x2 + x3 + x4 + x5 + noise_sd * e.
SimulationReport simulate(const SimulationOptions& options);

/// rep,rmse,delta_true,delta_noise,columns then a "mean" row.
void write_simulation_csv(std::ostream& out, const SimulationReport& report);

}  // namespace horserule
