#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "horserule/model.hpp"

namespace horserule {

/// Sparse re-expression of the posterior mean fit:
///   min_g (1 / 2N) ||Z b - Z g||^2 + lambda * sum_j |g_j|
/// where b is the posterior mean on the standardized scale.
struct DssSummary {
  double lambda_dss = 0.0;
  Eigen::VectorXd coefficients;
  std::size_t nonzero_count = 0;
  double fit_gap = 0.0;  // ||Z g - Z b||^2 / ||Z b||^2
  std::size_t sweeps = 0;
};

struct DssOptions {
  double tolerance = 1e-8;  // max absolute coefficient change over a full sweep
  std::size_t max_sweeps = 100000;
};

/// Cyclic coordinate descent with active-set passes. `start` defaults to the
/// posterior mean itself. Throws NumericError after max_sweeps.
DssSummary dss_summarize(const Eigen::MatrixXd& Z, const Eigen::VectorXd& beta_mean, double lambda_dss,
                         const DssOptions& options = {},
                         const std::optional<Eigen::VectorXd>& start = std::nullopt);

DssSummary dss_summarize(const FittedModel& model, const DesignMatrix& design, double lambda_dss,
                         const DssOptions& options = {});

/// Smallest penalty giving an all-zero solution: max_j |z_j' Z b| / N.
double dss_lambda_max(const Eigen::MatrixXd& Z, const Eigen::VectorXd& beta_mean);

/// `count` log-spaced penalties from lambda_max down to min_ratio * lambda_max,
/// each solved from the previous solution.
std::vector<DssSummary> dss_path(const Eigen::MatrixXd& Z, const Eigen::VectorXd& beta_mean, std::size_t count = 50,
                                 double min_ratio = 1e-3, const DssOptions& options = {});

/// Largest violation of the lasso optimality conditions at g.
double dss_kkt_violation(const Eigen::MatrixXd& Z, const Eigen::VectorXd& beta_mean, const Eigen::VectorXd& g,
                         double lambda_dss);

/// Nonzero coefficients: rule_text,I_mean,beta_mean, most important first.
void write_dss_csv(std::ostream& out, const FittedModel& model, const DssSummary& summary);

/// lambda,nonzero,fit_gap for a path.
void write_dss_path_csv(std::ostream& out, const std::vector<DssSummary>& path);

}  // namespace horserule
