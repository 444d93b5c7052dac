#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "horserule/model.hpp"

namespace horserule {

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;  // empty unless an interval was requested
  Eigen::VectorXd upper;
};

struct PredictOptions {
  std::optional<double> coverage;  // e.g. 0.9 for a 5%-95% band
  bool with_noise = false;         // add N(0, sigma2) per draw to the mean function
  std::uint64_t noise_seed = 0;
};

/// Posterior mean of the regression function on the response scale, and an
/// optional equal-tailed interval over the draws.
Prediction predict(const FittedModel& model, const Eigen::MatrixXd& X, const PredictOptions& options = {});

struct ImportanceSummary {
  double q05 = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double q95 = 0.0;
};

struct Importance {
  Eigen::MatrixXd per_draw;                // draws x items, each row scaled to max 1
  std::vector<ImportanceSummary> summary;  // one per item
  std::vector<std::string> labels;
  Eigen::VectorXd beta_mean;               // original-scale posterior mean (columns only)
};

/// |coef| * sd(column) per draw, normalized so the top column scores 1.
Importance rule_importance(const FittedModel& model);

/// Per covariate: its linear importance plus each containing rule's
/// importance divided by the rule's number of distinct covariates;
/// renormalized per draw.
Importance variable_importance(const FittedModel& model);

/// Indices of `imp` items sorted by decreasing posterior mean importance.
std::vector<std::size_t> rank_by_mean(const Importance& imp);

struct RuleHeat {
  std::vector<std::size_t> columns;  // model column indices, most important first
  std::vector<std::string> labels;
  std::vector<int> signs;            // sign of the posterior mean coefficient
  Eigen::MatrixXd activation;        // N x top_k, 0/1
  Eigen::VectorXd outcome;
};

RuleHeat ruleheat_export(const FittedModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         std::size_t top_k);

/// rule_text,I_5,I_mean,I_95,beta_mean for the top_k columns (0 = all).
void write_importance_csv(std::ostream& out, const Importance& imp, std::size_t top_k);

/// variable,J_5,J_median,J_mean,J_95 for every covariate.
void write_variable_importance_csv(std::ostream& out, const Importance& imp);

/// Header of rule ids plus "outcome", a sign row, then one row per observation.
void write_ruleheat_csv(std::ostream& out, const RuleHeat& heat);

/// Legend mapping rule ids to rule text.
void write_ruleheat_legend(std::ostream& out, const RuleHeat& heat);

std::string csv_quote(const std::string& s);

}  // namespace horserule
