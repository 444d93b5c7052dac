#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "horserule/data.hpp"
#include "horserule/rules.hpp"
#include "horserule/sampler.hpp"
#include "horserule/trees.hpp"

namespace horserule {

/// Which covariates enter as linear terms: all, none, or named source columns
/// (a categorical name selects all of its indicator columns).
struct LinearTerms {
  enum class Mode { all, none, list };
  Mode mode = Mode::all;
  std::vector<std::string> names;

  static LinearTerms parse(const std::string& spec);
  std::string to_string() const;
  /// Encoded column indices, skipping columns flagged constant.
  std::vector<std::size_t> resolve(const Schema& schema, const std::vector<bool>& constant) const;
};

struct HorseRuleConfig {
  TreeGenConfig trees;
  double mu = 1.0;
  double eta = 2.0;
  double linear_A = 1.0;
  bool unshrunk_linear = false;
  LinearTerms linear;
  YTransform y_transform = YTransform::none;
  SamplerSettings sampler;
  std::uint64_t seed = 0;  // master seed; tree, rule and sampler streams derive from it

  void validate() const;
};

struct FittedModel {
  Schema schema;
  HorseRuleConfig config;
  ScalingInfo scaling;
  std::vector<Rule> rules;
  std::vector<ColumnMeta> columns;
  PosteriorDraws draws;
  std::size_t n_train = 0;
  std::size_t n_candidate_rules = 0;  // before deduplication

  std::size_t column_count() const { return columns.size(); }
  std::vector<std::size_t> rule_columns() const;

  /// "linear: rm" or the rendered rule text.
  std::string column_label(std::size_t j) const;

  Eigen::MatrixXd design_rows(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd posterior_mean_beta() const;

  /// Coefficient of column j per unit of its unstandardized covariate (or
  /// rule indicator) on the response scale: beta * y_sd / sd_j. For a log
  /// response this is on the log scale.
  Eigen::MatrixXd original_scale_beta_draws() const;
  Eigen::VectorXd original_scale_beta() const;
};

}  // namespace horserule
