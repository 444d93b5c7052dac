#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "horserule/data.hpp"
#include "horserule/model.hpp"

namespace horserule {

struct FitResult {
  FittedModel model;
  DesignMatrix design;  // training design (standardized)
  Eigen::VectorXd ys;   // standardized training response
};

/// Full estimator: standardize, grow the mixed ensemble, harvest and
/// deduplicate rules, build the design, and run the Gibbs sampler.
FitResult fit_horserule(const Dataset& data, const HorseRuleConfig& config);

/// Same, on a bare matrix with generated names.
FitResult fit_horserule(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const HorseRuleConfig& config);

Schema numeric_schema(std::size_t p, const std::string& prefix = "x");

}  // namespace horserule
