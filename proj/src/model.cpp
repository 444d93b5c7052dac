#include "horserule/model.hpp"

#include <algorithm>
#include <sstream>

#include "horserule/error.hpp"

namespace horserule {

LinearTerms LinearTerms::parse(const std::string& spec) {
  LinearTerms lt;
  if (spec == "all") return lt;
  if (spec == "none") {
    lt.mode = Mode::none;
    return lt;
  }
  lt.mode = Mode::list;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) lt.names.push_back(item);
  }
  if (lt.names.empty()) throw UsageError("--linear expects all, none or a comma-separated column list");
  return lt;
}

std::string LinearTerms::to_string() const {
  if (mode == Mode::all) return "all";
  if (mode == Mode::none) return "none";
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ",") + n;
  return out;
}

std::vector<std::size_t> LinearTerms::resolve(const Schema& schema, const std::vector<bool>& constant) const {
  std::vector<std::size_t> cols;
  if (mode == Mode::none) return cols;
  for (std::size_t s = 0; s < schema.columns.size(); ++s) {
    const auto& col = schema.columns[s];
    if (mode == Mode::list && std::find(names.begin(), names.end(), col.name) == names.end()) continue;
    for (std::size_t k = 0; k < col.width(); ++k) {
      const std::size_t j = col.first_encoded + k;
      if (!constant[j]) cols.push_back(j);
    }
  }
  if (mode == Mode::list) {
    for (const auto& n : names) {
      const bool known = std::any_of(schema.columns.begin(), schema.columns.end(),
                                     [&](const SourceColumn& c) { return c.name == n; });
      if (!known) throw UsageError("--linear names unknown column: " + n);
    }
  }
  return cols;
}

void HorseRuleConfig::validate() const {
  trees.validate();
  sampler.validate();
  if (!(mu >= 0.0)) throw UsageError("--mu must be >= 0");
  if (!(eta >= 0.0)) throw UsageError("--eta must be >= 0");
  if (!(linear_A > 0.0)) throw UsageError("--linear-scale must be > 0");
}

std::vector<std::size_t> FittedModel::rule_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < columns.size(); ++j)
    if (columns[j].kind == TermKind::rule) out.push_back(j);
  return out;
}

std::string FittedModel::column_label(std::size_t j) const {
  const ColumnMeta& c = columns.at(j);
  if (c.kind == TermKind::linear) return "linear: " + schema.feature_names.at(c.ref);
  return render_rule(rules.at(c.ref), schema.feature_names);
}

Eigen::MatrixXd FittedModel::design_rows(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != schema.encoded_width()) {
    throw DataError("input has " + std::to_string(X.cols()) + " encoded columns, model expects " +
                    std::to_string(schema.encoded_width()));
  }
  return horserule::design_rows(columns, rules, X);
}

Eigen::VectorXd FittedModel::posterior_mean_beta() const { return draws.beta.colwise().mean().transpose(); }

Eigen::MatrixXd FittedModel::original_scale_beta_draws() const {
  Eigen::MatrixXd b = draws.beta;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    b.col(static_cast<Eigen::Index>(j)) *= scaling.y_sd / columns[j].sd;
  }
  return b;
}

Eigen::VectorXd FittedModel::original_scale_beta() const {
  return original_scale_beta_draws().colwise().mean().transpose();
}

}  // namespace horserule
