#include "horserule/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "horserule/error.hpp"

namespace horserule {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ImportanceSummary summarize(const Eigen::Ref<const Eigen::VectorXd>& draws) {
  std::vector<double> v(draws.data(), draws.data() + draws.size());
  ImportanceSummary s;
  s.mean = draws.mean();
  s.q05 = quantile(v, 0.05);
  s.median = quantile(v, 0.5);
  s.q95 = quantile(std::move(v), 0.95);
  return s;
}

void normalize_rows(Eigen::MatrixXd& m) {
  for (Eigen::Index d = 0; d < m.rows(); ++d) {
    const double top = m.row(d).maxCoeff();
    if (top > 0.0) m.row(d) /= top;
  }
}

Eigen::MatrixXd raw_importance(const FittedModel& model) {
  if (model.draws.count() == 0) throw DataError("model has no retained draws");
  Eigen::MatrixXd imp = model.original_scale_beta_draws().cwiseAbs();
  for (std::size_t j = 0; j < model.columns.size(); ++j) imp.col(static_cast<Eigen::Index>(j)) *= model.columns[j].sd;
  return imp;
}

}  // namespace

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Prediction predict(const FittedModel& model, const Eigen::MatrixXd& X, const PredictOptions& options) {
  if (options.coverage && !(*options.coverage > 0.0 && *options.coverage < 1.0)) {
    throw UsageError("interval coverage must lie in (0, 1)");
  }
  const Eigen::MatrixXd Z = model.design_rows(X);
  Eigen::MatrixXd f = Z * model.draws.beta.transpose();  // rows x draws, standardized scale
  if (options.with_noise) {
    Rng rng(options.noise_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index d = 0; d < f.cols(); ++d) {
      const double sd = std::sqrt(model.draws.sigma2(d));
      for (Eigen::Index i = 0; i < f.rows(); ++i) f(i, d) += sd * normal(rng);
    }
  }
  f = (f.array() * model.scaling.y_sd + model.scaling.y_mean).matrix();
  if (model.scaling.y_transform == YTransform::log) f = f.array().exp().matrix();

  Prediction out;
  out.mean = f.rowwise().mean();
  if (options.coverage) {
    const double tail = 0.5 * (1.0 - *options.coverage);
    out.lower.resize(f.rows());
    out.upper.resize(f.rows());
    std::vector<double> row(static_cast<std::size_t>(f.cols()));
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      for (Eigen::Index d = 0; d < f.cols(); ++d) row[static_cast<std::size_t>(d)] = f(i, d);
      out.lower(i) = quantile(row, tail);
      out.upper(i) = quantile(row, 1.0 - tail);
    }
  }
  return out;
}

Importance rule_importance(const FittedModel& model) {
  Importance imp;
  imp.per_draw = raw_importance(model);
  normalize_rows(imp.per_draw);
  imp.beta_mean = model.original_scale_beta();
  for (std::size_t j = 0; j < model.columns.size(); ++j) {
    imp.summary.push_back(summarize(imp.per_draw.col(static_cast<Eigen::Index>(j))));
    imp.labels.push_back(model.column_label(j));
  }
  return imp;
}

Importance variable_importance(const FittedModel& model) {
  const Eigen::MatrixXd col_imp = raw_importance(model);
  const std::size_t n_cov = model.schema.columns.size();
  Importance imp;
  imp.per_draw = Eigen::MatrixXd::Zero(col_imp.rows(), static_cast<Eigen::Index>(n_cov));
  for (std::size_t j = 0; j < model.columns.size(); ++j) {
    const ColumnMeta& c = model.columns[j];
    const auto jj = static_cast<Eigen::Index>(j);
    if (c.kind == TermKind::linear) {
      imp.per_draw.col(static_cast<Eigen::Index>(model.schema.feature_source.at(c.ref))) += col_imp.col(jj);
      continue;
    }
    std::vector<std::size_t> covariates;
    for (auto col : model.rules.at(c.ref).columns()) covariates.push_back(model.schema.feature_source.at(col));
    std::sort(covariates.begin(), covariates.end());
    covariates.erase(std::unique(covariates.begin(), covariates.end()), covariates.end());
    const double share = 1.0 / static_cast<double>(covariates.size());
    for (auto s : covariates) imp.per_draw.col(static_cast<Eigen::Index>(s)) += share * col_imp.col(jj);
  }
  normalize_rows(imp.per_draw);
  for (std::size_t s = 0; s < n_cov; ++s) {
    imp.summary.push_back(summarize(imp.per_draw.col(static_cast<Eigen::Index>(s))));
    imp.labels.push_back(model.schema.columns[s].name);
  }
  return imp;
}

std::vector<std::size_t> rank_by_mean(const Importance& imp) {
  std::vector<std::size_t> order(imp.summary.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return imp.summary[a].mean > imp.summary[b].mean; });
  return order;
}

RuleHeat ruleheat_export(const FittedModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         std::size_t top_k) {
  const auto rule_cols = model.rule_columns();
  if (top_k == 0) throw UsageError("--top must be >= 1");
  if (top_k > rule_cols.size()) {
    throw UsageError("--top " + std::to_string(top_k) + " exceeds the " + std::to_string(rule_cols.size()) +
                     " rule columns in the model");
  }
  if (X.rows() != y.size()) throw DataError("RuleHeat needs one outcome per row");
  const Importance imp = rule_importance(model);
  std::vector<std::size_t> order = rule_cols;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return imp.summary[a].mean > imp.summary[b].mean; });
  order.resize(top_k);

  RuleHeat heat;
  heat.columns = order;
  heat.outcome = y;
  heat.activation.resize(X.rows(), static_cast<Eigen::Index>(top_k));
  for (std::size_t k = 0; k < top_k; ++k) {
    const std::size_t j = order[k];
    heat.labels.push_back(model.column_label(j));
    heat.signs.push_back(imp.beta_mean(static_cast<Eigen::Index>(j)) >= 0.0 ? 1 : -1);
    heat.activation.col(static_cast<Eigen::Index>(k)) = evaluate_rule(model.rules.at(model.columns[j].ref), X);
  }
  return heat;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_importance_csv(std::ostream& out, const Importance& imp, std::size_t top_k) {
  const auto order = rank_by_mean(imp);
  const std::size_t k = top_k == 0 ? order.size() : std::min(top_k, order.size());
  out << "rule_text,I_5,I_mean,I_95,beta_mean\n";
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t j = order[r];
    const auto& s = imp.summary[j];
    out << csv_quote(imp.labels[j]) << ',' << fmt(s.q05) << ',' << fmt(s.mean) << ',' << fmt(s.q95) << ','
        << fmt(imp.beta_mean(static_cast<Eigen::Index>(j))) << '\n';
  }
}

void write_variable_importance_csv(std::ostream& out, const Importance& imp) {
  out << "variable,J_5,J_median,J_mean,J_95\n";
  for (auto j : rank_by_mean(imp)) {
    const auto& s = imp.summary[j];
    out << csv_quote(imp.labels[j]) << ',' << fmt(s.q05) << ',' << fmt(s.median) << ',' << fmt(s.mean) << ','
        << fmt(s.q95) << '\n';
  }
}

void write_ruleheat_csv(std::ostream& out, const RuleHeat& heat) {
  const std::size_t k = heat.columns.size();
  for (std::size_t c = 0; c < k; ++c) out << "rule_" << (c + 1) << ',';
  out << "outcome\n";
  for (std::size_t c = 0; c < k; ++c) out << (heat.signs[c] > 0 ? "+1" : "-1") << ',';
  out << "sign\n";
  for (Eigen::Index i = 0; i < heat.activation.rows(); ++i) {
    for (std::size_t c = 0; c < k; ++c) out << static_cast<int>(heat.activation(i, static_cast<Eigen::Index>(c))) << ',';
    out << fmt(heat.outcome(i)) << '\n';
  }
}

void write_ruleheat_legend(std::ostream& out, const RuleHeat& heat) {
  out << "rule_id,column,sign,rule_text\n";
  for (std::size_t c = 0; c < heat.columns.size(); ++c) {
    out << "rule_" << (c + 1) << ',' << heat.columns[c] << ',' << (heat.signs[c] > 0 ? "+1" : "-1") << ','
        << csv_quote(heat.labels[c]) << '\n';
  }
}

}  // namespace horserule
