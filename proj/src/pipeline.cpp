#include "horserule/pipeline.hpp"

#include "horserule/error.hpp"

namespace horserule {

namespace {

enum Stream : std::uint64_t { kTrees = 1, kRules = 2, kSampler = 3 };

}  // namespace

FitResult fit_horserule(const Dataset& data, const HorseRuleConfig& config) {
  config.validate();
  if (data.y.size() != data.X.rows()) throw DataError("training data has no response");
  const Standardized st = standardize(data.X, data.y, config.y_transform);

  FitResult result;
  FittedModel& model = result.model;
  model.schema = data.schema;
  model.config = config;
  model.config.trees.seed = mix_seed(config.seed, kTrees);
  model.config.sampler.seed = mix_seed(config.seed, kSampler);
  model.scaling = st.scaling;
  model.n_train = data.rows();

  Rng tree_rng(model.config.trees.seed);
  const std::vector<Tree> trees = generate_ensemble(data.X, st.y, model.config.trees, tree_rng);

  Rng rule_rng(mix_seed(config.seed, kRules));
  std::vector<Rule> candidates;
  for (const auto& tree : trees) {
    auto rules = extract_rules(tree, rule_rng);
    candidates.insert(candidates.end(), std::make_move_iterator(rules.begin()), std::make_move_iterator(rules.end()));
  }
  model.n_candidate_rules = candidates.size();
  const std::vector<Rule> rules = dedup_rules(candidates, data.X);

  const auto linear_cols = config.linear.resolve(data.schema, st.scaling.constant);
  result.design = build_design_matrix(rules, data.X, linear_cols);
  if (result.design.columns.empty()) throw DataError("model has no columns: no linear terms and no rules");

  const PriorSpec prior =
      assemble_prior(result.design, config.mu, config.eta, config.linear_A, config.unshrunk_linear);
  model.draws = gibbs_run(result.design, st.y, prior, model.config.sampler);
  model.rules = result.design.rules;
  model.columns = result.design.columns;
  result.ys = st.y;
  return result;
}

Schema numeric_schema(std::size_t p, const std::string& prefix) {
  Schema schema;
  schema.target_name = "y";
  for (std::size_t j = 0; j < p; ++j) {
    SourceColumn col;
    col.name = prefix + std::to_string(j + 1);
    col.first_encoded = j;
    schema.columns.push_back(col);
    schema.feature_names.push_back(col.name);
    schema.feature_source.push_back(j);
  }
  return schema;
}

FitResult fit_horserule(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const HorseRuleConfig& config) {
  Dataset data;
  data.schema = numeric_schema(static_cast<std::size_t>(X.cols()));
  data.X = X;
  data.y = y;
  return fit_horserule(data, config);
}

}  // namespace horserule
