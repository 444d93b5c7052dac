#include "horserule/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "horserule/error.hpp"

namespace horserule {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd json_to_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json config_to_json(const HorseRuleConfig& c) {
  return {{"ntree", c.trees.ntree},
          {"L", c.trees.L},
          {"n_min", c.trees.n_min},
          {"mix", c.trees.mix},
          {"rf_mtry", c.trees.rf_mtry},
          {"gbm_shrinkage", c.trees.gbm_shrinkage},
          {"gbm_subsample", c.trees.gbm_subsample},
          {"tree_seed", c.trees.seed},
          {"mu", c.mu},
          {"eta", c.eta},
          {"linear_A", c.linear_A},
          {"unshrunk_linear", c.unshrunk_linear},
          {"linear", c.linear.to_string()},
          {"ytransform", to_string(c.y_transform)},
          {"niter", c.sampler.niter},
          {"burnin", c.sampler.burnin},
          {"thin", c.sampler.thin},
          {"sampler_seed", c.sampler.seed},
          {"seed", c.seed}};
}

HorseRuleConfig config_from_json(const json& j) {
  HorseRuleConfig c;
  c.trees.ntree = j.at("ntree").get<std::size_t>();
  c.trees.L = j.at("L").get<double>();
  c.trees.n_min = j.at("n_min").get<std::size_t>();
  c.trees.mix = j.at("mix").get<double>();
  c.trees.rf_mtry = j.at("rf_mtry").get<std::size_t>();
  c.trees.gbm_shrinkage = j.at("gbm_shrinkage").get<double>();
  c.trees.gbm_subsample = j.at("gbm_subsample").get<double>();
  c.trees.seed = j.at("tree_seed").get<std::uint64_t>();
  c.mu = j.at("mu").get<double>();
  c.eta = j.at("eta").get<double>();
  c.linear_A = j.at("linear_A").get<double>();
  c.unshrunk_linear = j.at("unshrunk_linear").get<bool>();
  c.linear = LinearTerms::parse(j.at("linear").get<std::string>());
  c.y_transform = parse_ytransform(j.at("ytransform").get<std::string>());
  c.sampler.niter = j.at("niter").get<std::size_t>();
  c.sampler.burnin = j.at("burnin").get<std::size_t>();
  c.sampler.thin = j.at("thin").get<std::size_t>();
  c.sampler.seed = j.at("sampler_seed").get<std::uint64_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json schema_to_json(const Schema& s) {
  json cols = json::array();
  for (const auto& c : s.columns) {
    cols.push_back({{"name", c.name},
                    {"kind", c.kind == ColumnKind::numeric ? "numeric" : "categorical"},
                    {"levels", c.levels},
                    {"first_encoded", c.first_encoded}});
  }
  return {{"target", s.target_name}, {"columns", cols}, {"feature_names", s.feature_names},
          {"feature_source", s.feature_source}};
}

Schema schema_from_json(const json& j) {
  Schema s;
  s.target_name = j.at("target").get<std::string>();
  for (const auto& c : j.at("columns")) {
    SourceColumn col;
    col.name = c.at("name").get<std::string>();
    col.kind = c.at("kind").get<std::string>() == "numeric" ? ColumnKind::numeric : ColumnKind::categorical;
    col.levels = c.at("levels").get<std::vector<std::string>>();
    col.first_encoded = c.at("first_encoded").get<std::size_t>();
    s.columns.push_back(std::move(col));
  }
  s.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  s.feature_source = j.at("feature_source").get<std::vector<std::size_t>>();
  return s;
}

}  // namespace

void write_model(std::ostream& out, const FittedModel& model) {
  json rules = json::array();
  for (const auto& r : model.rules) {
    json conds = json::array();
    for (const auto& c : r.conditions) conds.push_back({c.col, c.op == CmpOp::le ? "<=" : ">", c.threshold});
    rules.push_back({{"conditions", conds},
                     {"length", r.length},
                     {"support", r.support},
                     {"source", to_string(r.source)},
                     {"text", render_rule(r, model.schema.feature_names)}});
  }
  json columns = json::array();
  for (const auto& c : model.columns) {
    columns.push_back({{"kind", c.kind == TermKind::linear ? "linear" : "rule"},
                       {"ref", c.ref},
                       {"mean", c.mean},
                       {"sd", c.sd},
                       {"support", c.support},
                       {"length", c.length}});
  }
  const ScalingInfo& s = model.scaling;
  json header = {{"format_version", kModelFormatVersion},
                 {"seed", model.config.seed},
                 {"config", config_to_json(model.config)},
                 {"schema", schema_to_json(model.schema)},
                 {"scaling",
                  {{"col_means", vec_to_json(s.col_means)},
                   {"col_sds", vec_to_json(s.col_sds)},
                   {"constant", std::vector<bool>(s.constant)},
                   {"y_mean", s.y_mean},
                   {"y_sd", s.y_sd},
                   {"y_transform", to_string(s.y_transform)}}},
                 {"rules", rules},
                 {"columns", columns},
                 {"n_train", model.n_train},
                 {"n_candidate_rules", model.n_candidate_rules},
                 {"draws",
                  {{"niter", model.draws.niter},
                   {"burnin", model.draws.burnin},
                   {"thin", model.draws.thin},
                   {"seed", model.draws.seed}}}};

  out << "horserule-model " << kModelFormatVersion << '\n' << header.dump() << '\n';
  const auto& b = model.draws.beta;
  out << "draws " << b.rows() << ' ' << b.cols() << '\n';
  char buf[40];
  for (Eigen::Index d = 0; d < b.rows(); ++d) {
    std::string line;
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g ", b(d, j));
      line += buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g ", model.draws.sigma2(d));
    line += buf;
    std::snprintf(buf, sizeof buf, "%.17g", model.draws.tau2(d));
    line += buf;
    out << line << '\n';
  }
  out << "end\n";
}

void save_model(const std::string& path, const FittedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  write_model(out, model);
  if (!out) throw DataError("error while writing model file: " + path);
}

FittedModel read_model(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "horserule-model") throw DataError("not a horserule model file");
  if (version != kModelFormatVersion) {
    throw DataError("unsupported model format version " + std::to_string(version) + " (expected " +
                    std::to_string(kModelFormatVersion) + ")");
  }
  std::string line;
  std::getline(in, line);
  if (!std::getline(in, line)) throw DataError("model file truncated: header missing");

  FittedModel model;
  try {
    const json h = json::parse(line);
    model.config = config_from_json(h.at("config"));
    model.schema = schema_from_json(h.at("schema"));
    const json& s = h.at("scaling");
    model.scaling.col_means = json_to_vec(s.at("col_means"));
    model.scaling.col_sds = json_to_vec(s.at("col_sds"));
    model.scaling.constant = s.at("constant").get<std::vector<bool>>();
    model.scaling.y_mean = s.at("y_mean").get<double>();
    model.scaling.y_sd = s.at("y_sd").get<double>();
    model.scaling.y_transform = parse_ytransform(s.at("y_transform").get<std::string>());
    for (const auto& r : h.at("rules")) {
      Rule rule;
      for (const auto& c : r.at("conditions")) {
        rule.conditions.push_back({c.at(0).get<std::size_t>(), c.at(1).get<std::string>() == "<=" ? CmpOp::le : CmpOp::gt,
                                   c.at(2).get<double>()});
      }
      rule.length = r.at("length").get<std::size_t>();
      rule.support = r.at("support").get<double>();
      rule.source = r.at("source").get<std::string>() == "rf" ? TreeSource::random_forest : TreeSource::boosting;
      model.rules.push_back(std::move(rule));
    }
    for (const auto& c : h.at("columns")) {
      ColumnMeta m;
      m.kind = c.at("kind").get<std::string>() == "linear" ? TermKind::linear : TermKind::rule;
      m.ref = c.at("ref").get<std::size_t>();
      m.mean = c.at("mean").get<double>();
      m.sd = c.at("sd").get<double>();
      m.support = c.at("support").get<double>();
      m.length = c.at("length").get<std::size_t>();
      model.columns.push_back(m);
    }
    model.n_train = h.at("n_train").get<std::size_t>();
    model.n_candidate_rules = h.at("n_candidate_rules").get<std::size_t>();
    const json& d = h.at("draws");
    model.draws.niter = d.at("niter").get<std::size_t>();
    model.draws.burnin = d.at("burnin").get<std::size_t>();
    model.draws.thin = d.at("thin").get<std::size_t>();
    model.draws.seed = d.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model header: ") + e.what());
  }

  std::string tag;
  Eigen::Index count = 0, cols = 0;
  if (!(in >> tag >> count >> cols) || tag != "draws") throw DataError("model file: draws block missing");
  if (cols != static_cast<Eigen::Index>(model.columns.size())) {
    throw DataError("model file: draws width does not match column metadata");
  }
  model.draws.beta.resize(count, cols);
  model.draws.sigma2.resize(count);
  model.draws.tau2.resize(count);
  std::getline(in, line);
  for (Eigen::Index r = 0; r < count; ++r) {
    if (!std::getline(in, line)) throw DataError("model file truncated in draws block");
    const char* p = line.c_str();
    auto next = [&]() {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) throw DataError("model file: malformed draw on row " + std::to_string(r + 1));
      p = end;
      return v;
    };
    for (Eigen::Index j = 0; j < cols; ++j) model.draws.beta(r, j) = next();
    model.draws.sigma2(r) = next();
    model.draws.tau2(r) = next();
  }
  if (!(in >> tag) || tag != "end") throw DataError("model file: missing end marker");
  for (const auto& c : model.columns) {
    if (c.kind == TermKind::rule && c.ref >= model.rules.size()) throw DataError("model file: dangling rule reference");
    if (c.kind == TermKind::linear && c.ref >= model.schema.encoded_width()) {
      throw DataError("model file: linear term references unknown column");
    }
  }
  return model;
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  return read_model(in);
}

}  // namespace horserule
