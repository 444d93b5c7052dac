#include "horserule/rules.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <unordered_map>

#include "horserule/data.hpp"
#include "horserule/error.hpp"

namespace horserule {

bool operator==(const Condition& a, const Condition& b) {
  return a.col == b.col && a.op == b.op && a.threshold == b.threshold;
}

bool operator==(const Rule& a, const Rule& b) {
  return a.conditions == b.conditions && a.length == b.length && a.support == b.support && a.source == b.source;
}

std::vector<std::size_t> Rule::columns() const {
  std::vector<std::size_t> cols;
  for (const auto& c : conditions)
    if (cols.empty() || cols.back() != c.col) cols.push_back(c.col);
  return cols;
}

Rule make_rule(const std::vector<Condition>& path, TreeSource source) {
  struct Bounds {
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    bool has_upper = false;
    bool has_lower = false;
  };
  std::map<std::size_t, Bounds> by_col;
  for (const auto& c : path) {
    Bounds& b = by_col[c.col];
    if (c.op == CmpOp::le) {
      b.upper = std::min(b.upper, c.threshold);
      b.has_upper = true;
    } else {
      b.lower = std::max(b.lower, c.threshold);
      b.has_lower = true;
    }
  }
  Rule rule;
  rule.source = source;
  for (const auto& [col, b] : by_col) {
    if (b.has_lower) rule.conditions.push_back({col, CmpOp::gt, b.lower});
    if (b.has_upper) rule.conditions.push_back({col, CmpOp::le, b.upper});
  }
  rule.length = by_col.size();
  return rule;
}

namespace {

void walk(const Tree& tree, int node, std::vector<Condition>& path, Rng* rng, std::vector<Rule>& out) {
  const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
  if (nd.is_leaf) return;
  const Condition go_left{static_cast<std::size_t>(nd.split_col), CmpOp::le, nd.split_threshold};
  const Condition go_right{static_cast<std::size_t>(nd.split_col), CmpOp::gt, nd.split_threshold};
  if (rng) {
    std::bernoulli_distribution coin(0.5);
    path.push_back(coin(*rng) ? go_left : go_right);
    out.push_back(make_rule(path, tree.source));
    path.pop_back();
  } else {
    for (const auto& c : {go_left, go_right}) {
      path.push_back(c);
      out.push_back(make_rule(path, tree.source));
      path.pop_back();
    }
  }
  path.push_back(go_left);
  walk(tree, nd.left, path, rng, out);
  path.back() = go_right;
  walk(tree, nd.right, path, rng, out);
  path.pop_back();
}

}  // namespace

std::vector<Rule> extract_rules(const Tree& tree, Rng& rng) {
  std::vector<Rule> out;
  std::vector<Condition> path;
  if (!tree.nodes.empty()) walk(tree, 0, path, &rng, out);
  return out;
}

std::vector<Rule> candidate_rules(const Tree& tree) {
  std::vector<Rule> out;
  std::vector<Condition> path;
  if (!tree.nodes.empty()) walk(tree, 0, path, nullptr, out);
  return out;
}

Eigen::VectorXd evaluate_rule(const Rule& rule, const Eigen::MatrixXd& X) {
  for (const auto& c : rule.conditions) {
    if (c.col >= static_cast<std::size_t>(X.cols())) {
      throw std::out_of_range("rule references column " + std::to_string(c.col) + " but X has " +
                              std::to_string(X.cols()) + " columns");
    }
  }
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    bool all = true;
    for (const auto& c : rule.conditions) {
      if (!c.holds(X(i, static_cast<Eigen::Index>(c.col)))) {
        all = false;
        break;
      }
    }
    out(i) = all ? 1.0 : 0.0;
  }
  return out;
}

std::string render_rule(const Rule& rule, std::span<const std::string> names) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  auto name_of = [&](std::size_t col) {
    return col < names.size() ? names[col] : "x" + std::to_string(col);
  };
  std::string out;
  for (std::size_t i = 0; i < rule.conditions.size(); ++i) {
    if (!out.empty()) out += " & ";
    const Condition& c = rule.conditions[i];
    const bool interval = c.op == CmpOp::gt && i + 1 < rule.conditions.size() &&
                          rule.conditions[i + 1].col == c.col && rule.conditions[i + 1].op == CmpOp::le;
    if (interval) {
      out += num(c.threshold) + " < " + name_of(c.col) + " <= " + num(rule.conditions[i + 1].threshold);
      ++i;
    } else {
      out += name_of(c.col) + (c.op == CmpOp::le ? " <= " : " > ") + num(c.threshold);
    }
  }
  return out;
}

namespace {

struct PatternHash {
  std::size_t operator()(const std::vector<std::uint64_t>& words) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto w : words) h = mix_seed(h ^ w, 0);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

std::vector<Rule> dedup_rules(const std::vector<Rule>& rules, const Eigen::MatrixXd& X) {
  const auto n = static_cast<std::size_t>(X.rows());
  const std::size_t n_words = (n + 63) / 64;
  const std::uint64_t tail_mask = n % 64 == 0 ? ~0ULL : ((1ULL << (n % 64)) - 1);

  std::vector<Rule> kept;
  std::unordered_map<std::vector<std::uint64_t>, std::size_t, PatternHash> seen;
  for (const auto& rule : rules) {
    const Eigen::VectorXd act = evaluate_rule(rule, X);
    const double count = act.sum();
    if (count == 0.0 || count == static_cast<double>(n)) continue;

    std::vector<std::uint64_t> bits(n_words, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (act(static_cast<Eigen::Index>(i)) != 0.0) bits[i / 64] |= 1ULL << (i % 64);
    // canonical form has row 0 inactive, so a pattern and its complement collide
    if (bits[0] & 1ULL) {
      for (auto& w : bits) w = ~w;
      bits.back() &= tail_mask;
    }
    Rule r = rule;
    r.support = count / static_cast<double>(n);
    auto [it, inserted] = seen.emplace(std::move(bits), kept.size());
    if (inserted) {
      kept.push_back(std::move(r));
    } else if (r.length < kept[it->second].length) {
      kept[it->second] = std::move(r);
    }
  }
  return kept;
}

std::size_t DesignMatrix::linear_count() const {
  return static_cast<std::size_t>(
      std::count_if(columns.begin(), columns.end(), [](const ColumnMeta& c) { return c.kind == TermKind::linear; }));
}

DesignMatrix build_design_matrix(const std::vector<Rule>& rules, const Eigen::MatrixXd& X,
                                 const std::vector<std::size_t>& linear_cols) {
  const Eigen::Index n = X.rows();
  DesignMatrix dm;
  dm.rules = rules;
  dm.Z.resize(n, static_cast<Eigen::Index>(linear_cols.size() + rules.size()));

  Eigen::Index j = 0;
  auto add_column = [&](const Eigen::VectorXd& raw, ColumnMeta meta, const std::string& what) {
    mean_and_sd(raw, meta.mean, meta.sd);
    if (!(meta.sd > 0.0)) throw NumericError("zero-variance design column: " + what);
    dm.Z.col(j++) = (raw.array() - meta.mean) / meta.sd;
    dm.columns.push_back(meta);
  };
  for (auto c : linear_cols) {
    if (c >= static_cast<std::size_t>(X.cols())) throw std::out_of_range("linear column index out of range");
    ColumnMeta meta;
    meta.kind = TermKind::linear;
    meta.ref = c;
    add_column(X.col(static_cast<Eigen::Index>(c)), meta, "linear term " + std::to_string(c));
  }
  for (std::size_t r = 0; r < rules.size(); ++r) {
    ColumnMeta meta;
    meta.kind = TermKind::rule;
    meta.ref = r;
    const Eigen::VectorXd act = evaluate_rule(rules[r], X);
    meta.support = act.mean();
    meta.length = rules[r].length;
    dm.rules[r].support = meta.support;
    add_column(act, meta, "rule " + std::to_string(r));
  }
  return dm;
}

Eigen::MatrixXd design_rows(const std::vector<ColumnMeta>& columns, const std::vector<Rule>& rules,
                            const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Z(X.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const ColumnMeta& m = columns[j];
    const Eigen::VectorXd raw = m.kind == TermKind::linear ? Eigen::VectorXd(X.col(static_cast<Eigen::Index>(m.ref)))
                                                           : evaluate_rule(rules.at(m.ref), X);
    Z.col(static_cast<Eigen::Index>(j)) = (raw.array() - m.mean) / m.sd;
  }
  return Z;
}

}  // namespace horserule
