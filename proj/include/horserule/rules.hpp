#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "horserule/random.hpp"
#include "horserule/trees.hpp"

namespace horserule {

enum class CmpOp { le, gt };

struct Condition {
  std::size_t col = 0;
  CmpOp op = CmpOp::le;
  double threshold = 0.0;

  bool holds(double x) const { return op == CmpOp::le ? x <= threshold : x > threshold; }
};

bool operator==(const Condition& a, const Condition& b);

/// Conjunction of threshold conditions. Conditions are kept merged: at most
/// one upper (<=) and one lower (>) bound per column, ordered by column.
struct Rule {
  std::vector<Condition> conditions;
  std::size_t length = 0;  // number of constrained columns; an interval counts once
  double support = 0.0;    // fraction of training rows satisfying the rule
  TreeSource source = TreeSource::boosting;

  std::vector<std::size_t> columns() const;  // distinct columns, ascending
};

bool operator==(const Rule& a, const Rule& b);

/// Merges raw path conditions into interval form and sets `length`.
Rule make_rule(const std::vector<Condition>& path, TreeSource source);

/// One rule per internal node: the path to a uniformly chosen child.
std::vector<Rule> extract_rules(const Tree& tree, Rng& rng);

/// Every child of every split, 2 * (leaves - 1) rules.
std::vector<Rule> candidate_rules(const Tree& tree);

/// 0/1 activation of the rule on each row of X.
Eigen::VectorXd evaluate_rule(const Rule& rule, const Eigen::MatrixXd& X);

/// Conditions joined by " & " with 6 significant digits, e.g.
/// "6.94 < rm <= 7.45 & lstat <= 9.7".
std::string render_rule(const Rule& rule, std::span<const std::string> names);

/// Drops rules with support 0 or 1 and rules whose activation vector equals
/// or complements an earlier survivor's. Of a duplicate pair the shorter rule
/// survives, the earlier one on equal length. Survivors carry support on X.
std::vector<Rule> dedup_rules(const std::vector<Rule>& rules, const Eigen::MatrixXd& X);

enum class TermKind { linear, rule };

struct ColumnMeta {
  TermKind kind = TermKind::linear;
  std::size_t ref = 0;  // encoded covariate index (linear) or index into the rule list
  double mean = 0.0;    // pre-standardization statistics on training data
  double sd = 1.0;
  double support = 0.0;
  std::size_t length = 0;
};

/// Standardized model matrix: linear columns first, then rule columns.
struct DesignMatrix {
  Eigen::MatrixXd Z;
  std::vector<ColumnMeta> columns;
  std::vector<Rule> rules;

  std::size_t linear_count() const;
};

DesignMatrix build_design_matrix(const std::vector<Rule>& rules, const Eigen::MatrixXd& X,
                                 const std::vector<std::size_t>& linear_cols);

/// Standardized design rows for new data using stored training statistics.
Eigen::MatrixXd design_rows(const std::vector<ColumnMeta>& columns, const std::vector<Rule>& rules,
                            const Eigen::MatrixXd& X);

}  // namespace horserule
