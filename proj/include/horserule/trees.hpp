#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "horserule/random.hpp"

namespace horserule {

enum class TreeSource { random_forest, boosting };

std::string to_string(TreeSource s);

/// Node of a binary regression tree. Rows with x[split_col] <= split_threshold
/// go left. Indices refer to Tree::nodes.
struct TreeNode {
  int split_col = -1;
  double split_threshold = 0.0;
  int left = -1;
  int right = -1;
  bool is_leaf = true;
  double prediction = 0.0;
  std::size_t n_node = 0;  // training rows reaching the node, counted with multiplicity
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  TreeSource source = TreeSource::boosting;

  std::size_t leaf_count() const;
  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

bool operator==(const TreeNode& a, const TreeNode& b);
bool operator==(const Tree& a, const Tree& b);

struct TreeGenConfig {
  std::size_t ntree = 1000;
  double L = 5.0;               // mean number of terminal nodes
  std::size_t n_min = 0;        // 0 selects ceil(N^(1/3))
  double mix = 0.3;             // fraction of trees from the random forest
  std::size_t rf_mtry = 0;      // 0 selects max(1, floor(p / 3))
  double gbm_shrinkage = 0.1;
  double gbm_subsample = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t resolved_n_min(std::size_t n_rows) const;
  std::size_t resolved_mtry(std::size_t p) const;
};

/// Smallest integer >= N^(1/3).
std::size_t default_n_min(std::size_t n_rows);

/// Terminal-node budget 2 + floor(phi), phi ~ Exponential(mean L - 2).
/// L == 2 returns 2 without touching the generator.
std::size_t sample_tree_size(double L, Rng& rng);

/// Greedy best-first CART on squared error. `rows` may repeat indices
/// (bootstrap). Each node considers `mtry` columns drawn without replacement;
/// when mtry == p no randomness is consumed. A split is admissible only when
/// both children receive at least n_min rows.
Tree fit_cart(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const std::size_t> rows,
              std::size_t size_budget, std::size_t n_min, std::size_t mtry, Rng& rng);

std::vector<Tree> generate_rf_trees(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t count,
                                    const TreeGenConfig& cfg, Rng& rng);

std::vector<Tree> generate_gbm_trees(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t count,
                                     const TreeGenConfig& cfg, Rng& rng);

/// floor(mix * ntree) forest trees followed by the remaining boosted trees.
std::vector<Tree> generate_ensemble(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeGenConfig& cfg,
                                    Rng& rng);

}  // namespace horserule
