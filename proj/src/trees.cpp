#include "horserule/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "horserule/error.hpp"
#include "horserule/parallel.hpp"

namespace horserule {

std::string to_string(TreeSource s) { return s == TreeSource::random_forest ? "rf" : "gbm"; }

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf; }));
}

double Tree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int k = 0;
  while (!nodes[static_cast<std::size_t>(k)].is_leaf) {
    const TreeNode& node = nodes[static_cast<std::size_t>(k)];
    k = x(node.split_col) <= node.split_threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(k)].prediction;
}

Eigen::VectorXd Tree::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_row(X.row(i));
  return out;
}

bool operator==(const TreeNode& a, const TreeNode& b) {
  return a.split_col == b.split_col && a.split_threshold == b.split_threshold && a.left == b.left &&
         a.right == b.right && a.is_leaf == b.is_leaf && a.prediction == b.prediction && a.n_node == b.n_node;
}

bool operator==(const Tree& a, const Tree& b) { return a.source == b.source && a.nodes == b.nodes; }

std::size_t default_n_min(std::size_t n_rows) {
  auto m = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n_rows))));
  // cbrt of a perfect cube can land a hair above the integer
  if (m > 1 && (m - 1) * (m - 1) * (m - 1) >= n_rows) --m;
  return std::max<std::size_t>(1, m);
}

void TreeGenConfig::validate() const {
  if (!(L >= 2.0)) throw UsageError("--L must be >= 2 (got " + std::to_string(L) + ")");
  if (!(mix >= 0.0 && mix <= 1.0)) throw UsageError("--mix must lie in [0, 1]");
  if (!(gbm_shrinkage > 0.0 && gbm_shrinkage <= 1.0)) throw UsageError("gbm shrinkage must lie in (0, 1]");
  if (!(gbm_subsample > 0.0 && gbm_subsample <= 1.0)) throw UsageError("gbm subsample must lie in (0, 1]");
}

std::size_t TreeGenConfig::resolved_n_min(std::size_t n_rows) const {
  return n_min > 0 ? n_min : default_n_min(n_rows);
}

std::size_t TreeGenConfig::resolved_mtry(std::size_t p) const {
  const std::size_t m = rf_mtry > 0 ? rf_mtry : std::max<std::size_t>(1, p / 3);
  return std::min(m, p);
}

std::size_t sample_tree_size(double L, Rng& rng) {
  if (!(L >= 2.0)) throw UsageError("mean tree size L must be >= 2");
  if (L == 2.0) return 2;
  std::exponential_distribution<double> phi(1.0 / (L - 2.0));
  return 2 + static_cast<std::size_t>(std::floor(phi(rng)));
}

namespace {

struct SplitCandidate {
  bool valid = false;
  double gain = 0.0;
  int col = -1;
  double threshold = 0.0;
};

struct OpenLeaf {
  int node = 0;
  std::vector<std::size_t> rows;
  SplitCandidate best;
};

std::vector<std::size_t> candidate_columns(std::size_t p, std::size_t mtry, Rng& rng) {
  std::vector<std::size_t> cols(p);
  std::iota(cols.begin(), cols.end(), 0);
  if (mtry >= p) return cols;
  for (std::size_t i = 0; i < mtry; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, p - 1);
    std::swap(cols[i], cols[pick(rng)]);
  }
  cols.resize(mtry);
  std::sort(cols.begin(), cols.end());
  return cols;
}

SplitCandidate best_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::size_t>& rows,
                          std::size_t n_min, std::size_t mtry, Rng& rng) {
  SplitCandidate best;
  const std::size_t n = rows.size();
  if (n < 2 * n_min || n < 2) return best;

  double mean = 0.0, sum_sq = 0.0;
  for (auto r : rows) mean += y(static_cast<Eigen::Index>(r));
  mean /= static_cast<double>(n);
  double sst = 0.0;
  for (auto r : rows) {
    const double yi = y(static_cast<Eigen::Index>(r));
    sum_sq += yi * yi;
    sst += (yi - mean) * (yi - mean);
  }
  const auto cols = candidate_columns(static_cast<std::size_t>(X.cols()), mtry, rng);
  if (!(sst > 1e-20 * (sum_sq + 1e-300))) return best;

  // y is centered at the node mean, so the total sum is ~0 and the gain of a
  // split reduces to SL^2/nL + SR^2/nR.
  std::vector<std::pair<double, double>> xy(n);
  const std::size_t lo = std::max<std::size_t>(n_min, 1);
  for (auto c : cols) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(rows[i]);
      xy[i] = {X(r, static_cast<Eigen::Index>(c)), y(r) - mean};
    }
    std::sort(xy.begin(), xy.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (xy.front().first == xy.back().first) continue;
    double total = 0.0;
    for (const auto& v : xy) total += v.second;
    double left = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left += xy[i].second;
      const std::size_t n_left = i + 1;
      if (n_left < lo) continue;
      if (n - n_left < lo) break;
      if (xy[i].first == xy[i + 1].first) continue;
      const double right = total - left;
      const double gain = left * left / static_cast<double>(n_left) +
                          right * right / static_cast<double>(n - n_left) - total * total / static_cast<double>(n);
      if (gain > best.gain) {
        best.gain = gain;
        best.col = static_cast<int>(c);
        best.threshold = 0.5 * (xy[i].first + xy[i + 1].first);
        // adjacent doubles can average to the upper value
        if (!(best.threshold < xy[i + 1].first)) best.threshold = xy[i].first;
      }
    }
  }
  best.valid = best.col >= 0 && best.gain > 1e-12 * sst;
  return best;
}

double mean_of(const Eigen::VectorXd& y, const std::vector<std::size_t>& rows) {
  double s = 0.0;
  for (auto r : rows) s += y(static_cast<Eigen::Index>(r));
  return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

}  // namespace

Tree fit_cart(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const std::size_t> rows,
              std::size_t size_budget, std::size_t n_min, std::size_t mtry, Rng& rng) {
  const auto p = static_cast<std::size_t>(X.cols());
  if (size_budget < 2) throw UsageError("tree size budget must be >= 2");
  if (n_min < 1) throw UsageError("n_min must be >= 1");
  if (mtry < 1 || mtry > p) throw UsageError("mtry must lie in [1, p]");
  if (X.rows() != y.size()) throw DataError("X and y row counts differ");

  Tree tree;
  std::vector<std::size_t> root_rows(rows.begin(), rows.end());
  TreeNode root;
  root.n_node = root_rows.size();
  root.prediction = mean_of(y, root_rows);
  tree.nodes.push_back(root);

  std::vector<OpenLeaf> open;
  open.push_back({0, root_rows, best_split(X, y, root_rows, n_min, mtry, rng)});
  std::size_t leaves = 1;
  while (leaves < size_budget) {
    int pick = -1;
    for (std::size_t i = 0; i < open.size(); ++i) {
      if (!open[i].best.valid) continue;
      if (pick < 0 || open[i].best.gain > open[static_cast<std::size_t>(pick)].best.gain) pick = static_cast<int>(i);
    }
    if (pick < 0) break;
    OpenLeaf leaf = std::move(open[static_cast<std::size_t>(pick)]);
    open.erase(open.begin() + pick);

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : leaf.rows) {
      (X(static_cast<Eigen::Index>(r), leaf.best.col) <= leaf.best.threshold ? left_rows : right_rows).push_back(r);
    }
    const int left_id = static_cast<int>(tree.nodes.size());
    const int right_id = left_id + 1;
    TreeNode left, right;
    left.n_node = left_rows.size();
    left.prediction = mean_of(y, left_rows);
    right.n_node = right_rows.size();
    right.prediction = mean_of(y, right_rows);
    tree.nodes.push_back(left);
    tree.nodes.push_back(right);

    TreeNode& parent = tree.nodes[static_cast<std::size_t>(leaf.node)];
    parent.is_leaf = false;
    parent.split_col = leaf.best.col;
    parent.split_threshold = leaf.best.threshold;
    parent.left = left_id;
    parent.right = right_id;
    ++leaves;

    if (leaves < size_budget) {
      SplitCandidate lb = best_split(X, y, left_rows, n_min, mtry, rng);
      SplitCandidate rb = best_split(X, y, right_rows, n_min, mtry, rng);
      open.push_back({left_id, std::move(left_rows), lb});
      open.push_back({right_id, std::move(right_rows), rb});
    }
  }
  return tree;
}

std::vector<Tree> generate_rf_trees(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t count,
                                    const TreeGenConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(X.rows());
  const std::size_t n_min = cfg.resolved_n_min(n);
  const std::size_t mtry = cfg.resolved_mtry(static_cast<std::size_t>(X.cols()));
  const std::uint64_t base = rng();
  std::vector<Tree> trees(count);
  parallel_for(count, [&](std::size_t t) {
    Rng local(mix_seed(base, t));
    const std::size_t budget = sample_tree_size(cfg.L, local);
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    std::vector<std::size_t> boot(n);
    for (auto& r : boot) r = draw(local);
    std::sort(boot.begin(), boot.end());
    trees[t] = fit_cart(X, y, boot, budget, n_min, mtry, local);
    trees[t].source = TreeSource::random_forest;
  });
  return trees;
}

std::vector<Tree> generate_gbm_trees(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t count,
                                     const TreeGenConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  const std::size_t n_min = cfg.resolved_n_min(n);
  const std::size_t m = cfg.gbm_subsample >= 1.0
                            ? n
                            : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(cfg.gbm_subsample * static_cast<double>(n))));
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  Eigen::VectorXd residual = y;
  std::vector<Tree> trees;
  trees.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t budget = sample_tree_size(cfg.L, rng);
    std::vector<std::size_t> rows;
    if (m >= n) {
      rows = all;
    } else {
      std::vector<std::size_t> perm = all;
      for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(perm[i], perm[pick(rng)]);
      }
      rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
      std::sort(rows.begin(), rows.end());
    }
    Tree tree = fit_cart(X, residual, rows, budget, n_min, p, rng);
    tree.source = TreeSource::boosting;
    residual -= cfg.gbm_shrinkage * tree.predict(X);
    trees.push_back(std::move(tree));
  }
  return trees;
}

std::vector<Tree> generate_ensemble(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeGenConfig& cfg,
                                    Rng& rng) {
  cfg.validate();
  const auto n_rf = static_cast<std::size_t>(std::floor(cfg.mix * static_cast<double>(cfg.ntree) + 1e-9));
  const std::size_t n_gbm = cfg.ntree - n_rf;
  Rng rf_rng(mix_seed(rng(), 1));
  Rng gbm_rng(mix_seed(rng(), 2));
  std::vector<Tree> trees = generate_rf_trees(X, y, n_rf, cfg, rf_rng);
  std::vector<Tree> boosted = generate_gbm_trees(X, y, n_gbm, cfg, gbm_rng);
  trees.insert(trees.end(), std::make_move_iterator(boosted.begin()), std::make_move_iterator(boosted.end()));
  return trees;
}

}  // namespace horserule
