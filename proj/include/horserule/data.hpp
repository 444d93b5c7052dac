#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace horserule {

enum class ColumnKind { numeric, categorical };

/// A covariate as it appears in the input file. Categorical covariates are
/// one-hot encoded into `levels.size()` consecutive encoded columns starting
/// at `first_encoded`; numeric covariates occupy exactly one.
struct SourceColumn {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> levels;
  std::size_t first_encoded = 0;

  std::size_t width() const { return kind == ColumnKind::numeric ? 1 : levels.size(); }
};

/// Column layout shared by a training set and anything scored against it.
struct Schema {
  std::vector<SourceColumn> columns;
  std::vector<std::string> feature_names;   // one per encoded column
  std::vector<std::size_t> feature_source;  // encoded column -> index into columns
  std::string target_name;

  std::size_t encoded_width() const { return feature_names.size(); }
};

struct Dataset {
  Schema schema;
  Eigen::MatrixXd X;  // rows x encoded columns
  Eigen::VectorXd y;  // empty when scored data carries no target
  std::vector<std::string> warnings;

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(X.cols()); }
};

/// Raw comma-separated table: header plus string cells. Quoted fields may
/// contain commas and doubled quotes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Builds a dataset from a table. Columns whose every cell parses as a number
/// are numeric unless overridden; everything else is categorical. Empty and
/// "NA" cells are rejected.
Dataset make_dataset(const CsvTable& table, const std::string& target,
                     const std::map<std::string, ColumnKind>& overrides = {});

Dataset load_csv(const std::string& path, const std::string& target,
                 const std::map<std::string, ColumnKind>& overrides = {});

/// Encodes a table against an existing schema. The target column is read when
/// present and `require_target` decides whether its absence is an error.
/// Unseen categorical levels encode as all-zero indicators and add a warning.
Dataset encode_with_schema(const CsvTable& table, const Schema& schema, bool require_target);

enum class YTransform { none, log };

std::string to_string(YTransform t);
YTransform parse_ytransform(const std::string& s);

struct ScalingInfo {
  Eigen::VectorXd col_means;
  Eigen::VectorXd col_sds;          // 1.0 placeholder for constant columns
  std::vector<bool> constant;       // flagged columns are excluded from the model
  double y_mean = 0.0;
  double y_sd = 1.0;
  YTransform y_transform = YTransform::none;

  std::vector<std::size_t> kept_columns() const;
  std::vector<std::size_t> constant_columns() const;

  Eigen::MatrixXd transform_X(const Eigen::MatrixXd& X) const;    // -> kept columns only
  Eigen::MatrixXd inverse_X(const Eigen::MatrixXd& Xs) const;     // kept columns only
  Eigen::VectorXd transform_y(const Eigen::VectorXd& y) const;
  Eigen::VectorXd inverse_y(const Eigen::VectorXd& ys) const;
};

struct Standardized {
  Eigen::MatrixXd X;  // kept columns, mean 0 and sample sd 1
  Eigen::VectorXd y;  // mean 0 and sample sd 1
  ScalingInfo scaling;
};

/// Column mean and sample (n - 1) standard deviation.
void mean_and_sd(const Eigen::Ref<const Eigen::VectorXd>& v, double& mean, double& sd);

Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         YTransform y_transform = YTransform::none);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows);
Eigen::VectorXd select_rows(const Eigen::VectorXd& y, const std::vector<std::size_t>& rows);

}  // namespace horserule
