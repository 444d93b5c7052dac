#include "horserule/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "horserule/error.hpp"
#include "horserule/random.hpp"

namespace horserule {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits one logical record; a quoted field may span lines, so the caller
// hands over the stream.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  std::string field;
  bool quoted = false;
  for (;;) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(trim(field));
        field.clear();
      } else {
        field += c;
      }
    }
    if (!quoted) break;
    field += '\n';
    if (!std::getline(in, line)) throw DataError("unterminated quoted field at end of file");
  }
  fields.push_back(trim(field));
  return true;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

std::string cell_location(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row + 1) + " column '" + column + "'";
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> fields;
  if (!read_record(in, table.header)) throw DataError("empty CSV input: header row required");
  while (read_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != table.header.size()) {
      throw DataError("row " + std::to_string(table.rows.size() + 1) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(fields);
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path);
  return read_csv(in);
}

Dataset make_dataset(const CsvTable& table, const std::string& target,
                     const std::map<std::string, ColumnKind>& overrides) {
  const auto target_it = std::find(table.header.begin(), table.header.end(), target);
  if (target_it == table.header.end()) throw DataError("target column not found: " + target);
  const std::size_t target_idx = static_cast<std::size_t>(target_it - table.header.begin());
  const std::size_t n = table.rows.size();
  if (n < 2) throw DataError("at least 2 data rows required");
  if (table.header.size() < 2) throw DataError("at least one covariate column required");
  for (const auto& [name, kind] : overrides) {
    (void)kind;
    if (std::find(table.header.begin(), table.header.end(), name) == table.header.end()) {
      throw DataError("schema override names unknown column: " + name);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (is_missing(table.rows[i][c])) {
        throw DataError("missing value at " + cell_location(i, table.header[c]));
      }
    }
  }

  Schema schema;
  schema.target_name = target;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == target_idx) continue;
    SourceColumn col;
    col.name = table.header[c];
    const auto ov = overrides.find(col.name);
    if (ov != overrides.end()) {
      col.kind = ov->second;
    } else {
      const bool all_numeric = std::all_of(table.rows.begin(), table.rows.end(), [&](const auto& row) {
        return parse_number(row[c]).has_value();
      });
      col.kind = all_numeric ? ColumnKind::numeric : ColumnKind::categorical;
    }
    if (col.kind == ColumnKind::categorical) {
      std::set<std::string> levels;
      for (const auto& row : table.rows) levels.insert(row[c]);
      col.levels.assign(levels.begin(), levels.end());
    }
    col.first_encoded = schema.feature_names.size();
    for (std::size_t k = 0; k < col.width(); ++k) {
      schema.feature_names.push_back(col.kind == ColumnKind::numeric ? col.name
                                                                     : col.name + "=" + col.levels[k]);
      schema.feature_source.push_back(schema.columns.size());
    }
    schema.columns.push_back(std::move(col));
  }
  return encode_with_schema(table, schema, true);
}

Dataset load_csv(const std::string& path, const std::string& target,
                 const std::map<std::string, ColumnKind>& overrides) {
  return make_dataset(read_csv_file(path), target, overrides);
}

Dataset encode_with_schema(const CsvTable& table, const Schema& schema, bool require_target) {
  std::vector<std::size_t> source_idx;
  for (const auto& col : schema.columns) {
    const auto it = std::find(table.header.begin(), table.header.end(), col.name);
    if (it == table.header.end()) throw DataError("column '" + col.name + "' missing from input");
    source_idx.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  const auto target_it = std::find(table.header.begin(), table.header.end(), schema.target_name);
  const bool has_target = target_it != table.header.end();
  if (require_target && !has_target) throw DataError("target column not found: " + schema.target_name);

  const std::size_t n = table.rows.size();
  Dataset ds;
  ds.schema = schema;
  ds.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(schema.encoded_width()));
  std::set<std::string> unseen;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    for (std::size_t s = 0; s < schema.columns.size(); ++s) {
      const auto& col = schema.columns[s];
      const std::string& cell = row[source_idx[s]];
      if (is_missing(cell)) throw DataError("missing value at " + cell_location(i, col.name));
      if (col.kind == ColumnKind::numeric) {
        const auto v = parse_number(cell);
        if (!v) throw DataError("unparseable numeric cell '" + cell + "' at " + cell_location(i, col.name));
        ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col.first_encoded)) = *v;
      } else {
        const auto lv = std::find(col.levels.begin(), col.levels.end(), cell);
        if (lv == col.levels.end()) {
          unseen.insert(col.name + "=" + cell);
          continue;
        }
        const auto k = static_cast<std::size_t>(lv - col.levels.begin());
        ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col.first_encoded + k)) = 1.0;
      }
    }
  }
  for (const auto& u : unseen) ds.warnings.push_back("unseen categorical level " + u + " encoded as all zeros");

  if (has_target) {
    const std::size_t t = static_cast<std::size_t>(target_it - table.header.begin());
    ds.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = parse_number(table.rows[i][t]);
      if (!v) {
        throw DataError("non-numeric target value '" + table.rows[i][t] + "' at " +
                        cell_location(i, schema.target_name));
      }
      ds.y(static_cast<Eigen::Index>(i)) = *v;
    }
  }
  return ds;
}

std::string to_string(YTransform t) { return t == YTransform::log ? "log" : "none"; }

YTransform parse_ytransform(const std::string& s) {
  if (s == "none") return YTransform::none;
  if (s == "log") return YTransform::log;
  throw UsageError("--ytransform must be 'none' or 'log', got '" + s + "'");
}

void mean_and_sd(const Eigen::Ref<const Eigen::VectorXd>& v, double& mean, double& sd) {
  const double n = static_cast<double>(v.size());
  mean = v.mean();
  sd = n > 1 ? std::sqrt((v.array() - mean).square().sum() / (n - 1.0)) : 0.0;
}

std::vector<std::size_t> ScalingInfo::kept_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < constant.size(); ++j)
    if (!constant[j]) out.push_back(j);
  return out;
}

std::vector<std::size_t> ScalingInfo::constant_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < constant.size(); ++j)
    if (constant[j]) out.push_back(j);
  return out;
}

Eigen::MatrixXd ScalingInfo::transform_X(const Eigen::MatrixXd& X) const {
  const auto kept = kept_columns();
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(kept[k]);
    out.col(static_cast<Eigen::Index>(k)) = (X.col(j).array() - col_means(j)) / col_sds(j);
  }
  return out;
}

Eigen::MatrixXd ScalingInfo::inverse_X(const Eigen::MatrixXd& Xs) const {
  const auto kept = kept_columns();
  Eigen::MatrixXd out(Xs.rows(), Xs.cols());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(kept[k]);
    out.col(static_cast<Eigen::Index>(k)) = Xs.col(static_cast<Eigen::Index>(k)).array() * col_sds(j) + col_means(j);
  }
  return out;
}

Eigen::VectorXd ScalingInfo::transform_y(const Eigen::VectorXd& y) const {
  Eigen::VectorXd t = y_transform == YTransform::log ? Eigen::VectorXd(y.array().log()) : y;
  return (t.array() - y_mean) / y_sd;
}

Eigen::VectorXd ScalingInfo::inverse_y(const Eigen::VectorXd& ys) const {
  Eigen::VectorXd t = ys.array() * y_sd + y_mean;
  if (y_transform == YTransform::log) t = t.array().exp();
  return t;
}

Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, YTransform y_transform) {
  if (X.rows() != y.size()) throw DataError("X and y row counts differ");
  if (y_transform == YTransform::log && (y.array() <= 0.0).any()) {
    throw DataError("log transform requested but the response has nonpositive values");
  }
  Standardized out;
  ScalingInfo& s = out.scaling;
  s.y_transform = y_transform;
  const Eigen::VectorXd ty = y_transform == YTransform::log ? Eigen::VectorXd(y.array().log()) : y;
  mean_and_sd(ty, s.y_mean, s.y_sd);
  if (!(s.y_sd > 0.0) || s.y_sd <= 1e-12 * std::max(1.0, std::abs(s.y_mean))) {
    throw DataError("constant response: standard deviation is zero");
  }

  const Eigen::Index p = X.cols();
  s.col_means.resize(p);
  s.col_sds.resize(p);
  s.constant.assign(static_cast<std::size_t>(p), false);
  for (Eigen::Index j = 0; j < p; ++j) {
    double m = 0.0, sd = 0.0;
    mean_and_sd(X.col(j), m, sd);
    s.col_means(j) = m;
    const bool is_const = (X.col(j).array() == X(0, j)).all();
    s.constant[static_cast<std::size_t>(j)] = is_const;
    s.col_sds(j) = is_const ? 1.0 : sd;
  }
  out.X = s.transform_X(X);
  out.y = s.transform_y(y);
  return out;
}

std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw UsageError("fold count k must satisfy 2 <= k <= n (k=" + std::to_string(k) +
                     ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mix_seed(seed, 0x6b666f6c64ULL));
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Fold> folds(k);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold_of[perm[pos]] = pos % k;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
    }
  }
  return folds;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& y, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(rows[i]));
  return out;
}

}  // namespace horserule
