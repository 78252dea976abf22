#pragma once

#include <string>
#include <vector>

namespace ld3 {

enum class ColumnType { Continuous, Categorical };

struct ColumnInfo {
  std::string name;
  ColumnType type = ColumnType::Continuous;
  int levels = 0;  // categorical only; values live in [0, levels)
};

/// Rectangular columnar data with per-column type. Categorical values are
/// stored as non-negative integers (in doubles); missing values are not
/// representable.
class Dataset {
 public:
  Dataset() = default;

  void add_column(ColumnInfo info, std::vector<double> values);

  size_t n_rows() const { return n_rows_; }
  size_t n_cols() const { return schema_.size(); }
  const std::vector<ColumnInfo>& schema() const { return schema_; }
  const ColumnInfo& info(size_t i) const { return schema_.at(i); }
  const ColumnInfo& info(const std::string& name) const;
  bool has_column(const std::string& name) const;
  size_t column_index(const std::string& name) const;  // throws on unknown
  const std::vector<double>& column(size_t i) const { return cols_.at(i); }
  const std::vector<double>& column(const std::string& name) const;
  std::vector<std::string> column_names() const;

  /// Copy without the named column.
  Dataset without_column(const std::string& name) const;

  /// Quantile-bins a continuous column into k categorical levels, in place.
  void bin_column(const std::string& name, int k);

  std::string to_csv() const;
  std::string schema_json() const;

  static Dataset from_csv(const std::string& csv_text,
                          const std::string& schema_json_text);

 private:
  std::vector<ColumnInfo> schema_;
  std::vector<std::vector<double>> cols_;
  size_t n_rows_ = 0;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ld3
