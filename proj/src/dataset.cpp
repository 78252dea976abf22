#include "ld3/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ld3 {

void Dataset::add_column(ColumnInfo info, std::vector<double> values) {
  if (has_column(info.name))
    throw std::invalid_argument("duplicate column: " + info.name);
  if (!schema_.empty() && values.size() != n_rows_)
    throw std::invalid_argument("column " + info.name +
                                " breaks rectangularity");
  if (info.type == ColumnType::Categorical) {
    if (info.levels < 2)
      throw std::invalid_argument("categorical column " + info.name +
                                  " needs >= 2 levels");
    for (double v : values) {
      double r = std::round(v);
      if (r != v || r < 0 || r >= info.levels)
        throw std::invalid_argument("categorical value out of range in " +
                                    info.name);
    }
  }
  if (schema_.empty()) n_rows_ = values.size();
  schema_.push_back(std::move(info));
  cols_.push_back(std::move(values));
}

const ColumnInfo& Dataset::info(const std::string& name) const {
  return schema_.at(column_index(name));
}

bool Dataset::has_column(const std::string& name) const {
  for (const auto& c : schema_)
    if (c.name == name) return true;
  return false;
}

size_t Dataset::column_index(const std::string& name) const {
  for (size_t i = 0; i < schema_.size(); ++i)
    if (schema_[i].name == name) return i;
  throw std::invalid_argument("unknown column: " + name);
}

const std::vector<double>& Dataset::column(const std::string& name) const {
  return cols_.at(column_index(name));
}

std::vector<std::string> Dataset::column_names() const {
  std::vector<std::string> out;
  out.reserve(schema_.size());
  for (const auto& c : schema_) out.push_back(c.name);
  return out;
}

Dataset Dataset::without_column(const std::string& name) const {
  size_t drop = column_index(name);
  Dataset out;
  for (size_t i = 0; i < schema_.size(); ++i)
    if (i != drop) out.add_column(schema_[i], cols_[i]);
  return out;
}

void Dataset::bin_column(const std::string& name, int k) {
  size_t idx = column_index(name);
  if (schema_[idx].type != ColumnType::Continuous)
    throw std::invalid_argument("bin_column expects a continuous column");
  if (k < 2) throw std::invalid_argument("need >= 2 bins");
  std::vector<double> sorted = cols_[idx];
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (int b = 1; b < k; ++b)
    cuts.push_back(sorted[sorted.size() * b / k]);
  for (double& v : cols_[idx]) {
    int level = static_cast<int>(
        std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
    v = level;
  }
  schema_[idx].type = ColumnType::Categorical;
  schema_[idx].levels = k;
}

std::string Dataset::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  for (size_t i = 0; i < schema_.size(); ++i)
    out << (i ? "," : "") << schema_[i].name;
  out << "\n";
  for (size_t r = 0; r < n_rows_; ++r) {
    for (size_t i = 0; i < schema_.size(); ++i) {
      if (i) out << ",";
      if (schema_[i].type == ColumnType::Categorical)
        out << static_cast<long long>(cols_[i][r]);
      else
        out << cols_[i][r];
    }
    out << "\n";
  }
  return out.str();
}

std::string Dataset::schema_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema_) {
    nlohmann::json j;
    j["name"] = c.name;
    j["type"] =
        c.type == ColumnType::Continuous ? "continuous" : "categorical";
    if (c.type == ColumnType::Categorical) j["levels"] = c.levels;
    cols.push_back(j);
  }
  return nlohmann::json{{"columns", cols}}.dump(2);
}

Dataset Dataset::from_csv(const std::string& csv_text,
                          const std::string& schema_json_text) {
  auto schema = nlohmann::json::parse(schema_json_text);
  std::vector<ColumnInfo> infos;
  for (const auto& c : schema.at("columns")) {
    ColumnInfo info;
    info.name = c.at("name").get<std::string>();
    std::string t = c.at("type").get<std::string>();
    if (t == "continuous") {
      info.type = ColumnType::Continuous;
    } else if (t == "categorical") {
      info.type = ColumnType::Categorical;
      info.levels = c.at("levels").get<int>();
    } else {
      throw std::invalid_argument("unknown column type: " + t);
    }
    infos.push_back(info);
  }

  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }

  // Columns load in CSV order; the schema may list them in any order but
  // must cover every header exactly.
  std::vector<ColumnInfo> ordered;
  for (const auto& name : header) {
    auto it = std::find_if(infos.begin(), infos.end(),
                           [&](const ColumnInfo& c) { return c.name == name; });
    if (it == infos.end())
      throw std::invalid_argument("column " + name + " missing from schema");
    ordered.push_back(*it);
  }

  std::vector<std::vector<double>> cols(header.size());
  size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    size_t i = 0;
    while (std::getline(ls, cell, ',')) {
      if (i >= header.size())
        throw std::invalid_argument("row has too many cells");
      if (cell.empty())
        throw std::invalid_argument("missing value at row " +
                                    std::to_string(row));
      cols[i].push_back(std::stod(cell));
      ++i;
    }
    if (i != header.size())
      throw std::invalid_argument("row has too few cells");
    ++row;
  }

  Dataset out;
  for (size_t i = 0; i < header.size(); ++i)
    out.add_column(ordered[i], std::move(cols[i]));
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ld3
