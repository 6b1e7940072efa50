#include "seedstable/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace seedstable {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("CSV parse error in " + context + ": '" + s + "'");
  }
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);
  if (header.empty() || header.back() != "y")
    throw std::runtime_error(path + ": last column must be 'y'");
  const bool has_treatment = header.size() >= 2 && header[header.size() - 2] == "a";
  const std::size_t d = header.size() - 1 - (has_treatment ? 1 : 0);
  if (d < 1) throw std::runtime_error(path + ": no feature columns");

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               " has " + std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j)
      row.push_back(parse_double(fields[j], "column '" + header[j] + "' line " +
                                                std::to_string(lineno)));
    rows.push_back(std::move(row));
  }

  Dataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.features.resize(n, static_cast<Eigen::Index>(d));
  data.outcome.resize(n);
  if (has_treatment) data.treatment = Vector(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) data.features(i, static_cast<Eigen::Index>(j)) = rows[i][j];
    if (has_treatment) (*data.treatment)(i) = rows[i][d];
    data.outcome(i) = rows[i].back();
  }
  data.column_names = std::vector<std::string>(header.begin(), header.begin() + d);
  data.validate();
  return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const Eigen::Index d = data.cols();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (data.column_names && static_cast<std::size_t>(j) < data.column_names->size())
      out << (*data.column_names)[j];
    else
      out << "x" << (j + 1);
    out << ',';
  }
  if (data.treatment) out << "a,";
  out << "y\n";
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out << format_double(data.features(i, j)) << ',';
    if (data.treatment) out << format_double((*data.treatment)(i)) << ',';
    out << format_double(data.outcome(i)) << '\n';
  }
}

}  // namespace seedstable
