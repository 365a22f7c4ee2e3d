#include "markovcount/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace markovcount {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

int parse_int(const std::string& field, std::size_t line_no,
              const std::string& column) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    fail(line_no, "column '" + column + "' is not an integer: '" + field + "'");
  }
  return value;
}

double parse_real(const std::string& field, std::size_t line_no,
                  const std::string& column) {
  double value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    fail(line_no, "column '" + column + "' is not a number: '" + field + "'");
  }
  return value;
}

std::string format_real(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input: missing header");

  const std::vector<std::string> header = split_csv(line);
  int col_n = -1, col_r = -1, col_m = -1, col_w = -1;
  Dataset dataset;
  std::vector<int> covariate_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name.empty()) fail(1, "empty column name in header");
    auto bind = [&](int& slot) {
      if (slot >= 0) fail(1, "duplicate column '" + name + "'");
      slot = static_cast<int>(c);
    };
    if (name == "n") {
      bind(col_n);
    } else if (name == "r") {
      bind(col_r);
    } else if (name == "m") {
      bind(col_m);
    } else if (name == "weight") {
      bind(col_w);
    } else {
      if (std::find(dataset.covariate_names.begin(),
                    dataset.covariate_names.end(),
                    name) != dataset.covariate_names.end()) {
        fail(1, "duplicate column '" + name + "'");
      }
      dataset.covariate_names.push_back(name);
      covariate_cols.push_back(static_cast<int>(c));
    }
  }
  if (col_n < 0 || col_r < 0) fail(1, "header must contain 'n' and 'r'");

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size()) {
      fail(line_no, "expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
    }
    ClusterObservation obs;
    obs.n = parse_int(fields[static_cast<std::size_t>(col_n)], line_no, "n");
    obs.r = parse_int(fields[static_cast<std::size_t>(col_r)], line_no, "r");
    if (col_m >= 0) {
      obs.m = parse_int(fields[static_cast<std::size_t>(col_m)], line_no, "m");
    }
    if (col_w >= 0) {
      obs.weight =
          parse_real(fields[static_cast<std::size_t>(col_w)], line_no, "weight");
    }
    obs.covariates.reserve(covariate_cols.size());
    for (std::size_t j = 0; j < covariate_cols.size(); ++j) {
      obs.covariates.push_back(
          parse_real(fields[static_cast<std::size_t>(covariate_cols[j])],
                     line_no, dataset.covariate_names[j]));
    }
    if (const auto report = validate_observation(obs); !report.ok()) {
      fail(line_no, report.to_string());
    }
    dataset.observations.push_back(std::move(obs));
  }
  return dataset;
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  out << "n,r,m,weight";
  for (const auto& name : dataset.covariate_names) out << ',' << name;
  out << '\n';
  for (const auto& obs : dataset.observations) {
    out << obs.n << ',' << obs.r << ',' << obs.m << ','
        << format_real(obs.weight);
    for (double v : obs.covariates) out << ',' << format_real(v);
    out << '\n';
  }
}

void write_dataset_file(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  write_dataset(out, dataset);
  if (!out) throw IoError("failed writing dataset file: " + path);
}

}  // namespace markovcount
