#ifndef MARKOVCOUNT_DATASET_IO_HPP
#define MARKOVCOUNT_DATASET_IO_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "markovcount/observation.hpp"

namespace markovcount {

/// Malformed dataset content (bad header, non-numeric field, row failing
/// validation). what() names the offending row.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (missing file, unwritable path).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// In-memory form of a dataset file: observation rows plus the covariate
/// column names from the header, in column order.
struct Dataset {
  std::vector<ClusterObservation> observations;
  std::vector<std::string> covariate_names;
};

/// Comma-separated with one header line. Columns `n` and `r` are required;
/// `m` (default 0) and `weight` (default 1) are recognized by name; every
/// other column is a covariate, in header order. Each row must pass
/// validate_observation or the parse fails naming the row.
Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::string& path);

void write_dataset(std::ostream& out, const Dataset& dataset);
void write_dataset_file(const std::string& path, const Dataset& dataset);

}  // namespace markovcount

#endif
