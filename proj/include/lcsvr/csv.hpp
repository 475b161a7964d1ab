#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "lcsvr/problem.hpp"

namespace lcsvr {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

/// Strict decimal float parse of a full token.
double parse_double(const std::string& token, const std::string& context);

/// Training CSV: header row `y,x1,...,xp`, one sample per line.
TrainingSet read_training_csv(const std::string& path);

/// Feature CSV: header row `x1,...,xp`. May contain zero data rows.
Eigen::MatrixXd read_features_csv(const std::string& path);

/// Headerless numeric CSV; every row must have the same width.
Eigen::MatrixXd read_matrix_csv(const std::string& path);

/// Writes via a temporary file in the same directory and renames on success,
/// so failures never leave a partial artifact behind.
void atomic_write_file(const std::string& path, const std::string& content);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace lcsvr
