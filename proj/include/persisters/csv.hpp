#pragma once

#include <Eigen/Dense>

#include <fstream>
#include <string>
#include <vector>

namespace persisters {

// Comma-separated, one header row, LF endings. Values go through %.12g by
// default, %.17g in exact mode.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header, bool exact = false);
  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);

 private:
  std::ofstream out_;
  bool exact_;
  std::size_t columns_;
};

std::string format_double(double x, bool exact);

// Reads a headerless numeric matrix (used for kernel tables and initial
// profiles). Throws ConfigError with the offending line number.
Eigen::MatrixXd read_csv_matrix(const std::string& path);

}  // namespace persisters
