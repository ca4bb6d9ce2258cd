#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace fluidq::csv {

/// Shortest decimal form that round-trips a double bit-exactly (17 significant digits).
std::string format(double v);

class Writer {
 public:
  explicit Writer(const std::string& path);  // throws std::runtime_error on open failure
  void comment(const std::string& line);     // "# <line>"
  void header(const std::vector<std::string>& cols);
  void row(const std::vector<double>& vals);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
};

struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  double number(std::size_t row, std::size_t col) const;
};

Table read(const std::string& path);

}  // namespace fluidq::csv
