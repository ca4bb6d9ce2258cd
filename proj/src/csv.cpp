#include "fluidq/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace fluidq::csv {

std::string format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Writer::Writer(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("csv: cannot open " + path + " for writing");
}

void Writer::comment(const std::string& line) { out_ << "# " << line << "\n"; }

void Writer::header(const std::vector<std::string>& cols) { row(cols); }

void Writer::row(const std::vector<double>& vals) {
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i) out_ << ',';
    out_ << format(vals[i]);
  }
  out_ << "\n";
  if (!out_) throw std::runtime_error("csv: write failure");
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << "\n";
  if (!out_) throw std::runtime_error("csv: write failure");
}

double Table::number(std::size_t row, std::size_t col) const {
  return std::stod(rows.at(row).at(col));
}

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  Table t;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!header_seen) {
      t.columns = std::move(fields);
      header_seen = true;
    } else {
      t.rows.push_back(std::move(fields));
    }
  }
  return t;
}

}  // namespace fluidq::csv
