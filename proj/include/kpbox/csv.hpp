#pragma once

// Deterministic number formatting and a minimal CSV writer. All floats are
// printed with 12 significant digits so that repeated runs with the same
// configuration produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpbox {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
    write_strings(header);
  }

  void write_row(const std::vector<double>& values) {
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) line += ',';
      line += format_number(values[i]);
    }
    out_ << line << '\n';
  }

  void write_strings(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += cells[i];
    }
    out_ << line << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace kpbox
