#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <vector>

namespace sas {

/// Shortest round-trip text for a double ("%.17g"), locale independent.
std::string format_number(double value);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  /// Mixed text/number row; strings are written verbatim.
  void row_text(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV with a header row.
CsvTable read_csv(std::istream& in);

}  // namespace sas
