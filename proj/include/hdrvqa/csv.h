#ifndef HDRVQA_CSV_H_
#define HDRVQA_CSV_H_

#include <string>
#include <vector>

namespace hdrvqa {

// Minimal comma-separated table: no quoting, fields are trimmed. Lines
// starting with '#' are collected as comments, blank lines are skipped.
struct CsvTable {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws FormatError naming the file.
  std::size_t column(const std::string& name) const;
  std::string source;
};

CsvTable read_csv(const std::string& path);
std::vector<std::string> split_csv_line(const std::string& line);

// Parses a double, throwing FormatError with context on failure.
double parse_double(const std::string& s, const std::string& context);
long parse_long(const std::string& s, const std::string& context);

// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace hdrvqa

#endif  // HDRVQA_CSV_H_
