#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace wifico {

// Fields are trimmed; no quoting (none of the formats need it).
std::vector<std::string> split_fields(std::string_view line, char delimiter);

std::string join_fields(const std::vector<std::string>& fields, char delimiter = ',');

// Reads a headered CSV file. The first non-blank line must match
// `expected_header` exactly.
class CsvReader {
 public:
  CsvReader(const std::string& path, std::vector<std::string> expected_header, char delimiter = ',');

  // False at end of file. Blank lines are skipped.
  bool next(std::vector<std::string>& fields);
  std::size_t line_number() const { return line_number_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  char delimiter_;
  std::size_t line_number_ = 0;
};

// Opens for writing, creating parent directories; throws Error on failure.
std::ofstream open_output(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace wifico
