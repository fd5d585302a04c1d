#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace exsim {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::filesystem::path& path);

// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

// Simple CSV emitter; cells are written verbatim (no quoting needed for the
// numeric/identifier payloads used here).
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  void write(const std::filesystem::path& path) const;
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace exsim
