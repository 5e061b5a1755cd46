#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dep {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void append_line(const std::filesystem::path& path, const std::string& line);

// Deterministic shortest-ish double formatting used in CSV output.
std::string fmt_g17(double v);

// Minimal CSV: no quoting (ids and class names never contain commas).
std::vector<std::string> split_csv_line(const std::string& line);

struct CsvTable {
  std::string config_hash;  // from a leading "# config_hash=..." comment, if present
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::string& config_hash,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace dep
