#pragma once

#include <string>
#include <vector>

namespace sentcorr {

/// Write to "<path>.tmp" then rename, so failures never leave partial files.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);
std::vector<std::string> read_lines(const std::string& path);

/// Minimal CSV quoting: fields containing comma, quote or newline are quoted.
std::string csv_field(const std::string& s);
std::vector<std::string> csv_split(const std::string& line);

void ensure_directory(const std::string& path);

}  // namespace sentcorr
