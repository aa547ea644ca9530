#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ontoforge::fsio {

/// Whole-file read. Throws Error(input_format) when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, flushes, then renames over `path`,
/// so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Appends one line (a trailing LF is added) and flushes.
void append_line(const std::filesystem::path& path, std::string_view line);

}  // namespace ontoforge::fsio
