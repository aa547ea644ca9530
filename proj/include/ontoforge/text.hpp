#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ontoforge::text {

std::string_view trim(std::string_view s) noexcept;

/// Trim, collapse internal whitespace runs to one space, lowercase ASCII.
/// This is the comparison key for ontology names.
std::string fold(std::string_view s);

/// Splits on LF, dropping a trailing CR from each line. A final empty
/// segment after a terminating LF is not returned.
std::vector<std::string_view> split_lines(std::string_view s);

/// Replaces ill-formed UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view s);

bool is_valid_utf8(std::string_view s) noexcept;

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

/// "symptomsAndSigns" -> "symptoms and signs". Non-camel names pass through.
std::string relation_phrase(std::string_view name);

}  // namespace ontoforge::text
