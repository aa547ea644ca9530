#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ontoforge {

/// The five pipeline modes, one per use case.
enum class Mode { completion, extraction, construction, gapfill, factcheck };

std::string_view to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view s) noexcept;

struct Triple {
  std::string subject;
  std::string relation;
  std::string object;
  bool object_is_literal = false;

  friend bool operator==(const Triple&, const Triple&) = default;
};

}  // namespace ontoforge
