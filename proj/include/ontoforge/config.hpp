#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>

#include "ontoforge/modelclient.hpp"
#include "ontoforge/pipeline.hpp"

namespace ontoforge {

/// Layered settings: defaults, then an INI file, then CLI flags.
struct AppConfig {
  BackendConfig backend;
  std::optional<std::filesystem::path> templates_dir;
  std::size_t budget = kDefaultPromptBudget;
  std::size_t max_triples = kDefaultMaxTriples;
  double threshold = kDefaultDuplicateThreshold;
};

/// Reads [backend], [prompts] and [validate] sections of key=value lines.
/// Unknown sections or keys are an input-format error.
AppConfig parse_config(std::string_view ini_text, AppConfig base = {});
AppConfig load_config(const std::filesystem::path& path, AppConfig base = {});

}  // namespace ontoforge
