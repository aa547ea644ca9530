#pragma once

// Bundled reproduction scenarios: the inputs of one pipeline run plus the
// authored model responses and curator decisions that go with it.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ontoforge/pipeline.hpp"

namespace ontoforge::scenarios {

struct Scenario {
  std::string name;
  std::string mode;  // completion | gapfill | construct | extraction | factcheck
  std::filesystem::path ontology;
  std::optional<std::filesystem::path> kg;
  std::optional<std::filesystem::path> corpus;
  std::string subject, relation, entity, topic;
  std::optional<std::size_t> max_triples;
  std::size_t max_slots = 1;
  std::vector<Triple> demonstrators;
  std::optional<std::size_t> gold;
  std::string provenance;
  std::vector<std::string> responses;  // one per prompt, by chunk / document number
  std::vector<std::size_t> reject;      // 1-based candidate positions the curator rejects
};

/// Paths inside the file are relative to `data_dir`.
Scenario load_scenario(const std::filesystem::path& file, const std::filesystem::path& data_dir);
std::vector<Scenario> load_all(const std::filesystem::path& data_dir);

SessionState run_scenario(const Scenario& s, ModelClient& client, PipelineOptions options);

/// Accept everything except the scenario's reject positions.
std::vector<Decision> scenario_decisions(const Scenario& s, const SessionState& session);

/// Which authored response answers this prompt.
std::size_t response_index(const PromptRequest& request);

}  // namespace ontoforge::scenarios
