#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ontoforge/kgstore.hpp"
#include "ontoforge/modelclient.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/promptgen.hpp"
#include "ontoforge/session.hpp"

namespace ontoforge {

inline constexpr std::size_t kDefaultMaxTriples = 15;

struct PipelineOptions {
  std::filesystem::path session_root = "sessions";
  bool persist = true;
  std::size_t budget = kDefaultPromptBudget;
  double duplicate_threshold = kDefaultDuplicateThreshold;
  std::size_t max_triples = kDefaultMaxTriples;
  std::optional<std::string> session_id;  // default: derived from mode and prompts
};

Ontology load_ontology_file(const std::filesystem::path& path);
KnowledgeGraph load_kg_file(const std::filesystem::path& path, const Ontology& ontology);

/// Corpus files hold one or more documents separated by a line "---".
std::vector<std::string> split_corpus(std::string_view text);

/// Runs each mode end to end: prompts, model calls, parsing, validation.
/// Sessions are persisted under options.session_root, including partial
/// sessions when a model call fails (the error is rethrown after saving).
class Pipeline {
 public:
  Pipeline(ModelClient& client, PromptGenerator generator, PipelineOptions options);

  SessionState run_construct(const std::filesystem::path& ontology_path, std::string topic);

  /// Facts about a subject (entity or concept label) for one relation,
  /// drawn from the model's pre-trained knowledge.
  SessionState run_completion(const std::filesystem::path& ontology_path, const std::string& subject,
                              const std::string& relation, std::optional<std::size_t> max_triples = {});

  /// Gap analysis over an existing KG; one gap-fill prompt per slot, up to max_slots.
  SessionState run_complete(const std::filesystem::path& kg_path, const std::filesystem::path& ontology_path,
                            std::size_t max_slots);

  SessionState run_extract(const std::filesystem::path& corpus_path, const std::filesystem::path& ontology_path,
                           const std::string& entity, const std::string& relation,
                           std::span<const Triple> demonstrators, std::optional<std::size_t> gold_count = {});

  SessionState run_factcheck(const std::filesystem::path& kg_path, const std::filesystem::path& ontology_path);

  const PipelineOptions& options() const noexcept { return options_; }

 private:
  SessionState execute(SessionState session, std::span<const PromptRequest> prompts,
                       const Ontology& ontology, const KnowledgeGraph* kg);

  ModelClient& client_;
  PromptGenerator generator_;
  PipelineOptions options_;
};

struct ExportOptions {
  std::filesystem::path out_dir;
  std::string stem = "kg";
  /// Overrides the ontology/KG paths recorded in the session.
  std::optional<std::filesystem::path> ontology_path;
  std::optional<std::filesystem::path> kg_path;
};

struct ExportResult {
  KnowledgeGraph kg;
  MergeReport merge;
  SessionMetrics metrics;
  std::filesystem::path kgl_path, nt_path, ttl_path, metrics_path;
};

/// Applies the decisions to the session's pristine candidates, then merges
/// accepted facts (or, for fact-check sessions, drops the KG facts the
/// curator agreed were wrong) and writes .kgl, .nt, .ttl and metrics.json.
/// Throws CurationError when any candidate is left undecided.
ExportResult export_session(const SessionState& session, std::span<const Decision> decisions,
                            const ExportOptions& options);

}  // namespace ontoforge
