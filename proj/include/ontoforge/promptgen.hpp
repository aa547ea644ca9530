#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ontoforge/kgstore.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/types.hpp"

namespace ontoforge {

/// Shared output-format block. Every rendered prompt contains it verbatim.
extern const std::string_view kOutputFormatInstruction;

inline constexpr std::size_t kDefaultPromptBudget = 3000;

struct PromptRequest {
  Mode mode = Mode::completion;
  std::string prompt_text;
  std::map<std::string, std::string> slots;
  std::vector<Triple> demonstrators;
  std::size_t token_estimate = 0;
};

/// ceil(UTF-8 byte length / 4).
std::size_t estimate_tokens(std::string_view text) noexcept;

/// Prompt templates, one per mode, with {{slot}} placeholders. Every
/// template must contain {{format}}, where the output-format block goes.
class TemplateSet {
 public:
  /// Built-in templates.
  TemplateSet();

  /// Built-ins overridden by any "<mode>.txt" present in dir.
  static TemplateSet from_directory(const std::filesystem::path& dir);

  const std::string& get(Mode mode) const;
  void set(Mode mode, std::string body);

  /// Substitutes {{name}} placeholders. Unknown placeholders are a PreconditionError.
  static std::string render(std::string_view body, const std::map<std::string, std::string>& values);

 private:
  std::map<Mode, std::string> bodies_;
};

/// Built-in template body for a mode, as shipped in templates/<mode>.txt.
std::string_view builtin_template(Mode mode) noexcept;

/// Renders the concepts referenced by the ontology's relations plus each
/// relation with its domain and range.
std::string render_schema(const Ontology& ontology);

class PromptGenerator {
 public:
  explicit PromptGenerator(TemplateSet templates = {}) : templates_(std::move(templates)) {}

  PromptRequest completion(std::string_view subject, const RelationDef& relation,
                           std::size_t max_triples) const;

  PromptRequest extraction(std::string_view source_text, std::string_view source_id,
                           std::string_view entity, const RelationDef& relation,
                           std::span<const Triple> demonstrators) const;

  std::vector<PromptRequest> construction(const Ontology& ontology, std::string_view topic,
                                          std::size_t budget = kDefaultPromptBudget) const;

  PromptRequest gapfill(const GapSlot& slot, const Ontology& ontology, std::size_t max_triples) const;

  PromptRequest factcheck(std::span<const Triple> triples) const;

  const TemplateSet& templates() const noexcept { return templates_; }

 private:
  PromptRequest build(Mode mode, std::map<std::string, std::string> slots,
                      std::vector<Triple> demonstrators = {}) const;

  TemplateSet templates_;
};

/// Splits relations, in declaration order, into consecutive chunks whose
/// render_schema estimate fits the budget. Each chunk carries exactly the
/// concepts its relations reference.
std::vector<Ontology> chunk_ontology(const Ontology& ontology, std::size_t budget);

/// Demonstrator subject and object must occur in the text after
/// normalization; the relation must occur in the text or name the requested relation.
bool is_grounded(const Triple& demonstrator, std::string_view source_text,
                 const RelationDef& relation);

}  // namespace ontoforge
