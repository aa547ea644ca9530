#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontoforge/kgstore.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/tripleparse.hpp"

namespace ontoforge {

struct TripleRef {
  std::string transcript_id;
  std::size_t line_number = 0;

  friend auto operator<=>(const TripleRef&, const TripleRef&) = default;
};

TripleRef ref_of(const CandidateTriple& c);

enum class ViolationKind { unknown_relation, domain_mismatch, range_mismatch };
std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  TripleRef triple_ref;
  ViolationKind kind = ViolationKind::unknown_relation;
  std::string expected;  // concept name; empty for unknown_relation
  std::string found;     // concept name, or the undeclared relation text
};

/// Concept typing used for conformance: label (normalized) -> concept name.
using Typing = std::map<std::string, std::string>;

/// Concepts asserted in the KG.
Typing typing_from_kg(const KnowledgeGraph& kg);

/// Adds a concept for each still-untyped subject by plurality vote over the
/// domains of the declared relations it is the subject of (ties go to the
/// earliest vote). Used when a session has no KG to type entities from.
Typing infer_subject_typing(std::span<const CandidateTriple> candidates, const Ontology& ontology,
                            Typing base);

std::vector<Violation> check_conformance(std::span<const CandidateTriple> triples,
                                         const Ontology& ontology, const Typing& typing);
std::vector<Violation> check_conformance(std::span<const CandidateTriple> triples,
                                         const Ontology& ontology, const KnowledgeGraph& kg);

using Cluster = std::vector<TripleRef>;

inline constexpr double kDefaultDuplicateThreshold = 0.5;

/// Connected components (size >= 2) of the near-duplicate graph: equal
/// normalized relation, subject and object similarity both >= threshold.
std::vector<Cluster> find_duplicates(std::span<const CandidateTriple> triples, double threshold);

enum class Verdict { contradicted, unconfirmed, confirmed };
std::string_view to_string(Verdict v) noexcept;

struct FactCheckVerdict {
  Triple kg_triple;
  Verdict verdict = Verdict::unconfirmed;
  std::optional<std::string> evidence;  // the matching model output line
};

inline constexpr double kFactMatchThreshold = 0.5;

/// Same relation after normalization, subject and object similarity >= kFactMatchThreshold.
bool facts_match(const Triple& kg_fact, const Triple& model_fact);

/// `flagged` is the parsed response to a fact-check prompt. Throws
/// Error(input_format) when it holds neither triples nor the NONE sentinel.
std::vector<FactCheckVerdict> fact_check(std::span<const Triple> kg_triples, const ParseReport& flagged,
                                         const ParseReport* regenerated = nullptr);

struct SessionMetrics {
  Mode mode = Mode::completion;
  std::size_t generated_count = 0;
  std::size_t correct_count = 0;
  std::optional<std::size_t> gold_count;
  std::optional<std::size_t> extracted_count;
  std::optional<double> precision;
  std::optional<double> recall;
};

/// Every candidate must be decided, else CurationError naming the first undecided one.
SessionMetrics compute_metrics(Mode mode, std::span<const CandidateTriple> candidates,
                               std::optional<std::size_t> gold_count);

nlohmann::json to_json(const SessionMetrics& m);

/// Words that make an extracted fact suspicious when they precede the
/// object in its source sentence.
bool is_negation_cue(std::string_view word);

struct NegationWarning {
  TripleRef triple_ref;
  std::string cue;
  std::string sentence;
};

/// Flags candidates whose object is mentioned in a source sentence that has a
/// negation cue before the mention.
std::vector<NegationWarning> negation_warnings(std::span<const CandidateTriple> candidates,
                                               std::string_view source_text);

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<Cluster> duplicate_clusters;
  std::vector<FactCheckVerdict> verdicts;
  std::vector<NegationWarning> negation_warnings;
  double duplicate_threshold = kDefaultDuplicateThreshold;
};

nlohmann::json to_json(const ValidationReport& r);
ValidationReport validation_report_from_json(const nlohmann::json& j);

}  // namespace ontoforge
