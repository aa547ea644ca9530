#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ontoforge {

struct ConceptDef {
  std::string name;
  std::optional<std::string> description;

  friend bool operator==(const ConceptDef&, const ConceptDef&) = default;
};

struct RelationDef {
  std::string name;
  std::string domain;
  std::string range;
  std::optional<std::string> external_id;  // e.g. a Wikidata property such as "P176"

  /// Human-readable form used in prompts ("hasSymptom" -> "has symptom").
  std::string phrase() const;

  friend bool operator==(const RelationDef&, const RelationDef&) = default;
};

inline constexpr std::string_view kDefaultNamespace = "http://example.org/kg/";

/// Schema layer: concepts plus relations with domain/range constraints.
/// Immutable once built; all lookups are case- and whitespace-insensitive.
class Ontology {
 public:
  Ontology() = default;

  /// Validates every invariant; throws PreconditionError otherwise.
  Ontology(std::vector<ConceptDef> concepts, std::vector<RelationDef> relations,
           std::string ns = std::string(kDefaultNamespace));

  const std::vector<ConceptDef>& concepts() const noexcept { return concepts_; }
  const std::vector<RelationDef>& relations() const noexcept { return relations_; }
  const std::string& ns() const noexcept { return namespace_; }
  bool empty() const noexcept { return concepts_.empty() && relations_.empty(); }

  const ConceptDef* find_concept(std::string_view name) const;
  /// Matches either the relation name or its phrase form.
  const RelationDef* find_relation(std::string_view name) const;

  friend bool operator==(const Ontology&, const Ontology&) = default;

 private:
  std::vector<ConceptDef> concepts_;
  std::vector<RelationDef> relations_;
  std::string namespace_ = std::string(kDefaultNamespace);
};

/// Parses the compact line format:
///   namespace <IRI>
///   concept <Name> [description=<free text>]
///   relation <Name> domain=<Concept> range=<Concept> [id=<ExternalId>]
/// '#' starts a comment. Errors are ParseError carrying the line number.
Ontology parse_ontology(std::string_view source);

/// Inverse of parse_ontology.
std::string serialize_ontology(const Ontology& ontology);

std::optional<ConceptDef> concept_of(const Ontology& ontology, std::string_view name);

/// Absolute IRI (scheme ":" ...) ending in '/' or '#', free of characters
/// that are illegal inside an N-Triples IRIREF.
bool is_valid_namespace(std::string_view iri) noexcept;

}  // namespace ontoforge
