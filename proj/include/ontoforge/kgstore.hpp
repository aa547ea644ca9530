#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ontoforge/ontology.hpp"
#include "ontoforge/tripleparse.hpp"
#include "ontoforge/types.hpp"

namespace ontoforge {

struct Entity {
  std::string label;
  std::optional<std::string> concept_name;
  std::optional<std::string> external_id;  // e.g. Wikidata "Q87719492"

  friend bool operator==(const Entity&, const Entity&) = default;
};

/// ABox: typed entities plus accepted triples. Entities are keyed by
/// normalize_label and kept in declaration order; triples are free of exact
/// (normalized) duplicates, and every subject is a known entity.
class KnowledgeGraph {
 public:
  explicit KnowledgeGraph(std::string ns = std::string(kDefaultNamespace)) : namespace_(std::move(ns)) {}

  const std::string& ns() const noexcept { return namespace_; }
  const std::vector<Entity>& entities() const noexcept { return entities_; }
  const std::vector<Triple>& triples() const noexcept { return triples_; }
  bool empty() const noexcept { return entities_.empty() && triples_.empty(); }

  const Entity* find_entity(std::string_view label) const;

  /// Adds a new entity, or fills in concept/external_id on an existing one
  /// when those are still unset. Returns the stored entity.
  const Entity& upsert_entity(Entity entity);

  /// Returns false (and stores nothing) when the fact is already present.
  /// Creates an untyped subject entity when needed.
  bool add_triple(Triple triple);

  bool contains(const Triple& triple) const;
  bool has_fact_for(std::string_view subject, std::string_view relation) const;

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.namespace_ == b.namespace_ && a.entities_ == b.entities_ && a.triples_ == b.triples_;
  }

 private:
  std::string namespace_;
  std::vector<Entity> entities_;
  std::unordered_map<std::string, std::size_t> entity_index_;
  std::vector<Triple> triples_;
  std::unordered_map<std::string, std::size_t> triple_index_;
};

struct LoadResult {
  KnowledgeGraph kg;
  std::size_t duplicate_warnings = 0;
};

/// Line-record JSON (.kgl). Unknown concepts and malformed lines raise
/// ParseError with the 1-based line number.
LoadResult load_kg(std::string_view source, const Ontology& ontology);
std::string save_kg(const KnowledgeGraph& kg);

struct GapSlot {
  std::string entity;
  std::string relation;

  friend bool operator==(const GapSlot&, const GapSlot&) = default;
};

/// Every (typed entity, relation whose domain is that entity's concept) pair
/// with no existing fact, in entity then relation declaration order.
std::vector<GapSlot> find_gaps(const KnowledgeGraph& kg, const Ontology& ontology);

struct RangeSuggestion {
  std::string object;
  std::string concept_name;
};

struct MergeReport {
  std::size_t added = 0;
  std::size_t skipped_duplicate = 0;
  /// Objects of declared relations that could be typed by range. Recorded, not asserted.
  std::vector<RangeSuggestion> range_suggestions;
};

struct MergeResult {
  KnowledgeGraph kg;
  MergeReport report;
};

/// Candidates must be accepted or edited (edited ones contribute their
/// replacement); anything else is a PreconditionError naming the candidate.
/// Relations the ontology knows are stored under their declared name.
MergeResult merge_accepted(const KnowledgeGraph& kg, std::span<const CandidateTriple> candidates,
                           const Ontology& ontology);

}  // namespace ontoforge
