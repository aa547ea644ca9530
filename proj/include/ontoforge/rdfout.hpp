#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ontoforge/kgstore.hpp"

namespace ontoforge {

inline constexpr std::string_view kRdfNamespace = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

struct IriPolicy {
  std::string ns = std::string(kDefaultNamespace);
  int collision_suffix_start = 2;
};

/// Trim, whitespace runs -> "_", percent-encode every byte outside the
/// RFC 3986 unreserved set.
std::string slugify(std::string_view label);

/// label -> IRI. Identical labels re-yield their IRI; a different label that
/// lands on a taken IRI gets "_2", "_3", ... in first-seen order.
std::string mint_iri(std::string_view label, const IriPolicy& policy,
                     std::map<std::string, std::string>& minted);

/// N-Triples literal body escaping (\" \\ \n \r \t, other C0 controls as \u00XX).
std::string escape_literal(std::string_view value);

struct Statement {
  std::string subject;  // IRI
  std::string predicate;  // IRI
  std::string object;   // N-Triples term: <IRI> or "literal"
  friend auto operator<=>(const Statement&, const Statement&) = default;
};

/// All statements (facts plus rdf:type for typed entities), IRIs minted in
/// a fixed order: entities, concepts, then relations and objects per triple.
std::vector<Statement> rdf_statements(const KnowledgeGraph& kg, const IriPolicy& policy);

/// Sorted, LF-terminated lines; empty KG -> empty string.
std::string emit_ntriples(const KnowledgeGraph& kg, const IriPolicy& policy);

/// Prefix block, then one block per subject with predicates sorted.
std::string emit_turtle(const KnowledgeGraph& kg, const IriPolicy& policy);

}  // namespace ontoforge
