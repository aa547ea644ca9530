#include "ontoforge/kgstore.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <sstream>

#include "ontoforge/error.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge {
namespace {

using nlohmann::json;

std::string fact_key(const Triple& t) {
  std::string key = normalize_label(t.subject);
  key += '\x1f';
  key += normalize_label(t.relation);
  key += '\x1f';
  key += normalize_label(t.object);
  key += t.object_is_literal ? "\x1f" "L" : "\x1f" "E";
  return key;
}

std::string required_string(const json& j, const char* field, std::size_t line) {
  if (!j.contains(field) || !j.at(field).is_string()) {
    throw ParseError(line, std::string("missing string field '") + field + "'");
  }
  std::string value = j.at(field).get<std::string>();
  if (normalize_label(value).empty()) {
    throw ParseError(line, std::string("field '") + field + "' is empty");
  }
  return value;
}

std::optional<std::string> optional_string(const json& j, const char* field, std::size_t line) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  if (!j.at(field).is_string()) {
    throw ParseError(line, std::string("field '") + field + "' must be a string");
  }
  return j.at(field).get<std::string>();
}

}  // namespace

const Entity* KnowledgeGraph::find_entity(std::string_view label) const {
  const auto it = entity_index_.find(normalize_label(label));
  return it == entity_index_.end() ? nullptr : &entities_[it->second];
}

const Entity& KnowledgeGraph::upsert_entity(Entity entity) {
  const std::string key = normalize_label(entity.label);
  if (key.empty()) throw PreconditionError("entity label is empty");
  if (const auto it = entity_index_.find(key); it != entity_index_.end()) {
    Entity& existing = entities_[it->second];
    if (!existing.concept_name) existing.concept_name = std::move(entity.concept_name);
    if (!existing.external_id) existing.external_id = std::move(entity.external_id);
    return existing;
  }
  entity_index_.emplace(key, entities_.size());
  entities_.push_back(std::move(entity));
  return entities_.back();
}

bool KnowledgeGraph::add_triple(Triple triple) {
  if (normalize_label(triple.subject).empty() || normalize_label(triple.relation).empty() ||
      normalize_label(triple.object).empty()) {
    throw PreconditionError("triple " + format_triple(triple) + " has an empty field");
  }
  const std::string key = fact_key(triple);
  if (triple_index_.contains(key)) return false;
  if (!find_entity(triple.subject)) upsert_entity(Entity{triple.subject, std::nullopt, std::nullopt});
  triple_index_.emplace(key, triples_.size());
  triples_.push_back(std::move(triple));
  return true;
}

bool KnowledgeGraph::contains(const Triple& triple) const {
  return triple_index_.contains(fact_key(triple));
}

bool KnowledgeGraph::has_fact_for(std::string_view subject, std::string_view relation) const {
  const std::string s = normalize_label(subject);
  const std::string r = normalize_label(relation);
  for (const auto& t : triples_) {
    if (normalize_label(t.subject) == s && normalize_label(t.relation) == r) return true;
  }
  return false;
}

LoadResult load_kg(std::string_view source, const Ontology& ontology) {
  LoadResult result{KnowledgeGraph(ontology.ns()), 0};
  const auto lines = text::split_lines(source);
  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const std::size_t line_no = idx + 1;
    const std::string_view line = text::trim(lines[idx]);
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
      throw ParseError(line_no, "record must be an object with a string 'kind'");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "entity") {
      Entity e;
      e.label = required_string(j, "label", line_no);
      if (auto c = optional_string(j, "concept", line_no)) {
        const auto* def = ontology.find_concept(*c);
        if (!def) throw ParseError(line_no, "entity '" + e.label + "' typed with unknown concept '" + *c + "'");
        e.concept_name = def->name;
      }
      e.external_id = optional_string(j, "external_id", line_no);
      if (const auto* existing = result.kg.find_entity(e.label);
          existing && existing->concept_name && e.concept_name &&
          *existing->concept_name != *e.concept_name) {
        throw ParseError(line_no, "entity '" + e.label + "' typed twice with different concepts");
      }
      result.kg.upsert_entity(std::move(e));
    } else if (kind == "triple") {
      Triple t;
      t.subject = required_string(j, "s", line_no);
      t.relation = required_string(j, "r", line_no);
      t.object = required_string(j, "o", line_no);
      if (j.contains("literal")) {
        if (!j.at("literal").is_boolean()) throw ParseError(line_no, "'literal' must be a boolean");
        t.object_is_literal = j.at("literal").get<bool>();
      }
      if (!result.kg.add_triple(std::move(t))) ++result.duplicate_warnings;
    } else {
      throw ParseError(line_no, "unknown record kind '" + kind + "'");
    }
  }
  return result;
}

std::string save_kg(const KnowledgeGraph& kg) {
  std::ostringstream out;
  for (const auto& e : kg.entities()) {
    json j{{"kind", "entity"}, {"label", e.label}};
    j["concept"] = e.concept_name ? json(*e.concept_name) : json(nullptr);
    j["external_id"] = e.external_id ? json(*e.external_id) : json(nullptr);
    out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  for (const auto& t : kg.triples()) {
    json j{{"kind", "triple"}, {"s", t.subject}, {"r", t.relation}, {"o", t.object},
           {"literal", t.object_is_literal}};
    out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  return out.str();
}

std::vector<GapSlot> find_gaps(const KnowledgeGraph& kg, const Ontology& ontology) {
  const auto& relations = ontology.relations();
  std::set<std::pair<std::string, const RelationDef*>> filled;
  for (const auto& t : kg.triples()) {
    if (const auto* r = ontology.find_relation(t.relation)) {
      filled.emplace(normalize_label(t.subject), r);
    }
  }
  std::vector<GapSlot> gaps;
  for (const auto& e : kg.entities()) {
    if (!e.concept_name) continue;
    const std::string key = normalize_label(e.label);
    const std::string concept_key = text::fold(*e.concept_name);
    for (const auto& r : relations) {
      if (text::fold(r.domain) != concept_key) continue;
      if (filled.contains({key, &r})) continue;
      gaps.push_back({e.label, r.name});
    }
  }
  return gaps;
}

MergeResult merge_accepted(const KnowledgeGraph& kg, std::span<const CandidateTriple> candidates,
                           const Ontology& ontology) {
  for (const auto& c : candidates) {
    if (c.status != CurationStatus::accepted && c.status != CurationStatus::edited) {
      throw PreconditionError("candidate " + c.transcript_id + ":" + std::to_string(c.line_number) +
                              " " + format_triple(c.triple) + " has status " +
                              std::string(to_string(c.status)) + ", expected accepted");
    }
  }
  MergeResult result{kg, {}};
  std::set<std::string> suggested;
  for (const auto& c : candidates) {
    Triple t = c.effective();
    const RelationDef* rel = ontology.find_relation(t.relation);
    if (rel) t.relation = rel->name;  // "has symptom" and "hasSymptom" are one predicate
    if (!result.kg.find_entity(t.subject)) {
      Entity e{t.subject, std::nullopt, std::nullopt};
      if (rel) e.concept_name = rel->domain;
      result.kg.upsert_entity(std::move(e));
    }
    if (result.kg.add_triple(t)) {
      ++result.report.added;
    } else {
      ++result.report.skipped_duplicate;
    }
    if (rel && !t.object_is_literal) {
      const auto* obj = result.kg.find_entity(t.object);
      if ((!obj || !obj->concept_name) && suggested.insert(normalize_label(t.object)).second) {
        result.report.range_suggestions.push_back({t.object, rel->range});
      }
    }
  }
  return result;
}

}  // namespace ontoforge
