#include "ontoforge/ontology.hpp"

#include <set>
#include <sstream>

#include "ontoforge/error.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge {
namespace {

bool is_word_char(char c) {
  return c != ' ' && c != '\t';
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !is_word_char(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && is_word_char(s[j])) ++j;
    if (j > i) words.push_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  // A '#' inside the namespace IRI is not a comment start.
  if (hash != std::string_view::npos && (hash == 0 || line[hash - 1] == ' ' || line[hash - 1] == '\t')) {
    return line.substr(0, hash);
  }
  return line;
}

struct PendingRelation {
  RelationDef def;
  std::size_t line;
};

}  // namespace

std::string RelationDef::phrase() const { return text::relation_phrase(name); }

bool is_valid_namespace(std::string_view iri) noexcept {
  if (iri.empty() || (iri.back() != '/' && iri.back() != '#')) return false;
  const auto colon = iri.find(':');
  if (colon == std::string_view::npos || colon == 0) return false;
  const auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (!is_alpha(iri[0])) return false;
  for (std::size_t i = 1; i < colon; ++i) {
    const char c = iri[i];
    if (!is_alpha(c) && !(c >= '0' && c <= '9') && c != '+' && c != '-' && c != '.') return false;
  }
  if (colon + 1 >= iri.size()) return false;
  for (char c : iri) {
    const auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
        c == '^' || c == '`' || c == '\\') {
      return false;
    }
  }
  return true;
}

Ontology::Ontology(std::vector<ConceptDef> concepts, std::vector<RelationDef> relations,
                   std::string ns)
    : concepts_(std::move(concepts)), relations_(std::move(relations)), namespace_(std::move(ns)) {
  if (!is_valid_namespace(namespace_)) {
    throw PreconditionError("invalid ontology namespace '" + namespace_ + "'");
  }
  std::set<std::string> seen;
  for (const auto& c : concepts_) {
    if (text::fold(c.name).empty()) throw PreconditionError("empty concept name");
    if (c.name.find_first_of("\r\n") != std::string::npos) {
      throw PreconditionError("concept name contains a newline");
    }
    if (!seen.insert(text::fold(c.name)).second) {
      throw PreconditionError("duplicate concept '" + c.name + "'");
    }
  }
  seen.clear();
  for (const auto& r : relations_) {
    if (text::fold(r.name).empty()) throw PreconditionError("empty relation name");
    if (!seen.insert(text::fold(r.name)).second) {
      throw PreconditionError("duplicate relation '" + r.name + "'");
    }
    if (!find_concept(r.domain)) {
      throw PreconditionError("relation '" + r.name + "' has undeclared domain '" + r.domain + "'");
    }
    if (!find_concept(r.range)) {
      throw PreconditionError("relation '" + r.name + "' has undeclared range '" + r.range + "'");
    }
  }
}

const ConceptDef* Ontology::find_concept(std::string_view name) const {
  const std::string key = text::fold(name);
  for (const auto& c : concepts_) {
    if (text::fold(c.name) == key) return &c;
  }
  return nullptr;
}

const RelationDef* Ontology::find_relation(std::string_view name) const {
  const std::string key = text::fold(name);
  if (key.empty()) return nullptr;
  for (const auto& r : relations_) {
    if (text::fold(r.name) == key) return &r;
  }
  for (const auto& r : relations_) {
    if (r.phrase() == key) return &r;
  }
  return nullptr;
}

Ontology parse_ontology(std::string_view source) {
  std::vector<ConceptDef> concepts;
  std::vector<PendingRelation> relations;
  std::string ns(kDefaultNamespace);
  std::set<std::string> concept_keys;
  std::set<std::string> relation_keys;

  const auto lines = text::split_lines(source);
  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const std::size_t line_no = idx + 1;
    const std::string_view line = text::trim(strip_comment(lines[idx]));
    if (line.empty()) continue;
    const auto words = split_words(line);
    const std::string_view keyword = words.front();

    if (keyword == "namespace") {
      if (words.size() != 2) throw ParseError(line_no, "expected 'namespace <IRI>'");
      if (!is_valid_namespace(words[1])) {
        throw ParseError(line_no, "namespace must be an absolute IRI ending in '/' or '#'");
      }
      ns = std::string(words[1]);
    } else if (keyword == "concept") {
      if (words.size() < 2) throw ParseError(line_no, "expected 'concept <Name>'");
      ConceptDef def{std::string(words[1]), std::nullopt};
      if (words.size() > 2) {
        const std::string_view rest = text::trim(line.substr(words[2].data() - line.data()));
        if (rest.substr(0, 12) != "description=") {
          throw ParseError(line_no, "unexpected token '" + std::string(words[2]) + "' after concept name");
        }
        def.description = std::string(text::trim(rest.substr(12)));
      }
      if (!concept_keys.insert(text::fold(def.name)).second) {
        throw ParseError(line_no, "duplicate concept '" + def.name + "'");
      }
      concepts.push_back(std::move(def));
    } else if (keyword == "relation") {
      if (words.size() < 2) throw ParseError(line_no, "expected 'relation <Name> domain=<C> range=<C>'");
      RelationDef def;
      def.name = std::string(words[1]);
      bool have_domain = false, have_range = false;
      for (std::size_t w = 2; w < words.size(); ++w) {
        const auto eq = words[w].find('=');
        if (eq == std::string_view::npos || eq + 1 == words[w].size()) {
          throw ParseError(line_no, "expected key=value, got '" + std::string(words[w]) + "'");
        }
        const std::string_view key = words[w].substr(0, eq);
        const std::string value(words[w].substr(eq + 1));
        if (key == "domain" && !have_domain) {
          def.domain = value;
          have_domain = true;
        } else if (key == "range" && !have_range) {
          def.range = value;
          have_range = true;
        } else if (key == "id" && !def.external_id) {
          def.external_id = value;
        } else {
          throw ParseError(line_no, "unexpected or repeated key '" + std::string(key) + "'");
        }
      }
      if (!have_domain || !have_range) {
        throw ParseError(line_no, "relation '" + def.name + "' needs both domain= and range=");
      }
      if (!relation_keys.insert(text::fold(def.name)).second) {
        throw ParseError(line_no, "duplicate relation '" + def.name + "'");
      }
      relations.push_back({std::move(def), line_no});
    } else {
      throw ParseError(line_no, "unknown directive '" + std::string(keyword) + "'");
    }
  }

  // Forward references are allowed, so dangling checks run after the whole file is read.
  for (const auto& pending : relations) {
    for (const std::string* ref : {&pending.def.domain, &pending.def.range}) {
      if (!concept_keys.contains(text::fold(*ref))) {
        throw ParseError(pending.line, "relation '" + pending.def.name +
                                           "' references undeclared concept '" + *ref + "'");
      }
    }
  }

  std::vector<RelationDef> defs;
  defs.reserve(relations.size());
  for (auto& pending : relations) defs.push_back(std::move(pending.def));
  return Ontology(std::move(concepts), std::move(defs), std::move(ns));
}

std::string serialize_ontology(const Ontology& ontology) {
  std::ostringstream out;
  out << "namespace " << ontology.ns() << '\n';
  for (const auto& c : ontology.concepts()) {
    out << "concept " << c.name;
    if (c.description) out << " description=" << *c.description;
    out << '\n';
  }
  for (const auto& r : ontology.relations()) {
    out << "relation " << r.name << " domain=" << r.domain << " range=" << r.range;
    if (r.external_id) out << " id=" << *r.external_id;
    out << '\n';
  }
  return out.str();
}

std::optional<ConceptDef> concept_of(const Ontology& ontology, std::string_view name) {
  if (const auto* c = ontology.find_concept(name)) return *c;
  return std::nullopt;
}

}  // namespace ontoforge
