#include "ontoforge/rdfout.hpp"

#include <algorithm>
#include <set>

#include "ontoforge/error.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge {
namespace {

bool is_unreserved(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
         c == '.' || c == '_' || c == '~';
}

bool is_safe_local(std::string_view local) {
  if (local.empty()) return false;
  const auto ok = [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  };
  if (!ok(local.front())) return false;
  return std::all_of(local.begin(), local.end(), [&](char c) { return ok(c) || c == '-'; });
}

std::string iri_term(std::string_view iri) { return "<" + std::string(iri) + ">"; }

}  // namespace

std::string slugify(std::string_view label) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  const std::string_view trimmed = text::trim(label);
  std::string out;
  bool in_space = false;
  for (char c : trimmed) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      if (!in_space) out.push_back('_');
      in_space = true;
      continue;
    }
    in_space = false;
    if (is_unreserved(c)) {
      out.push_back(c);
    } else {
      const auto u = static_cast<unsigned char>(c);
      out.push_back('%');
      out.push_back(kHex[u >> 4]);
      out.push_back(kHex[u & 0x0F]);
    }
  }
  return out;
}

std::string mint_iri(std::string_view label, const IriPolicy& policy,
                     std::map<std::string, std::string>& minted) {
  if (text::trim(label).empty()) throw PreconditionError("cannot mint an IRI for an empty label");
  const std::string key(label);
  if (const auto it = minted.find(key); it != minted.end()) return it->second;

  std::set<std::string> taken;
  for (const auto& [l, iri] : minted) taken.insert(iri);
  const std::string base = policy.ns + slugify(label);
  std::string iri = base;
  for (int n = policy.collision_suffix_start; taken.contains(iri); ++n) {
    iri = base + "_" + std::to_string(n);
  }
  minted.emplace(key, iri);
  return iri;
}

std::string escape_literal(std::string_view value) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  const std::string clean = text::sanitize_utf8(value);
  std::string out;
  out.reserve(clean.size());
  for (char c : clean) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7F) {
          const auto u = static_cast<unsigned char>(c);
          out += "\\u00";
          out.push_back(kHex[u >> 4]);
          out.push_back(kHex[u & 0x0F]);
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

std::vector<Statement> rdf_statements(const KnowledgeGraph& kg, const IriPolicy& policy) {
  std::map<std::string, std::string> minted;
  const auto mint = [&](std::string_view label) { return mint_iri(label, policy, minted); };

  for (const auto& e : kg.entities()) mint(e.label);
  for (const auto& e : kg.entities()) {
    if (e.concept_name) mint(*e.concept_name);
  }

  // Objects that are not entities are canonicalized to their first-seen spelling.
  std::map<std::string, std::string> object_labels;
  const auto canonical = [&](const std::string& label) -> const std::string& {
    if (const auto* e = kg.find_entity(label)) return e->label;
    return object_labels.emplace(normalize_label(label), label).first->second;
  };

  std::vector<Statement> out;
  for (const auto& e : kg.entities()) {
    if (e.concept_name) {
      out.push_back({mint(e.label), std::string(kRdfType), iri_term(mint(*e.concept_name))});
    }
  }
  for (const auto& t : kg.triples()) {
    Statement s;
    s.subject = mint(canonical(t.subject));
    s.predicate = mint(t.relation);
    s.object = t.object_is_literal ? "\"" + escape_literal(t.object) + "\""
                                   : iri_term(mint(canonical(t.object)));
    out.push_back(std::move(s));
  }
  return out;
}

std::string emit_ntriples(const KnowledgeGraph& kg, const IriPolicy& policy) {
  std::vector<std::string> lines;
  for (const auto& s : rdf_statements(kg, policy)) {
    lines.push_back(iri_term(s.subject) + " " + iri_term(s.predicate) + " " + s.object + " .");
  }
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string emit_turtle(const KnowledgeGraph& kg, const IriPolicy& policy) {
  const auto term = [&](std::string_view iri) {
    if (iri == kRdfType) return std::string("rdf:type");
    if (iri.starts_with(policy.ns) && is_safe_local(iri.substr(policy.ns.size()))) {
      return "kg:" + std::string(iri.substr(policy.ns.size()));
    }
    return iri_term(iri);
  };
  const auto object_term = [&](const std::string& obj) {
    if (obj.front() == '<') return term(std::string_view(obj).substr(1, obj.size() - 2));
    return obj;
  };

  std::map<std::string, std::map<std::string, std::set<std::string>>> grouped;
  for (const auto& s : rdf_statements(kg, policy)) grouped[s.subject][s.predicate].insert(s.object);

  std::string out = "@prefix kg: <" + policy.ns + "> .\n@prefix rdf: <" + std::string(kRdfNamespace) + "> .\n";
  for (const auto& [subject, predicates] : grouped) {
    out += "\n" + term(subject);
    bool first_pred = true;
    for (const auto& [predicate, objects] : predicates) {
      out += first_pred ? " " : " ;\n    ";
      first_pred = false;
      out += term(predicate) + " ";
      bool first_obj = true;
      for (const auto& o : objects) {
        if (!first_obj) out += " , ";
        first_obj = false;
        out += object_term(o);
      }
    }
    out += " .\n";
  }
  return out;
}

}  // namespace ontoforge
