#include "rdf_oracle.hpp"

#include <cctype>
#include <cstdio>
#include <map>

namespace testing_support {

using namespace ontoforge;

std::string oracle_slug(const std::string& label) {
  const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  std::size_t b = 0, e = label.size();
  while (b < e && is_ws(label[b])) ++b;
  while (e > b && is_ws(label[e - 1])) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    const unsigned char c = static_cast<unsigned char>(label[i]);
    if (is_ws(static_cast<char>(c))) {
      if (!is_ws(label[i - 1])) out += '_';
    } else if (std::isalnum(c) && c < 0x80) {
      out += static_cast<char>(c);
    } else if (c == '-' || c == '.' || c == '_' || c == '~') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

std::set<nt::Triple> expected_rdf(const KnowledgeGraph& kg, const std::string& ns) {
  std::map<std::string, std::string> minted;
  std::set<std::string> used;
  const auto mint = [&](const std::string& label) {
    if (auto it = minted.find(label); it != minted.end()) return it->second;
    std::string iri = ns + oracle_slug(label);
    for (int n = 2; used.count(iri); ++n) iri = ns + oracle_slug(label) + "_" + std::to_string(n);
    used.insert(iri);
    minted[label] = iri;
    return iri;
  };
  const auto iri = [](std::string v) { return nt::Term{nt::Term::iri, std::move(v), ""}; };

  for (const auto& e : kg.entities()) mint(e.label);
  for (const auto& e : kg.entities()) {
    if (e.concept_name) mint(*e.concept_name);
  }
  std::set<nt::Triple> out;
  for (const auto& e : kg.entities()) {
    if (e.concept_name) {
      out.insert({iri(mint(e.label)), iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"), iri(mint(*e.concept_name))});
    }
  }
  std::map<std::string, std::string> first_spelling;
  const auto resolve = [&](const std::string& label) {
    if (const auto* e = kg.find_entity(label)) return e->label;
    return first_spelling.emplace(normalize_label(label), label).first->second;
  };
  for (const auto& t : kg.triples()) {
    nt::Triple x;
    x.s = iri(mint(resolve(t.subject)));
    x.p = iri(mint(t.relation));
    x.o = t.object_is_literal ? nt::Term{nt::Term::literal, t.object, ""}
                              : iri(mint(resolve(t.object)));
    out.insert(x);
  }
  return out;
}

}  // namespace testing_support
