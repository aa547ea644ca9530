#include "ontoforge/promptgen.hpp"

#include <fstream>
#include <sstream>

#include "ontoforge/error.hpp"
#include "ontoforge/text.hpp"
#include "ontoforge/tripleparse.hpp"

namespace ontoforge {
namespace {

struct BuiltinTemplate {
  Mode mode;
  std::string_view body;
};

// Generated at configure time from templates/*.txt.
constexpr BuiltinTemplate kBuiltinTemplates[] = {
#include "builtin_templates.inc"
};

std::string numbered_list(std::span<const Triple> triples) {
  std::string out;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (i > 0) out += '\n';
    out += std::to_string(i + 1) + ". " + format_triple(triples[i]);
  }
  return out;
}

std::string relation_id_note(const RelationDef& relation) {
  return relation.external_id ? " (" + *relation.external_id + ")" : std::string();
}

}  // namespace

const std::string_view kOutputFormatInstruction =
    "Output format: write each fact on its own line as\n"
    "N. (subject, relation, object)\n"
    "where N is the fact number starting at 1. Do not write anything before or after the list.";

std::size_t estimate_tokens(std::string_view text) noexcept { return (text.size() + 3) / 4; }

std::string_view builtin_template(Mode mode) noexcept {
  for (const auto& t : kBuiltinTemplates) {
    if (t.mode == mode) return t.body;
  }
  return {};
}

TemplateSet::TemplateSet() {
  for (const auto& t : kBuiltinTemplates) bodies_[t.mode] = std::string(t.body);
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
  TemplateSet set;
  for (Mode m : {Mode::completion, Mode::extraction, Mode::construction, Mode::gapfill,
                 Mode::factcheck}) {
    const auto path = dir / (std::string(to_string(m)) + ".txt");
    if (!std::filesystem::exists(path)) continue;
    std::ifstream in(path, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    set.set(m, body.str());
  }
  return set;
}

const std::string& TemplateSet::get(Mode mode) const { return bodies_.at(mode); }

void TemplateSet::set(Mode mode, std::string body) {
  if (body.find("{{format}}") == std::string::npos) {
    throw PreconditionError("template for " + std::string(to_string(mode)) +
                            " lacks the {{format}} placeholder");
  }
  bodies_[mode] = std::move(body);
}

std::string TemplateSet::render(std::string_view body,
                                const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto open = body.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(body.substr(pos));
      break;
    }
    const auto close = body.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw PreconditionError("unterminated placeholder in template");
    }
    out.append(body.substr(pos, open - pos));
    const std::string name(text::trim(body.substr(open + 2, close - open - 2)));
    const auto it = values.find(name);
    if (it == values.end()) throw PreconditionError("template references unknown slot '" + name + "'");
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

std::string render_schema(const Ontology& ontology) {
  std::string out = "Concepts: ";
  for (std::size_t i = 0; i < ontology.concepts().size(); ++i) {
    if (i > 0) out += ", ";
    out += ontology.concepts()[i].name;
  }
  out += "\nRelations:";
  for (const auto& r : ontology.relations()) {
    out += "\n- " + r.name + " (domain: " + r.domain + ", range: " + r.range + ")";
  }
  return out;
}

std::vector<Ontology> chunk_ontology(const Ontology& ontology, std::size_t budget) {
  const auto& relations = ontology.relations();
  const auto make_chunk = [&](std::size_t begin, std::size_t end) {
    std::vector<RelationDef> rels(relations.begin() + static_cast<std::ptrdiff_t>(begin),
                                  relations.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<ConceptDef> concepts;
    for (const auto& c : ontology.concepts()) {
      const std::string key = text::fold(c.name);
      for (const auto& r : rels) {
        if (text::fold(r.domain) == key || text::fold(r.range) == key) {
          concepts.push_back(c);
          break;
        }
      }
    }
    return Ontology(std::move(concepts), std::move(rels), ontology.ns());
  };

  std::vector<Ontology> chunks;
  std::size_t begin = 0;
  while (begin < relations.size()) {
    Ontology best = make_chunk(begin, begin + 1);
    if (estimate_tokens(render_schema(best)) > budget) {
      throw PreconditionError("oversize ontology: relation '" + relations[begin].name +
                              "' alone exceeds the token budget of " + std::to_string(budget));
    }
    std::size_t end = begin + 1;
    while (end < relations.size()) {
      Ontology next = make_chunk(begin, end + 1);
      if (estimate_tokens(render_schema(next)) > budget) break;
      best = std::move(next);
      ++end;
    }
    chunks.push_back(std::move(best));
    begin = end;
  }
  return chunks;
}

bool is_grounded(const Triple& demonstrator, std::string_view source_text,
                 const RelationDef& relation) {
  const std::string haystack = text::fold(source_text);
  const auto occurs = [&](std::string_view field) {
    const std::string needle = normalize_label(field);
    return !needle.empty() && haystack.find(needle) != std::string::npos;
  };
  const std::string rel = normalize_label(demonstrator.relation);
  const bool relation_ok = occurs(demonstrator.relation) || rel == normalize_label(relation.name) ||
                           rel == normalize_label(relation.phrase());
  return occurs(demonstrator.subject) && occurs(demonstrator.object) && relation_ok;
}

PromptRequest PromptGenerator::build(Mode mode, std::map<std::string, std::string> slots,
                                     std::vector<Triple> demonstrators) const {
  auto values = slots;
  values["format"] = std::string(kOutputFormatInstruction);
  PromptRequest req;
  req.mode = mode;
  req.prompt_text = TemplateSet::render(templates_.get(mode), values);
  req.slots = std::move(slots);
  req.demonstrators = std::move(demonstrators);
  req.token_estimate = estimate_tokens(req.prompt_text);
  return req;
}

PromptRequest PromptGenerator::completion(std::string_view subject, const RelationDef& relation,
                                          std::size_t max_triples) const {
  if (max_triples == 0) throw PreconditionError("max_triples must be positive");
  if (normalize_label(subject).empty()) throw PreconditionError("completion subject is empty");
  return build(Mode::completion, {{"subject", std::string(text::trim(subject))},
                                  {"relation", relation.phrase()},
                                  {"relation_id", relation_id_note(relation)},
                                  {"max_triples", std::to_string(max_triples)}});
}

PromptRequest PromptGenerator::extraction(std::string_view source_text, std::string_view source_id,
                                          std::string_view entity, const RelationDef& relation,
                                          std::span<const Triple> demonstrators) const {
  if (text::trim(source_text).empty()) throw PreconditionError("extraction source text is empty");
  if (demonstrators.empty()) {
    throw PreconditionError("extraction needs at least one demonstrator triple from the same text");
  }
  for (const auto& d : demonstrators) {
    if (!is_grounded(d, source_text, relation)) {
      throw PreconditionError("demonstrator " + format_triple(d) +
                              " is not grounded in the source text '" + std::string(source_id) + "'");
    }
  }
  return build(Mode::extraction,
               {{"entity", std::string(text::trim(entity))},
                {"relation", relation.phrase()},
                {"source_text", std::string(text::trim(source_text))},
                {"source_id", std::string(source_id)},
                {"demonstrators", numbered_list(demonstrators)}},
               std::vector<Triple>(demonstrators.begin(), demonstrators.end()));
}

std::vector<PromptRequest> PromptGenerator::construction(const Ontology& ontology,
                                                         std::string_view topic,
                                                         std::size_t budget) const {
  if (ontology.relations().empty()) {
    throw PreconditionError("construction needs an ontology with at least one relation");
  }
  const std::string topic_text(text::trim(topic));
  const std::string& body = templates_.get(Mode::construction);
  const std::size_t overhead = estimate_tokens(TemplateSet::render(
      body, {{"topic", topic_text}, {"schema", ""}, {"format", std::string(kOutputFormatInstruction)}}));
  if (overhead >= budget) {
    throw PreconditionError("oversize ontology: the construction template alone needs " +
                            std::to_string(overhead) + " tokens of a " + std::to_string(budget) +
                            " token budget");
  }
  // ceil((a + b) / 4) <= ceil(a / 4) + ceil(b / 4), so chunks that fit the
  // remainder keep the whole prompt within budget.
  const auto chunks = chunk_ontology(ontology, budget - overhead);
  std::vector<PromptRequest> prompts;
  prompts.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    std::string concepts;
    for (const auto& c : chunks[i].concepts()) {
      if (!concepts.empty()) concepts += ", ";
      concepts += c.name;
    }
    prompts.push_back(build(Mode::construction,
                            {{"topic", topic_text},
                             {"schema", render_schema(chunks[i])},
                             {"chunk", std::to_string(i + 1) + "/" + std::to_string(chunks.size())},
                             {"concepts", concepts}}));
  }
  return prompts;
}

PromptRequest PromptGenerator::gapfill(const GapSlot& slot, const Ontology& ontology,
                                       std::size_t max_triples) const {
  if (max_triples == 0) throw PreconditionError("max_triples must be positive");
  const RelationDef* relation = ontology.find_relation(slot.relation);
  if (!relation) {
    throw PreconditionError("gap slot relation '" + slot.relation + "' is not in the ontology");
  }
  if (normalize_label(slot.entity).empty()) throw PreconditionError("gap slot entity is empty");
  return build(Mode::gapfill, {{"entity", slot.entity},
                               {"relation", relation->phrase()},
                               {"relation_id", relation_id_note(*relation)},
                               {"range", relation->range},
                               {"max_triples", std::to_string(max_triples)}});
}

PromptRequest PromptGenerator::factcheck(std::span<const Triple> triples) const {
  if (triples.empty()) throw PreconditionError("fact-check needs at least one triple");
  return build(Mode::factcheck, {{"triples", numbered_list(triples)},
                                 {"count", std::to_string(triples.size())}});
}

}  // namespace ontoforge
