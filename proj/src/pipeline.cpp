#include "ontoforge/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

#include "ontoforge/error.hpp"
#include "ontoforge/fsio.hpp"
#include "ontoforge/rdfout.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge {
namespace {

using nlohmann::json;

Provenance provenance_for(Mode mode) {
  switch (mode) {
    case Mode::extraction:
      return Provenance::provided_text;
    case Mode::factcheck:
      return Provenance::existing_kg;
    default:
      return Provenance::model_pretrained;
  }
}

std::string derive_session_id(Mode mode, std::span<const PromptRequest> prompts) {
  std::string material(to_string(mode));
  for (const auto& p : prompts) {
    material += '\0';
    material += p.prompt_text;
  }
  return std::string(to_string(mode)) + "-" + text::sha256_hex(material).substr(0, 12);
}

const RelationDef& require_relation(const Ontology& ontology, const std::string& name) {
  const RelationDef* rel = ontology.find_relation(name);
  if (!rel) throw PreconditionError("relation '" + name + "' is not declared in the ontology");
  return *rel;
}

}  // namespace

Ontology load_ontology_file(const std::filesystem::path& path) {
  return parse_ontology(fsio::read_file(path));
}

KnowledgeGraph load_kg_file(const std::filesystem::path& path, const Ontology& ontology) {
  return load_kg(fsio::read_file(path), ontology).kg;
}

std::vector<std::string> split_corpus(std::string_view corpus) {
  std::vector<std::string> docs;
  std::string current;
  const auto flush = [&] {
    const auto trimmed = text::trim(current);
    if (!trimmed.empty()) docs.emplace_back(trimmed);
    current.clear();
  };
  for (const auto line : text::split_lines(corpus)) {
    if (text::trim(line) == "---") {
      flush();
    } else {
      current.append(line);
      current.push_back('\n');
    }
  }
  flush();
  return docs;
}

Pipeline::Pipeline(ModelClient& client, PromptGenerator generator, PipelineOptions options)
    : client_(client), generator_(std::move(generator)), options_(std::move(options)) {}

SessionState Pipeline::execute(SessionState session, std::span<const PromptRequest> prompts,
                               const Ontology& ontology, const KnowledgeGraph* kg) {
  session.session_id = options_.session_id ? *options_.session_id : derive_session_id(session.mode, prompts);
  const auto persist = [&] {
    if (options_.persist) save_session(session, options_.session_root);
  };

  BatchResult batch = client_.complete_all(prompts);
  std::vector<ParseReport> reports(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (!batch.transcripts[i]) continue;
    const ModelTranscript& t = *batch.transcripts[i];
    reports[i] = parse_triples(t.response_text, t.request_id, provenance_for(session.mode));
    session.parses.push_back({t.request_id, reports[i].format_detected, reports[i].saw_none_sentinel,
                              reports[i].skipped_lines});
    for (auto& c : reports[i].triples) session.candidates.push_back(c);
    session.transcripts.push_back(t);
  }
  if (batch.first_error) {
    try {
      std::rethrow_exception(batch.first_error);
    } catch (const std::exception& e) {
      session.error = e.what();
    }
    persist();
    std::rethrow_exception(batch.first_error);
  }

  ValidationReport report;
  report.duplicate_threshold = options_.duplicate_threshold;
  Typing typing = kg ? typing_from_kg(*kg) : Typing{};
  if (session.mode == Mode::construction) {
    typing = infer_subject_typing(session.candidates, ontology, std::move(typing));
  }
  report.violations = check_conformance(session.candidates, ontology, typing);
  report.duplicate_clusters = find_duplicates(session.candidates, options_.duplicate_threshold);

  if (session.mode == Mode::extraction) {
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      const auto& source = session.sources.at(prompts[i].slots.at("source_id"));
      for (auto& w : negation_warnings(reports[i].triples, source)) {
        report.negation_warnings.push_back(std::move(w));
      }
    }
  }
  if (session.mode == Mode::factcheck && !reports.empty()) {
    try {
      report.verdicts = fact_check(kg->triples(), reports.front());
    } catch (const Error& e) {
      session.error = e.what();
      persist();
      throw;
    }
  }
  session.report = std::move(report);
  persist();
  return session;
}

SessionState Pipeline::run_construct(const std::filesystem::path& ontology_path, std::string topic) {
  const Ontology ontology = load_ontology_file(ontology_path);
  if (text::trim(topic).empty()) topic = ontology_path.stem().string();
  SessionState s;
  s.mode = Mode::construction;
  s.ontology_path = ontology_path.string();
  s.topic = topic;
  const auto prompts = generator_.construction(ontology, topic, options_.budget);
  return execute(std::move(s), prompts, ontology, nullptr);
}

SessionState Pipeline::run_completion(const std::filesystem::path& ontology_path, const std::string& subject,
                                      const std::string& relation, std::optional<std::size_t> max_triples) {
  const Ontology ontology = load_ontology_file(ontology_path);
  SessionState s;
  s.mode = Mode::completion;
  s.ontology_path = ontology_path.string();
  s.topic = subject;
  const std::vector<PromptRequest> prompts{generator_.completion(
      subject, require_relation(ontology, relation), max_triples.value_or(options_.max_triples))};
  return execute(std::move(s), prompts, ontology, nullptr);
}

SessionState Pipeline::run_complete(const std::filesystem::path& kg_path,
                                    const std::filesystem::path& ontology_path, std::size_t max_slots) {
  const Ontology ontology = load_ontology_file(ontology_path);
  const KnowledgeGraph kg = load_kg_file(kg_path, ontology);
  SessionState s;
  s.mode = Mode::gapfill;
  s.ontology_path = ontology_path.string();
  s.kg_path = kg_path.string();
  std::vector<PromptRequest> prompts;
  for (const auto& slot : find_gaps(kg, ontology)) {
    if (prompts.size() >= max_slots) break;
    prompts.push_back(generator_.gapfill(slot, ontology, options_.max_triples));
  }
  return execute(std::move(s), prompts, ontology, &kg);
}

SessionState Pipeline::run_extract(const std::filesystem::path& corpus_path,
                                   const std::filesystem::path& ontology_path, const std::string& entity,
                                   const std::string& relation, std::span<const Triple> demonstrators,
                                   std::optional<std::size_t> gold_count) {
  const Ontology ontology = load_ontology_file(ontology_path);
  const RelationDef& rel = require_relation(ontology, relation);
  const auto docs = split_corpus(fsio::read_file(corpus_path));
  if (docs.empty()) throw PreconditionError("corpus '" + corpus_path.string() + "' has no documents");
  SessionState s;
  s.mode = Mode::extraction;
  s.ontology_path = ontology_path.string();
  s.corpus_path = corpus_path.string();
  s.gold_count = gold_count;
  std::vector<PromptRequest> prompts;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const std::string id = corpus_path.stem().string() + "#" + std::to_string(i + 1);
    s.sources.emplace(id, docs[i]);
    prompts.push_back(generator_.extraction(docs[i], id, entity, rel, demonstrators));
  }
  return execute(std::move(s), prompts, ontology, nullptr);
}

SessionState Pipeline::run_factcheck(const std::filesystem::path& kg_path,
                                     const std::filesystem::path& ontology_path) {
  const Ontology ontology = load_ontology_file(ontology_path);
  const KnowledgeGraph kg = load_kg_file(kg_path, ontology);
  if (kg.triples().empty()) throw PreconditionError("fact-check needs a KG with at least one triple");
  SessionState s;
  s.mode = Mode::factcheck;
  s.ontology_path = ontology_path.string();
  s.kg_path = kg_path.string();
  const std::vector<PromptRequest> prompts{generator_.factcheck(kg.triples())};
  return execute(std::move(s), prompts, ontology, &kg);
}

ExportResult export_session(const SessionState& session, std::span<const Decision> decisions,
                            const ExportOptions& options) {
  const auto candidates = replay_decisions(session.candidates, decisions);
  ExportResult result;
  result.metrics = compute_metrics(session.mode, candidates, session.gold_count);

  const auto ontology_path = options.ontology_path
                                 ? std::optional<std::filesystem::path>(options.ontology_path)
                                 : (session.ontology_path ? std::optional<std::filesystem::path>(*session.ontology_path)
                                                          : std::nullopt);
  if (!ontology_path) throw PreconditionError("export needs an ontology path");
  const Ontology ontology = load_ontology_file(*ontology_path);

  std::optional<std::filesystem::path> kg_path = options.kg_path;
  if (!kg_path && session.kg_path) kg_path = *session.kg_path;
  KnowledgeGraph base = kg_path ? load_kg_file(*kg_path, ontology) : KnowledgeGraph(ontology.ns());

  std::vector<CandidateTriple> accepted;
  for (const auto& c : candidates) {
    if (c.status == CurationStatus::accepted || c.status == CurationStatus::edited) accepted.push_back(c);
  }

  if (session.mode == Mode::factcheck) {
    // Accepting a flagged line confirms the KG fact is wrong, so it is dropped.
    KnowledgeGraph kept(base.ns());
    for (const auto& e : base.entities()) kept.upsert_entity(e);
    for (const auto& t : base.triples()) {
      const bool refuted = std::any_of(accepted.begin(), accepted.end(),
                                       [&](const CandidateTriple& c) { return facts_match(t, c.effective()); });
      if (!refuted) kept.add_triple(t);
    }
    result.kg = std::move(kept);
  } else {
    // Type new subjects by their majority domain rather than by whichever
    // relation happens to come first, so one off-domain fact does not
    // mistype an entity.
    const Typing typing = infer_subject_typing(accepted, ontology, typing_from_kg(base));
    for (const auto& c : accepted) {
      const std::string& subject = c.effective().subject;
      if (base.find_entity(subject)) continue;
      const auto it = typing.find(normalize_label(subject));
      if (it != typing.end()) base.upsert_entity({subject, it->second, std::nullopt});
    }
    auto merged = merge_accepted(base, accepted, ontology);
    result.kg = std::move(merged.kg);
    result.merge = std::move(merged.report);
  }

  const IriPolicy policy{result.kg.ns(), 2};
  result.kgl_path = options.out_dir / (options.stem + ".kgl");
  result.nt_path = options.out_dir / (options.stem + ".nt");
  result.ttl_path = options.out_dir / (options.stem + ".ttl");
  result.metrics_path = options.out_dir / "metrics.json";
  fsio::write_file_atomic(result.kgl_path, save_kg(result.kg));
  fsio::write_file_atomic(result.nt_path, emit_ntriples(result.kg, policy));
  fsio::write_file_atomic(result.ttl_path, emit_turtle(result.kg, policy));

  json suggestions = json::array();
  for (const auto& s : result.merge.range_suggestions) {
    suggestions.push_back({{"object", s.object}, {"concept", s.concept_name}});
  }
  json out = to_json(result.metrics);
  out["session_id"] = session.session_id;
  out["merge"] = {{"added", result.merge.added},
                  {"skipped_duplicate", result.merge.skipped_duplicate},
                  {"range_suggestions", suggestions}};
  out["kg_triples"] = result.kg.triples().size();
  fsio::write_file_atomic(result.metrics_path, out.dump(2) + "\n");
  return result;
}

}  // namespace ontoforge
