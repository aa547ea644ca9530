// ontoforge command-line interface.
#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <limits>
#include <thread>

#include "ontoforge/config.hpp"
#include "ontoforge/fsio.hpp"
#include "ontoforge/pipeline.hpp"
#include "ontoforge/review_service.hpp"
#include "ontoforge/text.hpp"

namespace fs = std::filesystem;
using namespace ontoforge;

namespace {

std::atomic<bool> g_interrupted{false};

struct CommonFlags {
  std::optional<fs::path> config;
  std::optional<std::string> backend;
  std::optional<fs::path> fixtures;
  std::optional<fs::path> script;
  std::optional<fs::path> templates;
  std::optional<std::size_t> budget;
  std::optional<double> threshold;
  std::optional<std::size_t> max_triples;
  fs::path sessions = "sessions";
  std::optional<std::string> session_id;
};

void add_common(CLI::App& cmd, CommonFlags& f) {
  cmd.add_option("--config", f.config, "INI configuration file");
  cmd.add_option("--backend", f.backend, "http | replay | scripted")
      ->check(CLI::IsMember({"http", "replay", "scripted"}));
  cmd.add_option("--fixtures", f.fixtures, "replay fixture directory");
  cmd.add_option("--script", f.script, "scripted backend responses (JSON array of strings)");
  cmd.add_option("--templates", f.templates, "directory of <mode>.txt prompt templates");
  cmd.add_option("--budget", f.budget, "prompt token budget");
  cmd.add_option("--threshold", f.threshold, "duplicate similarity threshold")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--max-triples", f.max_triples, "facts requested per prompt");
  cmd.add_option("--sessions", f.sessions, "session root directory")->capture_default_str();
  cmd.add_option("--session-id", f.session_id, "override the derived session id");
}

AppConfig resolve(const CommonFlags& f) {
  AppConfig cfg = f.config ? load_config(*f.config) : AppConfig{};
  if (f.backend) cfg.backend.kind = *parse_backend_kind(*f.backend);
  if (f.fixtures) cfg.backend.fixture_dir = *f.fixtures;
  if (f.script) cfg.backend.script_path = *f.script;
  if (f.templates) cfg.templates_dir = *f.templates;
  if (f.budget) cfg.budget = *f.budget;
  if (f.threshold) cfg.threshold = *f.threshold;
  if (f.max_triples) cfg.max_triples = *f.max_triples;
  cfg.backend.validate();
  return cfg;
}

struct Runner {
  AppConfig cfg;
  ModelClient client;
  Pipeline pipeline;

  Runner(const CommonFlags& f, AppConfig c)
      : cfg(std::move(c)),
        client(cfg.backend),
        pipeline(client,
                 PromptGenerator(cfg.templates_dir ? TemplateSet::from_directory(*cfg.templates_dir) : TemplateSet{}),
                 PipelineOptions{f.sessions, true, cfg.budget, cfg.threshold, cfg.max_triples, f.session_id}) {}
};

void print_session(const SessionState& s, const fs::path& root) {
  std::cout << "session " << s.session_id << " (" << to_string(s.mode) << ")\n";
  std::cout << "  directory    " << (root / s.session_id).string() << "\n";
  std::cout << "  prompts      " << s.transcripts.size() << "\n";
  std::cout << "  candidates   " << s.candidates.size() << "\n";
  std::size_t skipped = 0;
  for (const auto& p : s.parses) skipped += p.skipped_lines.size();
  std::cout << "  skipped      " << skipped << "\n";
  if (s.report) {
    std::cout << "  violations   " << s.report->violations.size() << "\n";
    std::cout << "  clusters     " << s.report->duplicate_clusters.size() << "\n";
    if (s.mode == Mode::extraction) std::cout << "  negation     " << s.report->negation_warnings.size() << "\n";
    for (const auto& v : s.report->verdicts) {
      std::cout << "  " << to_string(v.verdict) << "  " << format_triple(v.kg_triple);
      if (v.evidence) std::cout << "  <- " << *v.evidence;
      std::cout << "\n";
    }
  }
}

Triple parse_demo(const std::string& spec) {
  const auto a = spec.find('|');
  const auto b = a == std::string::npos ? a : spec.find('|', a + 1);
  if (b == std::string::npos) throw PreconditionError("--demo expects subject|relation|object, got '" + spec + "'");
  const std::string_view v = spec;
  Triple t{std::string(text::trim(v.substr(0, a))), std::string(text::trim(v.substr(a + 1, b - a - 1))),
           std::string(text::trim(v.substr(b + 1))), false};
  if (t.subject.empty() || t.relation.empty() || t.object.empty()) {
    throw PreconditionError("--demo has an empty field: '" + spec + "'");
  }
  return t;
}

std::string fmt_ratio(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.push_back('0');
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ontology-driven knowledge graph construction with a language model in the loop"};
  app.require_subcommand(1);

  CommonFlags common;
  fs::path ontology, kg, corpus;

  auto* construct = app.add_subcommand("construct", "generate facts for every relation of an ontology");
  add_common(*construct, common);
  construct->add_option("--ontology", ontology)->required();
  std::string topic;
  construct->add_option("--topic", topic, "defaults to the ontology file stem");

  auto* complete = app.add_subcommand(
      "complete", "fill gaps in a KG (--kg), or complete one subject/relation pair (--subject/--relation)");
  add_common(*complete, common);
  complete->add_option("--ontology", ontology)->required();
  auto* kg_opt = complete->add_option("--kg", kg);
  std::size_t max_slots = std::numeric_limits<std::size_t>::max();
  complete->add_option("--max-slots", max_slots, "gap slots to prompt for")->needs(kg_opt);
  std::string subject, relation;
  auto* subj_opt = complete->add_option("--subject", subject)->excludes(kg_opt);
  auto* rel_opt = complete->add_option("--relation", relation)->excludes(kg_opt);
  subj_opt->needs(rel_opt);
  rel_opt->needs(subj_opt);

  auto* extract = app.add_subcommand("extract", "extract facts about an entity from a text corpus");
  add_common(*extract, common);
  extract->add_option("--corpus", corpus)->required();
  extract->add_option("--ontology", ontology)->required();
  std::string entity, ex_relation;
  std::vector<std::string> demos;
  std::optional<std::size_t> gold;
  extract->add_option("--entity", entity)->required();
  extract->add_option("--relation", ex_relation)->required();
  extract->add_option("--demo", demos, "demonstrator as subject|relation|object (repeatable)")->required();
  extract->add_option("--gold", gold, "number of facts present in the text (enables recall)");

  auto* factcheck = app.add_subcommand("factcheck", "ask the model which KG facts are wrong");
  add_common(*factcheck, common);
  factcheck->add_option("--kg", kg)->required();
  factcheck->add_option("--ontology", ontology)->required();

  fs::path session_dir;
  auto* exportc = app.add_subcommand("export", "merge curated facts and write .kgl/.nt/.ttl");
  exportc->add_option("--session", session_dir, "session directory")->required()->check(CLI::ExistingDirectory);
  std::optional<fs::path> labels, out_dir, ex_ontology, ex_kg;
  std::string stem = "kg";
  exportc->add_option("--labels", labels, "label file (default: the session's decisions.jsonl)");
  exportc->add_option("--out", out_dir, "output directory (default: <session>/export)");
  exportc->add_option("--stem", stem, "output file stem")->capture_default_str();
  exportc->add_option("--ontology", ex_ontology, "override the recorded ontology path");
  exportc->add_option("--kg", ex_kg, "override the recorded KG path");

  auto* review = app.add_subcommand("review", "serve the curation API for a session");
  review->add_option("--session", session_dir, "session directory")->required()->check(CLI::ExistingDirectory);
  std::string bind = "127.0.0.1:7341";
  std::optional<fs::path> static_dir;
  review->add_option("--bind", bind, "host:port")->capture_default_str();
  review->add_option("--static", static_dir, "UI assets served under /");

  auto* record = app.add_subcommand("record-fixtures", "re-send a session's prompts and save replay fixtures");
  CommonFlags rec_flags;
  rec_flags.backend = "http";
  add_common(*record, rec_flags);
  record->add_option("--session", session_dir, "session directory")->required()->check(CLI::ExistingDirectory);
  fs::path rec_out;
  record->add_option("--out", rec_out, "fixture output directory")->required();
  std::optional<std::string> provenance;
  record->add_option("--provenance", provenance, "note stored in each fixture");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code_for(ErrorKind::usage);
  }

  try {
    if (*construct || *complete || *extract || *factcheck) {
      Runner r(common, resolve(common));
      SessionState s;
      if (*construct) {
        s = r.pipeline.run_construct(ontology, topic);
      } else if (*complete) {
        if (!subject.empty()) {
          s = r.pipeline.run_completion(ontology, subject, relation);
        } else if (!kg.empty()) {
          s = r.pipeline.run_complete(kg, ontology, max_slots);
        } else {
          throw PreconditionError("complete needs --kg, or --subject with --relation");
        }
      } else if (*extract) {
        std::vector<Triple> demo_triples;
        for (const auto& d : demos) demo_triples.push_back(parse_demo(d));
        s = r.pipeline.run_extract(corpus, ontology, entity, ex_relation, demo_triples, gold);
      } else {
        s = r.pipeline.run_factcheck(kg, ontology);
      }
      print_session(s, common.sessions);
      return 0;
    }

    if (*exportc) {
      const SessionState s = load_session(session_dir);
      const std::vector<Decision> decisions =
          labels ? parse_label_file(fsio::read_file(*labels)) : read_decision_log(session_dir / kDecisionLog);
      ExportOptions opts;
      opts.out_dir = out_dir ? *out_dir : session_dir / "export";
      opts.stem = stem;
      opts.ontology_path = ex_ontology;
      opts.kg_path = ex_kg;
      const ExportResult r = export_session(s, decisions, opts);
      const auto& m = r.metrics;
      std::cout << "generated " << m.generated_count << "\n";
      std::cout << "correct   " << m.correct_count << "\n";
      if (m.precision) std::cout << "precision " << fmt_ratio(*m.precision) << "\n";
      if (m.gold_count) std::cout << "gold      " << *m.gold_count << "\n";
      if (m.extracted_count) std::cout << "extracted " << *m.extracted_count << "\n";
      if (m.recall) std::cout << "recall    " << fmt_ratio(*m.recall) << "\n";
      std::cout << "kg triples " << r.kg.triples().size() << "\n";
      std::cout << "wrote " << r.kgl_path.string() << ", " << r.nt_path.string() << ", " << r.ttl_path.string()
                << ", " << r.metrics_path.string() << "\n";
      return 0;
    }

    if (*review) {
      ReviewOptions opts;
      const auto colon = bind.rfind(':');
      if (colon == std::string::npos) throw PreconditionError("--bind expects host:port");
      opts.host = bind.substr(0, colon);
      try {
        opts.port = std::stoi(bind.substr(colon + 1));
      } catch (const std::exception&) {
        throw PreconditionError("--bind has a bad port: '" + bind + "'");
      }
      opts.static_dir = static_dir;
      ReviewService service(session_dir, opts);
      service.start();
      std::cout << "review service on http://" << opts.host << ":" << service.port() << "/ (Ctrl-C to stop)"
                << std::endl;
      std::signal(SIGINT, [](int) { g_interrupted = true; });
      std::signal(SIGTERM, [](int) { g_interrupted = true; });
      while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      service.stop();
      return 0;
    }

    if (*record) {
      const AppConfig cfg = resolve(rec_flags);
      ModelClient client(cfg.backend);
      const SessionState s = load_session(session_dir);
      for (const auto& t : s.transcripts) {
        PromptRequest req;
        req.mode = t.mode;
        req.prompt_text = t.prompt_text;
        req.token_estimate = estimate_tokens(t.prompt_text);
        const ModelTranscript out = client.record(req, rec_out, provenance);
        std::cout << (rec_out / (out.request_id + ".json")).string() << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "ontoforge: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "ontoforge: " << e.what() << "\n";
    return exit_code_for(ErrorKind::input_format);
  } catch (const std::exception& e) {
    std::cerr << "ontoforge: " << e.what() << "\n";
    return exit_code_for(ErrorKind::input_format);
  }
  return 0;
}
