#include <gtest/gtest.h>

#include "ntriples_check.hpp"
#include "ontoforge/error.hpp"
#include "ontoforge/fsio.hpp"
#include "ontoforge/pipeline.hpp"
#include "tempdir.hpp"

using namespace ontoforge;
using nlohmann::json;

namespace {

const std::filesystem::path kData = ONTOFORGE_DATA_DIR;
const auto kCovid = kData / "ontologies/covid.onto";
const auto kDisease = kData / "ontologies/disease.onto";

BackendConfig replay_config() {
  BackendConfig c;
  c.kind = BackendKind::replay;
  c.fixture_dir = kData / "fixtures";
  return c;
}

struct Harness {
  testing_support::TempDir root;
  ModelClient client;
  Pipeline pipeline;

  explicit Harness(BackendConfig config = replay_config(), std::shared_ptr<Backend> backend = nullptr)
      : client(backend ? ModelClient(config, backend) : ModelClient(config)),
        pipeline(client, PromptGenerator{}, PipelineOptions{root / "sessions"}) {}
};

std::vector<Decision> labels(const std::string& scenario) {
  return parse_label_file(fsio::read_file(kData / "labels" / (scenario + ".labels.jsonl")));
}

std::shared_ptr<ScriptedBackend> scripted(std::vector<std::string> responses) {
  return std::make_shared<ScriptedBackend>(std::move(responses));
}

}  // namespace

TEST(SplitCorpus, SeparatorLines) {
  EXPECT_EQ(split_corpus("one\n---\ntwo\n  ---  \n\n"), (std::vector<std::string>{"one", "two"}));
  EXPECT_TRUE(split_corpus("  \n---\n").empty());
  EXPECT_EQ(split_corpus("a\nb"), (std::vector<std::string>{"a\nb"}));
}

TEST(Completion, VaccineManufacturerExportsNineteenFacts) {
  Harness h;
  const auto s = h.pipeline.run_completion(kCovid, "COVID-19 vaccine", "manufacturer", 20);
  ASSERT_EQ(s.candidates.size(), 20u);
  EXPECT_EQ(s.transcripts.size(), 1u);
  EXPECT_TRUE(std::filesystem::exists(h.root / "sessions" / s.session_id / "session.json"));
  EXPECT_EQ(s.session_id.rfind("completion-", 0), 0u);
  EXPECT_EQ(s.session_id.size(), std::string("completion-").size() + 12);

  const auto decisions = labels("t2_01_vaccine_manufacturer");
  const auto result = export_session(s, decisions, {h.root / "out"});
  EXPECT_EQ(result.metrics.generated_count, 20u);
  EXPECT_EQ(result.metrics.correct_count, 19u);
  EXPECT_DOUBLE_EQ(*result.metrics.precision, 0.95);
  EXPECT_EQ(result.kg.triples().size(), 19u);
  for (const auto& t : result.kg.triples()) EXPECT_NE(t.subject, "ZF2001");

  const auto nt = nt::parse(fsio::read_file(result.nt_path));
  ASSERT_TRUE(nt.ok) << nt.error;
  EXPECT_GE(nt.triples.size(), 19u);
  const auto metrics = json::parse(fsio::read_file(result.metrics_path));
  EXPECT_DOUBLE_EQ(metrics["precision"].get<double>(), 0.95);
  EXPECT_EQ(metrics["kg_triples"], 19);
  EXPECT_TRUE(std::filesystem::exists(result.ttl_path));
  EXPECT_TRUE(std::filesystem::exists(result.kgl_path));
}

TEST(Completion, AllRejectedAndMissingDecision) {
  Harness h;
  const auto s = h.pipeline.run_completion(kCovid, "COVID-19 vaccine", "manufacturer", 20);
  std::vector<Decision> reject_all;
  for (const auto& c : s.candidates) reject_all.push_back({c.transcript_id, c.line_number, DecisionAction::reject, std::nullopt, ""});
  const auto result = export_session(s, reject_all, {h.root / "out"});
  EXPECT_TRUE(result.kg.triples().empty());
  EXPECT_DOUBLE_EQ(*result.metrics.precision, 0.0);
  EXPECT_EQ(fsio::read_file(result.nt_path), "");

  reject_all.pop_back();
  try {
    export_session(s, reject_all, {h.root / "out2"});
    FAIL();
  } catch (const CurationError& e) {
    EXPECT_NE(std::string(e.what()).find(":20"), std::string::npos);
  }
}

TEST(Completion, UndeclaredRelationIsAPrecondition) {
  Harness h;
  EXPECT_THROW(h.pipeline.run_completion(kCovid, "COVID-19", "orbits"), PreconditionError);
}

TEST(Construct, DiseaseOntologyFlagsDomainDeviations) {
  Harness h;
  const auto s = h.pipeline.run_construct(kDisease, "common diseases");
  ASSERT_EQ(s.candidates.size(), 20u);
  ASSERT_TRUE(s.report);
  std::vector<std::size_t> lines;
  for (const auto& v : s.report->violations) {
    EXPECT_EQ(v.kind, ViolationKind::domain_mismatch);
    EXPECT_EQ(v.expected, "Symptom");
    EXPECT_EQ(v.found, "Disease");
    lines.push_back(v.triple_ref.line_number);
  }
  EXPECT_EQ(lines, (std::vector<std::size_t>{10, 17}));
  EXPECT_TRUE(s.report->duplicate_clusters.empty());
}

TEST(Construct, EmptyTopicDefaultsToStem) {
  auto backend = std::make_shared<ScriptedBackend>([](const PromptRequest&) { return std::string("NONE"); });
  Harness h(BackendConfig{.kind = BackendKind::scripted}, backend);
  const auto s = h.pipeline.run_construct(kDisease, "  ");
  EXPECT_EQ(s.topic, "disease");
  EXPECT_NE(s.transcripts.at(0).prompt_text.find("disease"), std::string::npos);
  EXPECT_TRUE(s.candidates.empty());
}

TEST(Construct, MissingFixtureLeavesPartialSession) {
  testing_support::TempDir fixtures;
  BackendConfig c = replay_config();
  c.fixture_dir = fixtures.path();
  Harness h(c);
  PipelineOptions options{h.root / "sessions"};
  options.session_id = "partial";
  Pipeline pipeline(h.client, PromptGenerator{}, options);
  try {
    pipeline.run_construct(kDisease, "common diseases");
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.failure(), BackendFailure::fixture_missing);
  }
  const auto saved = load_session(h.root / "sessions" / "partial");
  EXPECT_TRUE(saved.candidates.empty());
  ASSERT_TRUE(saved.error);
  EXPECT_NE(saved.error->find("no replay fixture"), std::string::npos);
}

TEST(Gapfill, LongCovidOneSlot) {
  Harness h;
  const auto s = h.pipeline.run_complete(kData / "kg/long_covid.kgl", kCovid, 1);
  EXPECT_EQ(s.transcripts.size(), 1u);
  EXPECT_EQ(s.candidates.size(), 13u);
  EXPECT_NE(s.transcripts[0].prompt_text.find("long COVID"), std::string::npos);
}

TEST(Gapfill, ZeroSlotsOrNoGapsMeanNoCalls) {
  auto backend = scripted({});
  Harness h(BackendConfig{.kind = BackendKind::scripted}, backend);
  const auto s = h.pipeline.run_complete(kData / "kg/long_covid.kgl", kCovid, 0);
  EXPECT_TRUE(s.candidates.empty());
  EXPECT_EQ(backend->calls(), 0u);

  testing_support::TempDir dir;
  fsio::write_file_atomic(dir / "full.kgl",
                          "{\"kind\":\"entity\",\"label\":\"flu\",\"concept\":\"Disease\"}\n"
                          "{\"kind\":\"triple\",\"s\":\"flu\",\"r\":\"hasSymptom\",\"o\":\"fever\"}\n"
                          "{\"kind\":\"triple\",\"s\":\"flu\",\"r\":\"affectsOrgan\",\"o\":\"lung\"}\n"
                          "{\"kind\":\"triple\",\"s\":\"flu\",\"r\":\"treatedBy\",\"o\":\"rest\"}\n"
                          "{\"kind\":\"triple\",\"s\":\"flu\",\"r\":\"hasRiskFactor\",\"o\":\"age\"}\n"
                          "{\"kind\":\"triple\",\"s\":\"flu\",\"r\":\"hasTreatment\",\"o\":\"rest\"}\n");
  const auto full = h.pipeline.run_complete(dir / "full.kgl", kDisease, 10);
  EXPECT_TRUE(full.candidates.empty());
  EXPECT_EQ(backend->calls(), 0u);
}

TEST(Extract, SymptomAndTreatmentParagraphs) {
  Harness h;
  const std::vector<Triple> symptom_demo{{"COVID-19", "symptoms and signs", "fever", false}};
  const auto s1 = h.pipeline.run_extract(kData / "corpus/t3_01_symptoms.txt", kCovid, "COVID-19", "symptomsAndSigns",
                                         symptom_demo, 11);
  EXPECT_EQ(s1.candidates.size(), 11u);
  EXPECT_EQ(s1.sources.size(), 1u);
  EXPECT_TRUE(s1.sources.contains("t3_01_symptoms#1"));
  for (const auto& c : s1.candidates) EXPECT_EQ(c.source, Provenance::provided_text);

  const std::vector<Triple> treatment_demo{{"COVID-19", "treatment", "dexamethasone", false}};
  const auto s2 = h.pipeline.run_extract(kData / "corpus/t3_02_treatments.txt", kCovid, "COVID-19", "treatment",
                                         treatment_demo, 8);
  EXPECT_EQ(s2.candidates.size(), 5u);
  const auto result = export_session(s2, labels("t3_02_treatments"), {h.root / "out"});
  EXPECT_EQ(*result.metrics.extracted_count, 5u);
  EXPECT_DOUBLE_EQ(*result.metrics.recall, 0.625);
}

TEST(Extract, PregnancyNegationWarning) {
  Harness h;
  const std::vector<Triple> demo{{"COVID-19 disease in pregnancy", "effect", "preterm birth", false}};
  const auto s = h.pipeline.run_extract(kData / "corpus/t3_09_pregnancy.txt", kCovid, "COVID-19 disease in pregnancy",
                                        "effect", demo, 9);
  ASSERT_TRUE(s.report);
  EXPECT_EQ(s.report->negation_warnings.size(), 1u);
}

TEST(Extract, EmptyCorpusAndUngroundedDemonstrator) {
  Harness h;
  testing_support::TempDir dir;
  fsio::write_file_atomic(dir / "empty.txt", "\n---\n  \n");
  const std::vector<Triple> demo{{"COVID-19", "symptoms and signs", "fever", false}};
  EXPECT_THROW(h.pipeline.run_extract(dir / "empty.txt", kCovid, "COVID-19", "symptomsAndSigns", demo), PreconditionError);
  fsio::write_file_atomic(dir / "other.txt", "COVID-19 often causes a cough.");
  EXPECT_THROW(h.pipeline.run_extract(dir / "other.txt", kCovid, "COVID-19", "symptomsAndSigns", demo), PreconditionError);
}

TEST(Extract, OnePromptPerDocument) {
  auto backend = std::make_shared<ScriptedBackend>([](const PromptRequest& r) {
    return "1. (COVID-19, symptoms and signs, fever " + r.slots.at("source_id") + ")";
  });
  Harness h(BackendConfig{.kind = BackendKind::scripted}, backend);
  testing_support::TempDir dir;
  fsio::write_file_atomic(dir / "two.txt", "COVID-19 causes fever.\n---\nCOVID-19 causes fever and cough.\n");
  const std::vector<Triple> demo{{"COVID-19", "symptoms and signs", "fever", false}};
  const auto s = h.pipeline.run_extract(dir / "two.txt", kCovid, "COVID-19", "symptomsAndSigns", demo);
  EXPECT_EQ(backend->calls(), 2u);
  EXPECT_EQ(s.candidates.size(), 2u);
  EXPECT_EQ(s.sources.size(), 2u);
}

TEST(FactCheck, DiabetesFixture) {
  Harness h;
  const auto s = h.pipeline.run_factcheck(kData / "kg/diabetes.kgl", kDisease);
  ASSERT_TRUE(s.report);
  std::size_t contradicted = 0, unconfirmed = 0;
  for (const auto& v : s.report->verdicts) {
    if (v.verdict == Verdict::contradicted) {
      ++contradicted;
      EXPECT_EQ(v.kg_triple.object, "Are very hungry");
      ASSERT_TRUE(v.evidence);
      EXPECT_NE(v.evidence->find("Are very hungry"), std::string::npos);
    }
    if (v.verdict == Verdict::unconfirmed) ++unconfirmed;
  }
  EXPECT_EQ(contradicted, 1u);
  EXPECT_GE(unconfirmed, 1u);

  // Accepting the flag drops the refuted fact from the exported KG.
  const auto result = export_session(s, labels("factcheck_diabetes"), {h.root / "out"});
  EXPECT_EQ(result.kg.triples().size(), 7u);
  for (const auto& t : result.kg.triples()) EXPECT_NE(t.object, "Are very hungry");
}

TEST(FactCheck, SentinelAndEmptyKg) {
  testing_support::TempDir dir;
  fsio::write_file_atomic(dir / "one.kgl",
                          "{\"kind\":\"triple\",\"s\":\"flu\",\"r\":\"hasSymptom\",\"o\":\"fever\"}\n");
  fsio::write_file_atomic(dir / "empty.kgl", "");
  Harness h(BackendConfig{.kind = BackendKind::scripted}, scripted({"NONE", "I am not sure."}));
  const auto s = h.pipeline.run_factcheck(dir / "one.kgl", kDisease);
  ASSERT_EQ(s.report->verdicts.size(), 1u);
  EXPECT_EQ(s.report->verdicts[0].verdict, Verdict::unconfirmed);
  EXPECT_THROW(h.pipeline.run_factcheck(dir / "empty.kgl", kDisease), PreconditionError);
  try {
    h.pipeline.run_factcheck(dir / "one.kgl", kDisease);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::input_format);
  }
}

TEST(Determinism, TwoReplayRunsGiveIdenticalSessions) {
  Harness a, b;
  const auto s1 = a.pipeline.run_construct(kDisease, "common diseases");
  const auto s2 = b.pipeline.run_construct(kDisease, "common diseases");
  EXPECT_EQ(s1.session_id, s2.session_id);
  EXPECT_EQ(to_json(s1, false), to_json(s2, false));
  const auto f1 = json::parse(fsio::read_file(a.root / "sessions" / s1.session_id / "session.json"));
  const auto f2 = json::parse(fsio::read_file(b.root / "sessions" / s2.session_id / "session.json"));
  EXPECT_EQ(to_json(session_from_json(f1), false), to_json(session_from_json(f2), false));
  EXPECT_EQ(fsio::read_file(a.root / "sessions" / s1.session_id / "report.json"),
            fsio::read_file(b.root / "sessions" / s2.session_id / "report.json"));
}
