#include <gtest/gtest.h>

#include <chrono>

#include "ontoforge/error.hpp"
#include "ontoforge/fsio.hpp"
#include "ontoforge/kgstore.hpp"
#include "random_kg.hpp"

using namespace ontoforge;

namespace {

const std::string kData = ONTOFORGE_DATA_DIR;

Ontology disease() { return parse_ontology(fsio::read_file(kData + "/ontologies/disease.onto")); }

CandidateTriple accepted(Triple t, std::size_t line = 1) {
  CandidateTriple c;
  c.triple = std::move(t);
  c.transcript_id = "t";
  c.line_number = line;
  c.decide(CurationStatus::accepted);
  return c;
}

}  // namespace

TEST(KgStore, EmptyDocument) {
  const auto r = load_kg("", disease());
  EXPECT_TRUE(r.kg.empty());
  EXPECT_EQ(r.duplicate_warnings, 0u);
}

TEST(KgStore, TypedEntityWithTwoTriples) {
  const auto r = load_kg(
      R"({"kind":"entity","label":"long COVID","concept":"Disease"}
{"kind":"triple","s":"long COVID","r":"hasSymptom","o":"fatigue"}
{"kind":"triple","s":"long COVID","r":"hasSymptom","o":"brain fog"})",
      disease());
  EXPECT_EQ(r.kg.entities().size(), 1u);
  EXPECT_EQ(r.kg.entities()[0].concept_name, "Disease");
  EXPECT_EQ(r.kg.triples().size(), 2u);
}

TEST(KgStore, DuplicateTripleCollapsesWithWarning) {
  const auto r = load_kg(
      "{\"kind\":\"triple\",\"s\":\"a\",\"r\":\"r\",\"o\":\"b\"}\n"
      "{\"kind\":\"triple\",\"s\":\"A \",\"r\":\"R\",\"o\":\"b.\"}\n",
      disease());
  EXPECT_EQ(r.kg.triples().size(), 1u);
  EXPECT_EQ(r.duplicate_warnings, 1u);
  EXPECT_EQ(r.kg.entities().size(), 1u) << "subject entity created on demand";
}

TEST(KgStore, ErrorsCarryLineNumbers) {
  try {
    load_kg("{\"kind\":\"entity\",\"label\":\"x\"}\n{\"kind\":\"entity\",\"label\":\"y\",\"concept\":\"Planet\"}", disease());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("Planet"), std::string::npos);
  }
  EXPECT_THROW(load_kg("not json", disease()), ParseError);
  EXPECT_THROW(load_kg("{\"kind\":\"triple\",\"s\":\"a\",\"r\":\"b\"}", disease()), ParseError);
  EXPECT_THROW(load_kg("{\"kind\":\"nope\"}", disease()), ParseError);
}

TEST(KgStore, SaveLoadRoundTrip) {
  std::mt19937 rng(11);
  const auto o = disease();
  for (int i = 0; i < 50; ++i) {
    const auto kg = testing_support::random_kg(rng, o, 12, true);
    const auto again = load_kg(save_kg(kg), o).kg;
    EXPECT_EQ(kg, again);
    EXPECT_EQ(save_kg(kg), save_kg(again));
  }
  EXPECT_EQ(load_kg(fsio::read_file(kData + "/kg/diabetes.kgl"), o).kg.triples().size(), 8u);
}

TEST(Gaps, LongCovidWithNoFactsHasOneSlotPerDiseaseRelation) {
  // Relations of the bundled ontology whose domain is Disease, counted by hand:
  // hasSymptom, affectsOrgan, treatedBy, hasRiskFactor, hasTreatment.
  // hasAnatomicalLocation has domain Symptom.
  KnowledgeGraph kg;
  kg.upsert_entity({"long COVID", "Disease", std::nullopt});
  const auto gaps = find_gaps(kg, disease());
  ASSERT_EQ(gaps.size(), 5u);
  EXPECT_EQ(gaps[0], (GapSlot{"long COVID", "hasSymptom"}));
  EXPECT_EQ(gaps[4], (GapSlot{"long COVID", "hasTreatment"}));
}

TEST(Gaps, ExistingFactRemovesSlot) {
  KnowledgeGraph kg;
  kg.upsert_entity({"e", "Disease", std::nullopt});
  kg.add_triple({"e", "has symptom", "fatigue", false});
  for (const auto& g : find_gaps(kg, disease())) EXPECT_NE(g.relation, "hasSymptom");
  EXPECT_EQ(find_gaps(kg, disease()).size(), 4u);
}

TEST(Gaps, UntypedEntitiesProduceNothing) {
  KnowledgeGraph kg;
  kg.upsert_entity({"a", std::nullopt, std::nullopt});
  kg.add_triple({"b", "hasSymptom", "c", false});
  EXPECT_TRUE(find_gaps(kg, disease()).empty());
}

TEST(Gaps, MatchesBruteForceOracle) {
  std::mt19937 rng(2024);
  for (int i = 0; i < 200; ++i) {
    const auto o = testing_support::random_ontology(rng, 5, 10);
    const auto kg = testing_support::random_kg(rng, o, 20, i % 2 == 0);
    ASSERT_EQ(find_gaps(kg, o), testing_support::gap_oracle(kg, o)) << "case " << i;
  }
}

TEST(Merge, AddsAndReportsDuplicates) {
  const auto o = disease();
  KnowledgeGraph empty(o.ns());
  std::vector<CandidateTriple> one{accepted({"Flu", "has symptom", "Fever", false})};
  const auto r = merge_accepted(empty, one, o);
  EXPECT_EQ(r.report.added, 1u);
  ASSERT_EQ(r.kg.triples().size(), 1u);
  EXPECT_EQ(r.kg.triples()[0].relation, "hasSymptom");
  EXPECT_EQ(r.kg.find_entity("flu")->concept_name, "Disease");
  EXPECT_EQ(r.kg.find_entity("Fever"), nullptr) << "objects are not typed on merge";
  ASSERT_EQ(r.report.range_suggestions.size(), 1u);
  EXPECT_EQ(r.report.range_suggestions[0].concept_name, "Symptom");

  const auto again = merge_accepted(r.kg, one, o);
  EXPECT_EQ(again.report.skipped_duplicate, 1u);
  EXPECT_EQ(again.kg, r.kg) << "merging twice is idempotent";
}

TEST(Merge, RejectsUndecidedOrRejectedCandidates) {
  const auto o = disease();
  CandidateTriple bad;
  bad.triple = {"a", "hasSymptom", "b", false};
  bad.transcript_id = "tid";
  bad.line_number = 7;
  bad.decide(CurationStatus::rejected);
  std::vector<CandidateTriple> in{accepted({"x", "hasSymptom", "y", false}), bad};
  try {
    merge_accepted(KnowledgeGraph(o.ns()), in, o);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("tid:7"), std::string::npos);
  }
}

TEST(Merge, EditedCandidatesContributeTheirReplacement) {
  const auto o = disease();
  CandidateTriple c;
  c.triple = {"Flu", "hasSymptom", "Fevr", false};
  c.transcript_id = "t";
  c.line_number = 1;
  c.decide(CurationStatus::edited, Triple{"Flu", "hasSymptom", "Fever", false});
  const auto r = merge_accepted(KnowledgeGraph(o.ns()), std::vector{c}, o);
  EXPECT_TRUE(r.kg.contains({"flu", "hasSymptom", "fever", false}));
}
