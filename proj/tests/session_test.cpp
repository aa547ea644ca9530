#include <gtest/gtest.h>

#include <random>

#include "ontoforge/error.hpp"
#include "ontoforge/fsio.hpp"
#include "ontoforge/session.hpp"
#include "tempdir.hpp"

using namespace ontoforge;
using nlohmann::json;

namespace {

CandidateTriple cand(const std::string& tid, std::size_t line, const std::string& object) {
  CandidateTriple c;
  c.triple = {"COVID-19", "symptoms and signs", object, false};
  c.transcript_id = tid;
  c.line_number = line;
  c.raw_line = std::to_string(line) + ". " + format_triple(c.triple);
  return c;
}

SessionState sample_session() {
  SessionState s;
  s.session_id = "extraction-abc";
  s.mode = Mode::extraction;
  s.ontology_path = "data/ontologies/covid.onto";
  s.corpus_path = "data/corpus/x.txt";
  s.sources = {{"x#1", "Fever and cough are common."}};
  s.gold_count = 3;
  s.transcripts.push_back({"tid1", Mode::extraction, "prompt", "1. (COVID-19, symptoms and signs, fever)\nnoise", "replay",
                           "2023-06-01T00:00:00Z", 1});
  s.parses.push_back({"tid1", "numbered-paren", false, {{2, "no-triple-pattern"}}});
  s.candidates = {cand("tid1", 1, "fever"), cand("tid1", 3, "cough")};
  s.candidates[1].decide(CurationStatus::edited, Triple{"COVID-19", "symptoms and signs", "dry cough", false});
  ValidationReport r;
  r.violations.push_back({{"tid1", 1}, ViolationKind::unknown_relation, "", "x"});
  s.report = r;
  return s;
}

std::vector<std::string> leftover_temp_files(const std::filesystem::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.path().filename().string().find(".tmp.") != std::string::npos) out.push_back(e.path().string());
  }
  return out;
}

}  // namespace

TEST(Session, SaveLoadRoundTrip) {
  testing_support::TempDir root;
  const auto s = sample_session();
  const auto dir = save_session(s, root.path());
  EXPECT_EQ(dir, root / "extraction-abc");
  EXPECT_TRUE(std::filesystem::exists(dir / "session.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "transcripts" / "tid1.json"));
  EXPECT_TRUE(leftover_temp_files(root.path()).empty());

  const auto back = load_session(dir);
  EXPECT_EQ(to_json(back), to_json(s));
  EXPECT_EQ(back.candidates[1].status, CurationStatus::edited);
  EXPECT_EQ(back.candidates[1].effective().object, "dry cough");
  EXPECT_EQ(back.parses[0].skipped_lines[0].reason, "no-triple-pattern");
  const auto transcript = transcript_from_json(json::parse(fsio::read_file(dir / "transcripts" / "tid1.json")));
  EXPECT_EQ(transcript.response_text, s.transcripts[0].response_text);
}

TEST(Session, TimestampsLeftOutOfComparisonCanon) {
  auto a = sample_session();
  auto b = sample_session();
  b.transcripts[0].timestamp = "2030-01-01T00:00:00Z";
  EXPECT_NE(to_json(a), to_json(b));
  EXPECT_EQ(to_json(a, false), to_json(b, false));
}

TEST(Session, PartialSessionAndMalformedFile) {
  testing_support::TempDir root;
  SessionState s;
  s.session_id = "completion-000000000000";
  s.error = "no replay fixture";
  const auto dir = save_session(s, root.path());
  const auto back = load_session(dir);
  EXPECT_EQ(back.error, "no replay fixture");
  EXPECT_TRUE(back.candidates.empty());
  EXPECT_FALSE(back.report);

  fsio::write_file_atomic(dir / "session.json", "{ not json");
  try {
    load_session(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::input_format);
  }
  fsio::write_file_atomic(dir / "session.json", R"({"session_id": "x", "mode": "dreaming"})");
  EXPECT_THROW(load_session(dir), Error);
}

TEST(Session, AtomicRewriteKeepsOldContentsUntilRename) {
  testing_support::TempDir root;
  auto s = sample_session();
  const auto dir = save_session(s, root.path());
  const auto first = fsio::read_file(dir / "session.json");
  s.candidates.pop_back();
  save_session(s, root.path());
  const auto second = fsio::read_file(dir / "session.json");
  EXPECT_NE(first, second);
  EXPECT_NO_THROW(json::parse(second));
  EXPECT_TRUE(leftover_temp_files(root.path()).empty());
}

TEST(Labels, ParseAndWrite) {
  const std::string text =
      "{\"transcript_id\": \"t\", \"line_number\": 1, \"decision\": \"accept\"}\n"
      "\n"
      "{\"transcript_id\": \"t\", \"line_number\": 2, \"decision\": \"reject\"}\n";
  const auto labels = parse_label_file(text);
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels[1].action, DecisionAction::reject);
  EXPECT_EQ(parse_label_file(write_label_file(labels)).size(), 2u);
  EXPECT_EQ(write_label_file(labels), "{\"decision\":\"accept\",\"line_number\":1,\"transcript_id\":\"t\"}\n"
                                      "{\"decision\":\"reject\",\"line_number\":2,\"transcript_id\":\"t\"}\n");
}

TEST(Labels, BadRecordsCarryLineNumbers) {
  for (const auto& [text, line] : std::vector<std::pair<std::string, std::size_t>>{
           {"{\"transcript_id\": \"t\", \"line_number\": 1, \"decision\": \"maybe\"}", 1},
           {"\n{\"transcript_id\": \"t\"}", 2},
           {"{\"transcript_id\": \"t\", \"line_number\": 1, \"decision\": \"accept\"}\nnot json", 2},
           {"{\"transcript_id\": \"t\", \"line_number\": 1, \"decision\": \"edit\"}", 1}}) {
    try {
      parse_label_file(text);
      FAIL() << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
    }
  }
}

TEST(Decisions, ApplyConflictsAndUnknowns) {
  std::vector<CandidateTriple> cands{cand("t", 1, "fever"), cand("t", 2, "cough")};
  apply_decision(cands, {"t", 1, DecisionAction::accept, std::nullopt, ""});
  EXPECT_EQ(cands[0].status, CurationStatus::accepted);
  EXPECT_THROW(apply_decision(cands, {"t", 1, DecisionAction::reject, std::nullopt, ""}), DecisionConflict);
  EXPECT_THROW(apply_decision(cands, {"t", 9, DecisionAction::accept, std::nullopt, ""}), UnknownCandidate);
  EXPECT_THROW(apply_decision(cands, {"other", 2, DecisionAction::accept, std::nullopt, ""}), UnknownCandidate);
  apply_decision(cands, {"t", 2, DecisionAction::edit, Triple{"COVID-19", "symptoms and signs", "dry cough", false}, ""});
  EXPECT_EQ(cands[1].effective().object, "dry cough");
  EXPECT_EQ(cands[1].triple.object, "cough");
}

TEST(Decisions, DecisionJsonRoundTrip) {
  const Decision d{"t", 4, DecisionAction::edit, Triple{"a", "r", "b", true}, "2023-06-01T00:00:00Z"};
  const auto back = decision_from_json(to_json(d));
  EXPECT_EQ(back.transcript_id, "t");
  EXPECT_EQ(back.line_number, 4u);
  EXPECT_EQ(back.action, DecisionAction::edit);
  EXPECT_EQ(back.replacement, d.replacement);
  EXPECT_EQ(back.decided_at, d.decided_at);
}

TEST(Decisions, ReplayOfLogReproducesStatuses) {
  std::mt19937 rng(5);
  for (int round = 0; round < 50; ++round) {
    std::vector<CandidateTriple> pristine;
    const std::size_t n = 1 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) pristine.push_back(cand(i % 2 ? "a" : "b", i + 1, "o" + std::to_string(i)));

    // Live state evolves decision by decision; only accepted decisions enter the log.
    testing_support::TempDir dir;
    const auto log_path = dir / "decisions.jsonl";
    std::vector<CandidateTriple> live = pristine;
    std::map<std::pair<std::string, std::size_t>, CurationStatus> expected;
    for (int step = 0; step < 40; ++step) {
      const auto& target = pristine[rng() % n];
      Decision d{target.transcript_id, target.line_number, static_cast<DecisionAction>(rng() % 3), std::nullopt, ""};
      if (d.action == DecisionAction::edit) d.replacement = Triple{"x", "y", "z" + std::to_string(step), false};
      try {
        apply_decision(live, d);
      } catch (const DecisionConflict&) {
        continue;
      }
      fsio::append_line(log_path, to_json(d).dump());
      expected[{d.transcript_id, d.line_number}] = d.action == DecisionAction::accept   ? CurationStatus::accepted
                                                   : d.action == DecisionAction::reject ? CurationStatus::rejected
                                                                                        : CurationStatus::edited;
    }
    const auto replayed = replay_decisions(pristine, read_decision_log(log_path));
    ASSERT_EQ(replayed.size(), live.size());
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(replayed[i].status, live[i].status) << "round " << round;
      EXPECT_EQ(replayed[i].effective(), live[i].effective());
      const auto it = expected.find({pristine[i].transcript_id, pristine[i].line_number});
      EXPECT_EQ(replayed[i].status, it == expected.end() ? CurationStatus::candidate : it->second);
    }
  }
  EXPECT_TRUE(read_decision_log("/nonexistent/decisions.jsonl").empty());
}
