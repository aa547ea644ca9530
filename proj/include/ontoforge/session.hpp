#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontoforge/modelclient.hpp"
#include "ontoforge/tripleparse.hpp"
#include "ontoforge/validate.hpp"

namespace ontoforge {

struct TranscriptParse {
  std::string transcript_id;
  std::string format_detected;
  bool none_sentinel = false;
  std::vector<SkippedLine> skipped_lines;
};

/// One pass through the pipeline: inputs, raw model exchange, candidates
/// awaiting curation and their validation report.
struct SessionState {
  std::string session_id;
  Mode mode = Mode::completion;
  std::optional<std::string> ontology_path;
  std::optional<std::string> kg_path;
  std::optional<std::string> corpus_path;
  std::optional<std::string> topic;
  std::map<std::string, std::string> sources;  // source-text id -> text (extraction)
  std::optional<std::size_t> gold_count;
  std::vector<ModelTranscript> transcripts;
  std::vector<TranscriptParse> parses;
  std::vector<CandidateTriple> candidates;
  std::optional<ValidationReport> report;
  std::optional<SessionMetrics> metrics;
  std::optional<std::string> error;  // set on partial sessions
};

/// Timestamps are dropped when `with_timestamps` is false (comparison canon).
nlohmann::json to_json(const SessionState& s, bool with_timestamps = true);
SessionState session_from_json(const nlohmann::json& j);

inline constexpr std::string_view kSessionFile = "session.json";
inline constexpr std::string_view kReportFile = "report.json";
inline constexpr std::string_view kDecisionLog = "decisions.jsonl";
inline constexpr std::string_view kTranscriptDir = "transcripts";

/// Writes sessions/<id>/{session.json, transcripts/, report.json} under
/// `root`, each file atomically. Returns the session directory.
std::filesystem::path save_session(const SessionState& s, const std::filesystem::path& root);
SessionState load_session(const std::filesystem::path& session_dir);

// --- curation ---------------------------------------------------------------

enum class DecisionAction { accept, reject, edit };
std::string_view to_string(DecisionAction a) noexcept;
std::optional<DecisionAction> parse_action(std::string_view s) noexcept;

struct Decision {
  std::string transcript_id;
  std::size_t line_number = 0;
  DecisionAction action = DecisionAction::accept;
  std::optional<Triple> replacement;
  std::string decided_at;
};

nlohmann::json to_json(const Decision& d);
Decision decision_from_json(const nlohmann::json& j);

/// Reads the label-file format ({transcript_id, line_number, decision}).
std::vector<Decision> parse_label_file(std::string_view source);
std::string write_label_file(std::span<const Decision> decisions);

class DecisionConflict : public Error {
 public:
  explicit DecisionConflict(const std::string& message) : Error(ErrorKind::usage, message) {}
};

class UnknownCandidate : public Error {
 public:
  explicit UnknownCandidate(const std::string& message) : Error(ErrorKind::usage, message) {}
};

CandidateTriple* find_candidate(std::vector<CandidateTriple>& candidates, std::string_view transcript_id,
                                std::size_t line_number);

/// Applies one decision. UnknownCandidate when no candidate matches,
/// DecisionConflict when it was already decided.
void apply_decision(std::vector<CandidateTriple>& candidates, const Decision& decision);

/// Pristine candidates with every decision applied in order.
std::vector<CandidateTriple> replay_decisions(std::vector<CandidateTriple> pristine,
                                              std::span<const Decision> log);

std::vector<Decision> read_decision_log(const std::filesystem::path& path);

}  // namespace ontoforge
