#include "ontoforge/session.hpp"

#include <sstream>

#include "ontoforge/fsio.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge {
namespace {

using nlohmann::json;

std::string dump(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n"; }

json opt_string(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::string> read_opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

json parse_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(fsio::read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::input_format, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace

json to_json(const SessionState& s, bool with_timestamps) {
  json transcripts = json::array();
  for (const auto& t : s.transcripts) {
    json tj = to_json(t);
    if (!with_timestamps) tj.erase("timestamp");
    transcripts.push_back(std::move(tj));
  }
  json parses = json::array();
  for (const auto& p : s.parses) {
    json skipped = json::array();
    for (const auto& k : p.skipped_lines) skipped.push_back({{"line_number", k.line_number}, {"reason", k.reason}});
    parses.push_back({{"transcript_id", p.transcript_id},
                      {"format_detected", p.format_detected},
                      {"none_sentinel", p.none_sentinel},
                      {"skipped_lines", skipped}});
  }
  json candidates = json::array();
  for (const auto& c : s.candidates) candidates.push_back(to_json(c));
  return json{{"session_id", s.session_id},
              {"mode", to_string(s.mode)},
              {"ontology_path", opt_string(s.ontology_path)},
              {"kg_path", opt_string(s.kg_path)},
              {"corpus_path", opt_string(s.corpus_path)},
              {"topic", opt_string(s.topic)},
              {"sources", s.sources},
              {"gold_count", s.gold_count ? json(*s.gold_count) : json(nullptr)},
              {"transcripts", transcripts},
              {"parses", parses},
              {"candidates", candidates},
              {"report", s.report ? to_json(*s.report) : json(nullptr)},
              {"metrics", s.metrics ? to_json(*s.metrics) : json(nullptr)},
              {"error", opt_string(s.error)}};
}

SessionState session_from_json(const json& j) {
  try {
    SessionState s;
    s.session_id = j.at("session_id").get<std::string>();
    const auto mode = parse_mode(j.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorKind::input_format, "session has an unknown mode");
    s.mode = *mode;
    s.ontology_path = read_opt_string(j, "ontology_path");
    s.kg_path = read_opt_string(j, "kg_path");
    s.corpus_path = read_opt_string(j, "corpus_path");
    s.topic = read_opt_string(j, "topic");
    if (j.contains("sources")) s.sources = j.at("sources").get<std::map<std::string, std::string>>();
    if (j.contains("gold_count") && !j.at("gold_count").is_null()) s.gold_count = j.at("gold_count").get<std::size_t>();
    for (const auto& t : j.at("transcripts")) s.transcripts.push_back(transcript_from_json(t));
    for (const auto& p : j.at("parses")) {
      TranscriptParse tp;
      tp.transcript_id = p.at("transcript_id").get<std::string>();
      tp.format_detected = p.at("format_detected").get<std::string>();
      tp.none_sentinel = p.at("none_sentinel").get<bool>();
      for (const auto& k : p.at("skipped_lines")) {
        tp.skipped_lines.push_back({k.at("line_number").get<std::size_t>(), k.at("reason").get<std::string>()});
      }
      s.parses.push_back(std::move(tp));
    }
    for (const auto& c : j.at("candidates")) s.candidates.push_back(candidate_from_json(c));
    if (j.contains("report") && !j.at("report").is_null()) s.report = validation_report_from_json(j.at("report"));
    if (j.contains("metrics") && !j.at("metrics").is_null()) {
      const auto& m = j.at("metrics");
      SessionMetrics sm;
      sm.mode = s.mode;
      sm.generated_count = m.at("generated_count").get<std::size_t>();
      sm.correct_count = m.at("correct_count").get<std::size_t>();
      if (!m.at("gold_count").is_null()) sm.gold_count = m.at("gold_count").get<std::size_t>();
      if (!m.at("extracted_count").is_null()) sm.extracted_count = m.at("extracted_count").get<std::size_t>();
      if (!m.at("precision").is_null()) sm.precision = m.at("precision").get<double>();
      if (!m.at("recall").is_null()) sm.recall = m.at("recall").get<double>();
      s.metrics = sm;
    }
    s.error = read_opt_string(j, "error");
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::input_format, std::string("malformed session: ") + e.what());
  }
}

std::filesystem::path save_session(const SessionState& s, const std::filesystem::path& root) {
  const auto dir = root / s.session_id;
  std::error_code ec;
  std::filesystem::create_directories(dir / kTranscriptDir, ec);
  if (ec) throw Error(ErrorKind::input_format, "cannot create session directory '" + dir.string() + "': " + ec.message());
  for (const auto& t : s.transcripts) {
    fsio::write_file_atomic(dir / kTranscriptDir / (t.request_id + ".json"), dump(to_json(t)));
  }
  fsio::write_file_atomic(dir / kReportFile,
                          dump(s.report ? to_json(*s.report) : json(nullptr)));
  fsio::write_file_atomic(dir / kSessionFile, dump(to_json(s)));
  return dir;
}

SessionState load_session(const std::filesystem::path& session_dir) {
  return session_from_json(parse_json_file(session_dir / kSessionFile));
}

// --- curation ---------------------------------------------------------------

std::string_view to_string(DecisionAction a) noexcept {
  switch (a) {
    case DecisionAction::accept:
      return "accept";
    case DecisionAction::reject:
      return "reject";
    case DecisionAction::edit:
      return "edit";
  }
  return "accept";
}

std::optional<DecisionAction> parse_action(std::string_view s) noexcept {
  for (auto a : {DecisionAction::accept, DecisionAction::reject, DecisionAction::edit}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

json to_json(const Decision& d) {
  json j{{"transcript_id", d.transcript_id},
         {"line_number", d.line_number},
         {"decision", to_string(d.action)}};
  if (d.replacement) j["replacement"] = to_json(*d.replacement);
  if (!d.decided_at.empty()) j["decided_at"] = d.decided_at;
  return j;
}

Decision decision_from_json(const json& j) {
  Decision d;
  d.transcript_id = j.at("transcript_id").get<std::string>();
  d.line_number = j.at("line_number").get<std::size_t>();
  const auto action = parse_action(j.at("decision").get<std::string>());
  if (!action) throw Error(ErrorKind::input_format, "unknown decision '" + j.at("decision").dump() + "'");
  d.action = *action;
  if (j.contains("replacement") && !j.at("replacement").is_null()) {
    d.replacement = triple_from_json(j.at("replacement"));
  }
  d.decided_at = j.value("decided_at", "");
  if ((d.action == DecisionAction::edit) != d.replacement.has_value()) {
    throw Error(ErrorKind::input_format, "edit decisions need a replacement; accept/reject forbid one");
  }
  return d;
}

std::vector<Decision> parse_label_file(std::string_view source) {
  std::vector<Decision> out;
  const auto lines = text::split_lines(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    try {
      out.push_back(decision_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(i + 1, std::string("bad label record: ") + e.what());
    } catch (const Error& e) {
      throw ParseError(i + 1, e.what());
    }
  }
  return out;
}

std::string write_label_file(std::span<const Decision> decisions) {
  std::string out;
  for (const auto& d : decisions) {
    json j{{"transcript_id", d.transcript_id},
           {"line_number", d.line_number},
           {"decision", to_string(d.action)}};
    if (d.replacement) j["replacement"] = to_json(*d.replacement);
    out += j.dump() + "\n";
  }
  return out;
}

CandidateTriple* find_candidate(std::vector<CandidateTriple>& candidates, std::string_view transcript_id,
                                std::size_t line_number) {
  for (auto& c : candidates) {
    if (c.line_number == line_number && c.transcript_id == transcript_id) return &c;
  }
  return nullptr;
}

void apply_decision(std::vector<CandidateTriple>& candidates, const Decision& decision) {
  CandidateTriple* c = find_candidate(candidates, decision.transcript_id, decision.line_number);
  if (!c) {
    throw UnknownCandidate("no candidate " + decision.transcript_id + ":" +
                           std::to_string(decision.line_number));
  }
  if (c->status != CurationStatus::candidate) {
    throw DecisionConflict("candidate " + decision.transcript_id + ":" +
                           std::to_string(decision.line_number) + " was already " +
                           std::string(to_string(c->status)));
  }
  switch (decision.action) {
    case DecisionAction::accept:
      c->decide(CurationStatus::accepted);
      break;
    case DecisionAction::reject:
      c->decide(CurationStatus::rejected);
      break;
    case DecisionAction::edit:
      c->decide(CurationStatus::edited, decision.replacement);
      break;
  }
}

std::vector<CandidateTriple> replay_decisions(std::vector<CandidateTriple> pristine,
                                              std::span<const Decision> log) {
  for (const auto& d : log) apply_decision(pristine, d);
  return pristine;
}

std::vector<Decision> read_decision_log(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return parse_label_file(fsio::read_file(path));
}

}  // namespace ontoforge
