#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ontoforge/types.hpp"

namespace ontoforge {

enum class Provenance { model_pretrained, provided_text, existing_kg };
enum class CurationStatus { candidate, accepted, rejected, edited };

std::string_view to_string(Provenance p) noexcept;
std::optional<Provenance> parse_provenance(std::string_view s) noexcept;
std::string_view to_string(CurationStatus s) noexcept;
std::optional<CurationStatus> parse_status(std::string_view s) noexcept;

/// A parsed model-output fact awaiting curation.
struct CandidateTriple {
  Triple triple;
  Provenance source = Provenance::model_pretrained;
  std::string transcript_id;
  std::size_t line_number = 0;  // 1-based line within the response text
  std::string raw_line;
  CurationStatus status = CurationStatus::candidate;
  std::optional<Triple> edited_value;

  /// The fact that enters the KG: edited_value for edited candidates.
  const Triple& effective() const noexcept {
    return (status == CurationStatus::edited && edited_value) ? *edited_value : triple;
  }

  /// Moves out of candidate status. Throws PreconditionError on any other
  /// transition, or when edit lacks / accept+reject carry a replacement.
  void decide(CurationStatus next, std::optional<Triple> replacement = std::nullopt);
};

struct SkippedLine {
  std::size_t line_number;
  std::string reason;  // "no-triple-pattern", "too-few-fields", "empty-field", "sentinel"

  friend bool operator==(const SkippedLine&, const SkippedLine&) = default;
};

struct ParseReport {
  std::vector<CandidateTriple> triples;
  std::vector<SkippedLine> skipped_lines;
  /// "numbered-paren", "numbered-angle", "paren", "angle", "bullet-paren",
  /// "mixed" or "none".
  std::string format_detected = "none";
  /// True when some line was exactly the factcheck sentinel "NONE".
  bool saw_none_sentinel = false;
};

inline constexpr std::string_view kNoneSentinel = "NONE";

/// Total over arbitrary input: failures become skipped lines, never throws.
ParseReport parse_triples(std::string_view response_text, std::string_view transcript_id,
                          Provenance source);

/// Trim, collapse whitespace, lowercase, strip leading/trailing ASCII punctuation.
std::string normalize_label(std::string_view text);

/// Jaccard coefficient of the whitespace-token sets of the normalized labels.
double similarity(std::string_view a, std::string_view b);

/// "(s, r, o)" in the instructed output syntax.
std::string format_triple(const Triple& t);

/// Normalized equality on all three fields plus the literal flag.
bool same_fact(const Triple& a, const Triple& b);

nlohmann::json to_json(const Triple& t);
Triple triple_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CandidateTriple& c);
CandidateTriple candidate_from_json(const nlohmann::json& j);

/// Line-record JSON audit log: one "triple" record per candidate and one
/// "skipped" record per skipped line, then a closing "summary" record.
std::string parse_report_jsonl(const ParseReport& report);

}  // namespace ontoforge
