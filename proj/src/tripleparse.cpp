#include "ontoforge/tripleparse.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "ontoforge/error.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge {
namespace {

using nlohmann::json;

bool is_ascii_punct(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) || (u >= 0x5B && u <= 0x60) ||
         (u >= 0x7B && u <= 0x7E);
}

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

enum class Marker { none, numbered, bullet };

struct LineMatch {
  Marker marker = Marker::none;
  char opener = '(';
  std::string_view interior;
};

// Recognizes an optional list marker followed by one bracketed group.
std::optional<LineMatch> match_line(std::string_view t) {
  LineMatch m;
  std::size_t i = 0;
  while (i < t.size() && is_digit(t[i])) ++i;
  if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) {
    m.marker = Marker::numbered;
    t = text::trim(t.substr(i + 1));
  } else if (!t.empty() && (t[0] == '-' || t[0] == '*')) {
    m.marker = Marker::bullet;
    t = text::trim(t.substr(1));
  }
  if (t.empty() || (t[0] != '(' && t[0] != '<')) return std::nullopt;
  m.opener = t[0];
  const char closer = m.opener == '(' ? ')' : '>';
  while (!t.empty() && (t.back() == '.' || t.back() == ',' || t.back() == ';')) {
    t = text::trim(t.substr(0, t.size() - 1));
  }
  if (t.size() < 2 || t.back() != closer) return std::nullopt;
  m.interior = t.substr(1, t.size() - 2);
  return m;
}

std::string_view format_tag(const LineMatch& m) {
  const bool paren = m.opener == '(';
  switch (m.marker) {
    case Marker::numbered:
      return paren ? "numbered-paren" : "numbered-angle";
    case Marker::bullet:
      return paren ? "bullet-paren" : "bullet-angle";
    case Marker::none:
      return paren ? "paren" : "angle";
  }
  return "paren";
}

std::string_view unquote(std::string_view field, bool& quoted) {
  field = text::trim(field);
  quoted = field.size() >= 2 && field.front() == '"' && field.back() == '"';
  if (quoted) field = field.substr(1, field.size() - 2);
  return field;
}

std::set<std::string> token_set(std::string_view label) {
  std::set<std::string> tokens;
  const std::string norm = normalize_label(label);
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    if (end > start) tokens.emplace(norm.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

}  // namespace

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::model_pretrained:
      return "model_pretrained";
    case Provenance::provided_text:
      return "provided_text";
    case Provenance::existing_kg:
      return "existing_kg";
  }
  return "model_pretrained";
}

std::optional<Provenance> parse_provenance(std::string_view s) noexcept {
  for (auto p : {Provenance::model_pretrained, Provenance::provided_text, Provenance::existing_kg}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::string_view to_string(CurationStatus s) noexcept {
  switch (s) {
    case CurationStatus::candidate:
      return "candidate";
    case CurationStatus::accepted:
      return "accepted";
    case CurationStatus::rejected:
      return "rejected";
    case CurationStatus::edited:
      return "edited";
  }
  return "candidate";
}

std::optional<CurationStatus> parse_status(std::string_view s) noexcept {
  for (auto st : {CurationStatus::candidate, CurationStatus::accepted, CurationStatus::rejected,
                  CurationStatus::edited}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

void CandidateTriple::decide(CurationStatus next, std::optional<Triple> replacement) {
  if (status != CurationStatus::candidate) {
    throw PreconditionError("candidate " + transcript_id + ":" + std::to_string(line_number) +
                            " already " + std::string(to_string(status)));
  }
  if (next == CurationStatus::candidate) {
    throw PreconditionError("cannot move a candidate back to candidate status");
  }
  if (next == CurationStatus::edited) {
    if (!replacement) throw PreconditionError("edit requires a replacement triple");
    if (normalize_label(replacement->subject).empty() ||
        normalize_label(replacement->relation).empty() ||
        normalize_label(replacement->object).empty()) {
      throw PreconditionError("replacement triple has an empty field");
    }
  } else if (replacement) {
    throw PreconditionError("only edit decisions carry a replacement");
  }
  status = next;
  edited_value = std::move(replacement);
}

std::string normalize_label(std::string_view input) {
  std::string s = text::fold(input);
  for (;;) {
    std::size_t b = 0, e = s.size();
    while (b < e && (is_ascii_punct(s[b]) || s[b] == ' ')) ++b;
    while (e > b && (is_ascii_punct(s[e - 1]) || s[e - 1] == ' ')) --e;
    if (b == 0 && e == s.size()) return s;
    s = s.substr(b, e - b);
  }
}

double similarity(std::string_view a, std::string_view b) {
  const auto ta = token_set(a);
  const auto tb = token_set(b);
  if (ta.empty() && tb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& t : ta) common += tb.count(t);
  const std::size_t uni = ta.size() + tb.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::string format_triple(const Triple& t) {
  std::string object = t.object_is_literal ? "\"" + t.object + "\"" : t.object;
  return "(" + t.subject + ", " + t.relation + ", " + object + ")";
}

bool same_fact(const Triple& a, const Triple& b) {
  return a.object_is_literal == b.object_is_literal &&
         normalize_label(a.subject) == normalize_label(b.subject) &&
         normalize_label(a.relation) == normalize_label(b.relation) &&
         normalize_label(a.object) == normalize_label(b.object);
}

ParseReport parse_triples(std::string_view response_text, std::string_view transcript_id,
                          Provenance source) {
  ParseReport report;
  const std::string clean = text::sanitize_utf8(response_text);
  const auto lines = text::split_lines(clean);
  std::set<std::string_view> formats;

  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const std::size_t line_no = idx + 1;
    const std::string_view t = text::trim(lines[idx]);
    if (t.empty()) continue;

    std::string_view bare = t;
    if (!bare.empty() && bare.back() == '.') bare.remove_suffix(1);
    if (text::fold(bare) == "none") {
      report.saw_none_sentinel = true;
      report.skipped_lines.push_back({line_no, "sentinel"});
      continue;
    }

    const auto m = match_line(t);
    if (!m) {
      report.skipped_lines.push_back({line_no, "no-triple-pattern"});
      continue;
    }
    std::string_view interior = m->interior;
    std::string_view sep = ", ";
    if (interior.find(sep) == std::string_view::npos) sep = ",";
    // Subject ends at the first separator, relation at the second; any
    // further separators belong to the object.
    const auto first = interior.find(sep);
    const auto last =
        first == std::string_view::npos ? first : interior.find(sep, first + sep.size());
    if (first == std::string_view::npos || last == std::string_view::npos) {
      report.skipped_lines.push_back({line_no, "too-few-fields"});
      continue;
    }
    bool quoted = false;
    Triple triple;
    triple.subject = std::string(unquote(interior.substr(0, first), quoted));
    triple.relation = std::string(unquote(interior.substr(first + sep.size(), last - first - sep.size()), quoted));
    triple.object = std::string(unquote(interior.substr(last + sep.size()), quoted));
    triple.object_is_literal = quoted;
    if (normalize_label(triple.subject).empty() || normalize_label(triple.relation).empty() ||
        normalize_label(triple.object).empty()) {
      report.skipped_lines.push_back({line_no, "empty-field"});
      continue;
    }

    CandidateTriple cand;
    cand.triple = std::move(triple);
    cand.source = source;
    cand.transcript_id = std::string(transcript_id);
    cand.line_number = line_no;
    cand.raw_line = std::string(lines[idx]);
    report.triples.push_back(std::move(cand));
    formats.insert(format_tag(*m));
  }

  if (formats.size() == 1) {
    report.format_detected = std::string(*formats.begin());
  } else if (formats.size() > 1) {
    report.format_detected = "mixed";
  }
  return report;
}

json to_json(const Triple& t) {
  return json{{"s", t.subject}, {"r", t.relation}, {"o", t.object}, {"literal", t.object_is_literal}};
}

Triple triple_from_json(const json& j) {
  Triple t;
  t.subject = j.at("s").get<std::string>();
  t.relation = j.at("r").get<std::string>();
  t.object = j.at("o").get<std::string>();
  t.object_is_literal = j.value("literal", false);
  return t;
}

json to_json(const CandidateTriple& c) {
  json j = to_json(c.triple);
  j["source"] = to_string(c.source);
  j["transcript_id"] = c.transcript_id;
  j["line_number"] = c.line_number;
  j["raw_line"] = c.raw_line;
  j["status"] = to_string(c.status);
  if (c.edited_value) j["edited"] = to_json(*c.edited_value);
  return j;
}

CandidateTriple candidate_from_json(const json& j) {
  CandidateTriple c;
  c.triple = triple_from_json(j);
  const auto source = parse_provenance(j.at("source").get<std::string>());
  const auto status = parse_status(j.at("status").get<std::string>());
  if (!source || !status) throw Error(ErrorKind::input_format, "bad candidate record: " + j.dump());
  c.source = *source;
  c.status = *status;
  c.transcript_id = j.at("transcript_id").get<std::string>();
  c.line_number = j.at("line_number").get<std::size_t>();
  c.raw_line = j.value("raw_line", "");
  if (j.contains("edited")) c.edited_value = triple_from_json(j.at("edited"));
  return c;
}

std::string parse_report_jsonl(const ParseReport& report) {
  std::ostringstream out;
  for (const auto& c : report.triples) {
    json j = to_json(c);
    j["kind"] = "triple";
    out << j.dump() << '\n';
  }
  for (const auto& s : report.skipped_lines) {
    out << json{{"kind", "skipped"}, {"line_number", s.line_number}, {"reason", s.reason}}.dump()
        << '\n';
  }
  out << json{{"kind", "summary"},
              {"format", report.format_detected},
              {"none_sentinel", report.saw_none_sentinel},
              {"triples", report.triples.size()},
              {"skipped", report.skipped_lines.size()}}
             .dump()
      << '\n';
  return out.str();
}

}  // namespace ontoforge
