#include "ontoforge/validate.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "ontoforge/error.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge {
namespace {

using nlohmann::json;

// Relation comparison key: "hasSymptom", "has symptom" and "Has Symptom." agree.
std::string relation_key(std::string_view relation) {
  return normalize_label(text::relation_phrase(text::trim(relation)));
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

const CandidateTriple* first_match(const Triple& kg, const ParseReport& report) {
  for (const auto& c : report.triples) {
    if (facts_match(kg, c.triple)) return &c;
  }
  return nullptr;
}

std::vector<std::string_view> sentences_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool terminator = (c == '.' || c == '!' || c == '?') &&
                            (i + 1 == s.size() || s[i + 1] == ' ' || s[i + 1] == '\n' || s[i + 1] == '\r');
    if (terminator || c == '\n') {
      const auto sentence = text::trim(s.substr(start, i + 1 - start));
      if (!sentence.empty()) out.push_back(sentence);
      start = i + 1;
    }
  }
  const auto tail = text::trim(s.substr(std::min(start, s.size())));
  if (!tail.empty()) out.push_back(tail);
  return out;
}

std::vector<std::string> words_of(std::string_view s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '\'' || u >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

json ref_json(const TripleRef& r) {
  return json{{"transcript_id", r.transcript_id}, {"line_number", r.line_number}};
}

TripleRef ref_from(const json& j) {
  return {j.at("transcript_id").get<std::string>(), j.at("line_number").get<std::size_t>()};
}

}  // namespace

TripleRef ref_of(const CandidateTriple& c) { return {c.transcript_id, c.line_number}; }

bool facts_match(const Triple& kg, const Triple& model) {
  return relation_key(kg.relation) == relation_key(model.relation) &&
         similarity(kg.subject, model.subject) >= kFactMatchThreshold &&
         similarity(kg.object, model.object) >= kFactMatchThreshold;
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::unknown_relation:
      return "unknown_relation";
    case ViolationKind::domain_mismatch:
      return "domain_mismatch";
    case ViolationKind::range_mismatch:
      return "range_mismatch";
  }
  return "unknown_relation";
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::contradicted:
      return "contradicted";
    case Verdict::unconfirmed:
      return "unconfirmed";
    case Verdict::confirmed:
      return "confirmed";
  }
  return "unconfirmed";
}

Typing typing_from_kg(const KnowledgeGraph& kg) {
  Typing typing;
  for (const auto& e : kg.entities()) {
    if (e.concept_name) typing.emplace(normalize_label(e.label), *e.concept_name);
  }
  return typing;
}

Typing infer_subject_typing(std::span<const CandidateTriple> candidates, const Ontology& ontology,
                            Typing base) {
  struct Tally {
    std::map<std::string, std::size_t> votes;
    std::map<std::string, std::size_t> first_seen;
  };
  std::map<std::string, Tally> tallies;
  std::size_t order = 0;
  for (const auto& c : candidates) {
    const Triple& t = c.effective();
    const RelationDef* rel = ontology.find_relation(t.relation);
    if (!rel) continue;
    const std::string key = normalize_label(t.subject);
    if (base.contains(key)) continue;
    auto& tally = tallies[key];
    ++tally.votes[rel->domain];
    tally.first_seen.emplace(rel->domain, order++);
  }
  for (const auto& [key, tally] : tallies) {
    const std::string* best = nullptr;
    std::size_t best_votes = 0, best_order = 0;
    for (const auto& [concept_name, votes] : tally.votes) {
      const std::size_t seen = tally.first_seen.at(concept_name);
      if (!best || votes > best_votes || (votes == best_votes && seen < best_order)) {
        best = &concept_name;
        best_votes = votes;
        best_order = seen;
      }
    }
    base.emplace(key, *best);
  }
  return base;
}

std::vector<Violation> check_conformance(std::span<const CandidateTriple> triples,
                                         const Ontology& ontology, const Typing& typing) {
  std::vector<Violation> out;
  for (const auto& c : triples) {
    const Triple& t = c.effective();
    const RelationDef* rel = ontology.find_relation(t.relation);
    if (!rel) {
      out.push_back({ref_of(c), ViolationKind::unknown_relation, "", t.relation});
      continue;
    }
    if (const auto it = typing.find(normalize_label(t.subject));
        it != typing.end() && text::fold(it->second) != text::fold(rel->domain)) {
      out.push_back({ref_of(c), ViolationKind::domain_mismatch, rel->domain, it->second});
    }
    if (!t.object_is_literal) {
      if (const auto it = typing.find(normalize_label(t.object));
          it != typing.end() && text::fold(it->second) != text::fold(rel->range)) {
        out.push_back({ref_of(c), ViolationKind::range_mismatch, rel->range, it->second});
      }
    }
  }
  return out;
}

std::vector<Violation> check_conformance(std::span<const CandidateTriple> triples,
                                         const Ontology& ontology, const KnowledgeGraph& kg) {
  return check_conformance(triples, ontology, typing_from_kg(kg));
}

std::vector<Cluster> find_duplicates(std::span<const CandidateTriple> triples, double threshold) {
  const std::size_t n = triples.size();
  std::vector<std::string> rel(n);
  for (std::size_t i = 0; i < n; ++i) rel[i] = relation_key(triples[i].effective().relation);

  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Triple& a = triples[i].effective();
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rel[i] != rel[j] || sets.find(i) == sets.find(j)) continue;
      const Triple& b = triples[j].effective();
      if (similarity(a.subject, b.subject) >= threshold && similarity(a.object, b.object) >= threshold) {
        sets.unite(i, j);
      }
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[sets.find(i)].push_back(i);

  std::vector<std::vector<std::size_t>> members;
  for (auto& [root, idx] : groups) {
    if (idx.size() >= 2) members.push_back(std::move(idx));
  }
  std::stable_sort(members.begin(), members.end(), [&](const auto& a, const auto& b) {
    return triples[a.front()].line_number < triples[b.front()].line_number;
  });
  std::vector<Cluster> clusters;
  for (const auto& idx : members) {
    Cluster c;
    for (std::size_t i : idx) c.push_back(ref_of(triples[i]));
    clusters.push_back(std::move(c));
  }
  return clusters;
}

std::vector<FactCheckVerdict> fact_check(std::span<const Triple> kg_triples, const ParseReport& flagged,
                                         const ParseReport* regenerated) {
  if (flagged.triples.empty() && !flagged.saw_none_sentinel) {
    throw Error(ErrorKind::input_format,
                "unparseable fact-check response: no triples and no NONE sentinel");
  }
  std::vector<FactCheckVerdict> verdicts;
  verdicts.reserve(kg_triples.size());
  for (const auto& t : kg_triples) {
    FactCheckVerdict v{t, Verdict::unconfirmed, std::nullopt};
    if (const auto* hit = first_match(t, flagged)) {
      v.verdict = Verdict::contradicted;
      v.evidence = hit->raw_line;
    } else if (regenerated) {
      if (const auto* hit2 = first_match(t, *regenerated)) {
        v.verdict = Verdict::confirmed;
        v.evidence = hit2->raw_line;
      }
    }
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

SessionMetrics compute_metrics(Mode mode, std::span<const CandidateTriple> candidates,
                               std::optional<std::size_t> gold_count) {
  SessionMetrics m;
  m.mode = mode;
  for (const auto& c : candidates) {
    if (c.status == CurationStatus::candidate) {
      throw CurationError("incomplete curation: candidate " + c.transcript_id + ":" +
                          std::to_string(c.line_number) + " " + format_triple(c.triple) +
                          " has no decision");
    }
    ++m.generated_count;
    if (c.status == CurationStatus::accepted || c.status == CurationStatus::edited) ++m.correct_count;
  }
  if (m.generated_count > 0) {
    m.precision = static_cast<double>(m.correct_count) / static_cast<double>(m.generated_count);
  }
  if (mode == Mode::extraction) {
    m.extracted_count = m.correct_count;
    m.gold_count = gold_count;
    if (gold_count) {
      if (*m.extracted_count > *gold_count) {
        throw PreconditionError("extracted " + std::to_string(*m.extracted_count) +
                                " facts but the gold count is only " + std::to_string(*gold_count));
      }
      if (*gold_count > 0) {
        m.recall = static_cast<double>(*m.extracted_count) / static_cast<double>(*gold_count);
      }
    }
  }
  return m;
}

json to_json(const SessionMetrics& m) {
  const auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  return json{{"mode", to_string(m.mode)},
              {"generated_count", m.generated_count},
              {"correct_count", m.correct_count},
              {"gold_count", opt(m.gold_count)},
              {"extracted_count", opt(m.extracted_count)},
              {"precision", opt(m.precision)},
              {"recall", opt(m.recall)}};
}

bool is_negation_cue(std::string_view word) {
  const std::string w = text::fold(word);
  if (w == "not" || w == "no" || w == "without" || w == "never") return true;
  return w.size() > 3 && w.ends_with("n't");
}

std::vector<NegationWarning> negation_warnings(std::span<const CandidateTriple> candidates,
                                               std::string_view source_text) {
  std::vector<NegationWarning> out;
  const auto sentences = sentences_of(source_text);
  for (const auto& c : candidates) {
    const std::string object = normalize_label(c.effective().object);
    if (object.empty()) continue;
    for (const auto sentence : sentences) {
      const std::string folded = text::fold(sentence);
      const auto pos = folded.find(object);
      if (pos == std::string::npos) continue;
      std::string cue;
      for (const auto& w : words_of(std::string_view(folded).substr(0, pos))) {
        if (is_negation_cue(w)) {
          cue = w;
          break;
        }
      }
      if (!cue.empty()) {
        out.push_back({ref_of(c), cue, std::string(sentence)});
        break;
      }
    }
  }
  return out;
}

json to_json(const ValidationReport& r) {
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"ref", ref_json(v.triple_ref)},
                          {"kind", to_string(v.kind)},
                          {"expected", v.expected},
                          {"found", v.found}});
  }
  json clusters = json::array();
  for (const auto& c : r.duplicate_clusters) {
    json members = json::array();
    for (const auto& ref : c) members.push_back(ref_json(ref));
    clusters.push_back(members);
  }
  json verdicts = json::array();
  for (const auto& v : r.verdicts) {
    verdicts.push_back({{"triple", to_json(v.kg_triple)},
                        {"verdict", to_string(v.verdict)},
                        {"evidence", v.evidence ? json(*v.evidence) : json(nullptr)}});
  }
  json negations = json::array();
  for (const auto& w : r.negation_warnings) {
    negations.push_back({{"ref", ref_json(w.triple_ref)}, {"cue", w.cue}, {"sentence", w.sentence}});
  }
  return json{{"violations", violations},
              {"duplicate_clusters", clusters},
              {"duplicate_threshold", r.duplicate_threshold},
              {"verdicts", verdicts},
              {"negation_warnings", negations}};
}

ValidationReport validation_report_from_json(const json& j) {
  ValidationReport r;
  for (const auto& v : j.at("violations")) {
    Violation out{ref_from(v.at("ref")), ViolationKind::unknown_relation, v.at("expected"), v.at("found")};
    const std::string kind = v.at("kind");
    for (auto k : {ViolationKind::unknown_relation, ViolationKind::domain_mismatch, ViolationKind::range_mismatch}) {
      if (to_string(k) == kind) out.kind = k;
    }
    r.violations.push_back(std::move(out));
  }
  for (const auto& c : j.at("duplicate_clusters")) {
    Cluster cluster;
    for (const auto& ref : c) cluster.push_back(ref_from(ref));
    r.duplicate_clusters.push_back(std::move(cluster));
  }
  r.duplicate_threshold = j.value("duplicate_threshold", kDefaultDuplicateThreshold);
  for (const auto& v : j.at("verdicts")) {
    FactCheckVerdict out{triple_from_json(v.at("triple")), Verdict::unconfirmed, std::nullopt};
    const std::string verdict = v.at("verdict");
    for (auto k : {Verdict::contradicted, Verdict::unconfirmed, Verdict::confirmed}) {
      if (to_string(k) == verdict) out.verdict = k;
    }
    if (!v.at("evidence").is_null()) out.evidence = v.at("evidence").get<std::string>();
    r.verdicts.push_back(std::move(out));
  }
  for (const auto& w : j.at("negation_warnings")) {
    r.negation_warnings.push_back({ref_from(w.at("ref")), w.at("cue"), w.at("sentence")});
  }
  return r;
}

}  // namespace ontoforge
