#include "scenario.hpp"

#include <algorithm>

#include "ontoforge/fsio.hpp"

namespace ontoforge::scenarios {

namespace fs = std::filesystem;
using nlohmann::json;

Scenario load_scenario(const fs::path& file, const fs::path& data_dir) {
  const json j = json::parse(fsio::read_file(file));
  Scenario s;
  s.name = j.at("name").get<std::string>();
  s.mode = j.at("mode").get<std::string>();
  s.ontology = data_dir / j.at("ontology").get<std::string>();
  if (j.contains("kg")) s.kg = data_dir / j.at("kg").get<std::string>();
  if (j.contains("corpus")) s.corpus = data_dir / j.at("corpus").get<std::string>();
  s.subject = j.value("subject", "");
  s.relation = j.value("relation", "");
  s.entity = j.value("entity", "");
  s.topic = j.value("topic", "");
  if (j.contains("max_triples")) s.max_triples = j.at("max_triples").get<std::size_t>();
  s.max_slots = j.value("max_slots", std::size_t{1});
  for (const auto& d : j.value("demonstrators", json::array())) {
    s.demonstrators.push_back({d.at(0).get<std::string>(), d.at(1).get<std::string>(), d.at(2).get<std::string>(),
                               false});
  }
  if (j.contains("gold")) s.gold = j.at("gold").get<std::size_t>();
  s.provenance = j.value("provenance", "");
  for (const auto& r : j.at("responses")) {
    std::string text;
    for (const auto& line : r) text += line.get<std::string>() + "\n";
    s.responses.push_back(std::move(text));
  }
  s.reject = j.value("reject", std::vector<std::size_t>{});
  return s;
}

std::vector<Scenario> load_all(const fs::path& data_dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(data_dir / "scenarios")) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Scenario> out;
  for (const auto& f : files) out.push_back(load_scenario(f, data_dir));
  return out;
}

SessionState run_scenario(const Scenario& s, ModelClient& client, PipelineOptions options) {
  if (!options.session_id) options.session_id = s.name;
  if (s.max_triples) options.max_triples = *s.max_triples;
  Pipeline p(client, PromptGenerator{}, options);
  if (s.mode == "completion") return p.run_completion(s.ontology, s.subject, s.relation);
  if (s.mode == "gapfill") return p.run_complete(s.kg.value(), s.ontology, s.max_slots);
  if (s.mode == "construct") return p.run_construct(s.ontology, s.topic);
  if (s.mode == "extraction") {
    return p.run_extract(s.corpus.value(), s.ontology, s.entity, s.relation, s.demonstrators, s.gold);
  }
  if (s.mode == "factcheck") return p.run_factcheck(s.kg.value(), s.ontology);
  throw PreconditionError("scenario '" + s.name + "' has unknown mode '" + s.mode + "'");
}

std::vector<Decision> scenario_decisions(const Scenario& s, const SessionState& session) {
  std::vector<Decision> out;
  for (std::size_t i = 0; i < session.candidates.size(); ++i) {
    const auto& c = session.candidates[i];
    const bool rejected = std::find(s.reject.begin(), s.reject.end(), i + 1) != s.reject.end();
    out.push_back({c.transcript_id, c.line_number, rejected ? DecisionAction::reject : DecisionAction::accept,
                   std::nullopt, ""});
  }
  return out;
}

std::size_t response_index(const PromptRequest& request) {
  if (auto it = request.slots.find("chunk"); it != request.slots.end()) {
    return std::stoul(it->second.substr(0, it->second.find('/'))) - 1;
  }
  if (auto it = request.slots.find("source_id"); it != request.slots.end()) {
    return std::stoul(it->second.substr(it->second.rfind('#') + 1)) - 1;
  }
  return 0;
}

}  // namespace ontoforge::scenarios
