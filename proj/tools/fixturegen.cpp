// Regenerates data/fixtures and data/labels from data/scenarios.
//
// Each scenario is run through the real pipeline with a scripted backend
// that answers with the authored responses, so the fixture request ids are
// exactly the ones a replay run will ask for.
#include <CLI11.hpp>

#include <iostream>

#include "ontoforge/fsio.hpp"
#include "scenario.hpp"

namespace fs = std::filesystem;
using namespace ontoforge;

namespace {
constexpr const char* kRecordedAt = "2023-06-01T00:00:00Z";
}

int main(int argc, char** argv) {
  CLI::App app{"Write replay fixtures and label files for the bundled scenarios"};
  fs::path data_dir = "data";
  app.add_option("--data", data_dir, "data directory")->check(CLI::ExistingDirectory)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json index = nlohmann::json::object();
    for (const auto& s : scenarios::load_all(data_dir)) {
      BackendConfig cfg;
      cfg.kind = BackendKind::scripted;
      auto backend = std::make_shared<ScriptedBackend>([&s](const PromptRequest& r) {
        const std::size_t i = scenarios::response_index(r);
        if (i >= s.responses.size()) throw PreconditionError("scenario '" + s.name + "' lacks response " +
                                                             std::to_string(i + 1));
        return s.responses[i];
      });
      ModelClient client(cfg, backend);
      PipelineOptions opts;
      opts.persist = false;
      SessionState session = scenarios::run_scenario(s, client, opts);

      nlohmann::json ids = nlohmann::json::array();
      for (auto t : session.transcripts) {
        t.timestamp = kRecordedAt;
        write_fixture(data_dir / "fixtures", t, cfg.model_name, s.provenance);
        ids.push_back(t.request_id);
      }
      index[s.name] = ids;
      const auto decisions = scenarios::scenario_decisions(s, session);
      fsio::write_file_atomic(data_dir / "labels" / (s.name + ".labels.jsonl"), write_label_file(decisions));
      std::cout << s.name << ": " << session.transcripts.size() << " prompt(s), " << session.candidates.size()
                << " candidate(s), " << s.reject.size() << " rejected\n";
    }
    fsio::write_file_atomic(data_dir / "fixtures" / "index.json", index.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "fixturegen: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
