#include <httplib.h>

#include "ontoforge/review_service.hpp"

#include <chrono>
#include <map>

#include "ontoforge/error.hpp"
#include "ontoforge/fsio.hpp"
#include "ontoforge/pipeline.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge {
namespace {

using nlohmann::json;

class HttpStatusError : public std::runtime_error {
 public:
  HttpStatusError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }

 private:
  int status_;
  std::string code_;
};

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    send_json(res, fn());
  } catch (const HttpStatusError& e) {
    send_json(res, {{"error", e.code()}, {"message", e.what()}}, e.status());
  } catch (const UnknownCandidate& e) {
    send_json(res, {{"error", "not_found"}, {"message", e.what()}}, 404);
  } catch (const DecisionConflict& e) {
    send_json(res, {{"error", "conflict"}, {"message", e.what()}}, 409);
  } catch (const CurationError& e) {
    send_json(res, {{"error", "incomplete_curation"}, {"message", e.what()}}, 409);
  } catch (const json::exception& e) {
    send_json(res, {{"error", "bad_request"}, {"message", e.what()}}, 400);
  } catch (const Error& e) {
    send_json(res, {{"error", "bad_request"}, {"message", e.what()}}, 400);
  } catch (const std::exception& e) {
    send_json(res, {{"error", "internal"}, {"message", e.what()}}, 500);
  }
}

std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  std::string v = req.get_param_value(key);
  if (v.empty()) return std::nullopt;
  return v;
}

constexpr const char* kPlaceholderPage =
    "<!doctype html><title>ontoforge review</title>"
    "<p>The review UI assets are not installed. The JSON API is available under /api/.</p>";

}  // namespace

ReviewService::ReviewService(std::filesystem::path session_dir, ReviewOptions options)
    : dir_(std::move(session_dir)), options_(std::move(options)), session_(load_session(dir_)) {
  for (const auto& c : session_.candidates) {
    if (c.status != CurationStatus::candidate) {
      throw Error(ErrorKind::input_format, "session.json must hold pristine candidates");
    }
  }
  current_ = replay_decisions(session_.candidates, read_decision_log(dir_ / kDecisionLog));
}

ReviewService::~ReviewService() { stop(); }

json ReviewService::record_for(const CandidateTriple& c) const {
  json j = to_json(c);
  const TripleRef ref = ref_of(c);
  json violations = json::array();
  json cluster = nullptr;
  json negation = nullptr;
  if (session_.report) {
    for (const auto& v : session_.report->violations) {
      if (v.triple_ref == ref) {
        violations.push_back({{"kind", to_string(v.kind)}, {"expected", v.expected}, {"found", v.found}});
      }
    }
    const auto& clusters = session_.report->duplicate_clusters;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t k = 0; k < clusters[i].size(); ++k) {
        if (clusters[i][k] == ref) cluster = {{"id", i + 1}, {"position", k + 1}, {"size", clusters[i].size()}};
      }
    }
    for (const auto& w : session_.report->negation_warnings) {
      if (w.triple_ref == ref) negation = {{"cue", w.cue}, {"sentence", w.sentence}};
    }
  }
  j["violations"] = violations;
  j["cluster"] = cluster;
  j["negation_warning"] = negation;
  j["needs_review"] = !negation.is_null();
  return j;
}

json ReviewService::session_summary() const {
  std::lock_guard lock(mutex_);
  std::size_t remaining = 0;
  for (const auto& c : current_) remaining += c.status == CurationStatus::candidate;
  json relations = json::array();
  if (session_.ontology_path) {
    try {
      for (const auto& r : load_ontology_file(*session_.ontology_path).relations()) relations.push_back(r.name);
    } catch (const Error&) {
    }
  }
  return json{{"session_id", session_.session_id},
              {"mode", to_string(session_.mode)},
              {"ontology_path", session_.ontology_path ? json(*session_.ontology_path) : json(nullptr)},
              {"kg_path", session_.kg_path ? json(*session_.kg_path) : json(nullptr)},
              {"topic", session_.topic ? json(*session_.topic) : json(nullptr)},
              {"candidate_count", current_.size()},
              {"remaining_count", remaining},
              {"cluster_count", session_.report ? session_.report->duplicate_clusters.size() : 0},
              {"relations", relations},
              {"error", session_.error ? json(*session_.error) : json(nullptr)}};
}

json ReviewService::candidates(const std::optional<std::string>& status,
                               const std::optional<std::string>& violation) const {
  if (status && !parse_status(*status)) {
    throw HttpStatusError(400, "bad_request", "unknown status filter '" + *status + "'");
  }
  std::lock_guard lock(mutex_);
  json out = json::array();
  for (const auto& c : current_) {
    if (status && to_string(c.status) != *status) continue;
    json rec = record_for(c);
    if (violation) {
      bool hit = false;
      for (const auto& v : rec.at("violations")) hit = hit || v.at("kind") == *violation;
      if (!hit) continue;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

json ReviewService::candidate(const std::string& transcript_id, std::size_t line_number) const {
  std::lock_guard lock(mutex_);
  for (const auto& c : current_) {
    if (c.transcript_id == transcript_id && c.line_number == line_number) return record_for(c);
  }
  throw UnknownCandidate("no candidate " + transcript_id + ":" + std::to_string(line_number));
}

void ReviewService::append_and_apply(const std::vector<Decision>& batch) {
  // Caller holds mutex_. Validate everything on a copy first so a failing
  // decision leaves both the log and the in-memory state untouched.
  auto next = current_;
  for (const auto& d : batch) apply_decision(next, d);
  std::string lines;
  for (const auto& d : batch) lines += to_json(d).dump() + (&d == &batch.back() ? "" : "\n");
  fsio::append_line(dir_ / kDecisionLog, lines);
  current_ = std::move(next);
}

json ReviewService::decide(const std::string& transcript_id, std::size_t line_number, const json& body) {
  Decision d;
  d.transcript_id = transcript_id;
  d.line_number = line_number;
  const std::string action = body.contains("action") ? body.at("action").get<std::string>()
                                                     : body.at("decision").get<std::string>();
  const auto parsed = parse_action(action);
  if (!parsed) throw HttpStatusError(400, "bad_request", "unknown action '" + action + "'");
  d.action = *parsed;
  if (body.contains("replacement") && !body.at("replacement").is_null()) {
    d.replacement = triple_from_json(body.at("replacement"));
  }
  if ((d.action == DecisionAction::edit) != d.replacement.has_value()) {
    throw HttpStatusError(400, "bad_request", "edit requires a replacement; accept and reject forbid one");
  }
  d.decided_at = text::utc_timestamp();
  {
    std::lock_guard lock(mutex_);
    append_and_apply({d});
  }
  return candidate(transcript_id, line_number);
}

json ReviewService::clusters() const {
  std::lock_guard lock(mutex_);
  json out = json::array();
  if (!session_.report) return out;
  const auto& clusters = session_.report->duplicate_clusters;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    json members = json::array();
    for (const auto& ref : clusters[i]) {
      for (const auto& c : current_) {
        if (ref_of(c) == ref) members.push_back(record_for(c));
      }
    }
    out.push_back({{"id", i + 1}, {"members", members}});
  }
  return out;
}

json ReviewService::keep_first(std::size_t cluster_id) {
  {
    std::lock_guard lock(mutex_);
    if (!session_.report || cluster_id == 0 || cluster_id > session_.report->duplicate_clusters.size()) {
      throw HttpStatusError(404, "not_found", "no duplicate cluster " + std::to_string(cluster_id));
    }
    const auto& cluster = session_.report->duplicate_clusters[cluster_id - 1];
    std::vector<Decision> batch;
    const std::string now = text::utc_timestamp();
    for (std::size_t k = 1; k < cluster.size(); ++k) {
      batch.push_back({cluster[k].transcript_id, cluster[k].line_number, DecisionAction::reject, std::nullopt, now});
    }
    append_and_apply(batch);  // any member already decided -> DecisionConflict, nothing applied
  }
  return clusters().at(cluster_id - 1);
}

json ReviewService::metrics() const {
  std::lock_guard lock(mutex_);
  std::size_t correct = 0, decided = 0;
  for (const auto& c : current_) {
    if (c.status == CurationStatus::candidate) continue;
    ++decided;
    if (c.status == CurationStatus::accepted || c.status == CurationStatus::edited) ++correct;
  }
  json j{{"mode", to_string(session_.mode)},
         {"generated_count", current_.size()},
         {"correct_count", correct},
         {"decided_count", decided},
         {"remaining_count", current_.size() - decided},
         {"gold_count", nullptr},
         {"extracted_count", nullptr},
         {"precision", decided > 0 ? json(static_cast<double>(correct) / static_cast<double>(decided)) : json(nullptr)},
         {"recall", nullptr}};
  if (session_.mode == Mode::extraction) {
    j["extracted_count"] = correct;
    if (session_.gold_count) {
      j["gold_count"] = *session_.gold_count;
      if (*session_.gold_count > 0) {
        j["recall"] = static_cast<double>(correct) / static_cast<double>(*session_.gold_count);
      }
    }
  }
  return j;
}

json ReviewService::export_now() {
  std::vector<Decision> log;
  {
    std::lock_guard lock(mutex_);
    log = read_decision_log(dir_ / kDecisionLog);
  }
  ExportOptions opts;
  opts.out_dir = dir_ / "export";
  const ExportResult r = export_session(session_, log, opts);
  json j = to_json(r.metrics);
  j["kg_triples"] = r.kg.triples().size();
  j["files"] = {r.kgl_path.string(), r.nt_path.string(), r.ttl_path.string(), r.metrics_path.string()};
  return j;
}

std::vector<CandidateTriple> ReviewService::current_candidates() const {
  std::lock_guard lock(mutex_);
  return current_;
}

void ReviewService::start() {
  if (server_) return;
  server_ = std::make_unique<httplib::Server>();
  auto& srv = *server_;
  // httplib's default also sets SO_REUSEPORT, which lets a second service share the port silently.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });

  srv.Get("/api/session", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return session_summary(); });
  });
  srv.Get("/api/candidates", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return candidates(param(req, "status"), param(req, "violations")); });
  });
  srv.Get(R"(/api/candidates/([0-9A-Za-z_.-]+)/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return candidate(req.matches[1], std::stoul(req.matches[2])); });
  });
  srv.Post(R"(/api/candidates/([0-9A-Za-z_.-]+)/(\d+)/decision)",
           [this](const httplib::Request& req, httplib::Response& res) {
             guarded(res, [&] { return decide(req.matches[1], std::stoul(req.matches[2]), json::parse(req.body)); });
           });
  srv.Get("/api/clusters", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return clusters(); });
  });
  const auto keep_first_handler = [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return keep_first(std::stoul(req.matches[1])); });
  };
  srv.Post(R"(/api/clusters/(\d+)/keep-first)", keep_first_handler);
  srv.Post(R"(/api/cluster/(\d+)/keep-first)", keep_first_handler);
  srv.Get("/api/metrics", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return metrics(); });
  });
  srv.Post("/api/export", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return export_now(); });
  });
  if (options_.static_dir && srv.set_mount_point("/", options_.static_dir->string())) {
    // assets served from disk
  } else {
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html");
    });
  }

  if (options_.port == 0) {
    bound_port_ = srv.bind_to_any_port(options_.host);
  } else {
    bound_port_ = srv.bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (bound_port_ <= 0) {
    server_.reset();
    throw Error(ErrorKind::usage, "cannot bind review service to " + options_.host + ":" +
                                      std::to_string(options_.port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void ReviewService::stop() {
  if (!server_) return;
  server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

}  // namespace ontoforge
