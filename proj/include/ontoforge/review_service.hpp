#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontoforge/session.hpp"

namespace httplib {
class Server;
}

namespace ontoforge {

struct ReviewOptions {
  std::string host = "127.0.0.1";
  int port = 7341;  // 0 picks a free port
  std::optional<std::filesystem::path> static_dir;  // UI assets served under "/"
};

/// Human-in-the-loop curation backend for one session directory. Decisions
/// are validated, appended to decisions.jsonl and applied under one lock, so
/// the log is the single source of truth for candidate statuses.
class ReviewService {
 public:
  explicit ReviewService(std::filesystem::path session_dir, ReviewOptions options = {});
  ~ReviewService();

  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  /// Binds and serves on a background thread. Throws Error(usage) on bind failure.
  void start();
  void stop();
  int port() const noexcept { return bound_port_; }

  // Handler bodies, callable directly.
  nlohmann::json session_summary() const;
  nlohmann::json candidates(const std::optional<std::string>& status,
                            const std::optional<std::string>& violation) const;
  nlohmann::json candidate(const std::string& transcript_id, std::size_t line_number) const;
  nlohmann::json decide(const std::string& transcript_id, std::size_t line_number, const nlohmann::json& body);
  nlohmann::json clusters() const;
  nlohmann::json keep_first(std::size_t cluster_id);
  nlohmann::json metrics() const;
  nlohmann::json export_now();

  std::vector<CandidateTriple> current_candidates() const;
  const SessionState& pristine() const noexcept { return session_; }

 private:
  nlohmann::json record_for(const CandidateTriple& c) const;
  void append_and_apply(const std::vector<Decision>& batch);

  std::filesystem::path dir_;
  ReviewOptions options_;
  SessionState session_;                 // as written by the pipeline; never mutated
  std::vector<CandidateTriple> current_;  // session_ + decision log
  mutable std::mutex mutex_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int bound_port_ = 0;
};

}  // namespace ontoforge
