#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontoforge/error.hpp"
#include "ontoforge/promptgen.hpp"

namespace ontoforge {

enum class BackendKind { http, replay, scripted };

std::string_view to_string(BackendKind kind) noexcept;
std::optional<BackendKind> parse_backend_kind(std::string_view s) noexcept;

inline constexpr std::string_view kDefaultApiKeyEnvVar = "ONTOFORGE_API_KEY";
inline constexpr std::string_view kDefaultModelName = "gpt-3.5-turbo";

struct BackendConfig {
  BackendKind kind = BackendKind::replay;
  std::optional<std::string> endpoint_url;  // full chat-completions URL
  std::string api_key_env_var = std::string(kDefaultApiKeyEnvVar);
  std::string model_name = std::string(kDefaultModelName);
  std::optional<std::filesystem::path> fixture_dir;
  std::optional<std::filesystem::path> script_path;  // JSON array of canned responses
  unsigned max_retries = 3;
  std::chrono::duration<double> request_timeout{60.0};
  unsigned max_parallel = 4;
  double temperature = 0.0;

  // Exponential backoff: base * factor^retry, scaled by a uniform factor in [1 - jitter, 1 + jitter].
  std::chrono::milliseconds backoff_base{1000};
  double backoff_factor = 2.0;
  double backoff_jitter = 0.2;

  /// Throws PreconditionError when a kind-specific field is missing.
  void validate() const;
};

struct ModelTranscript {
  std::string request_id;
  Mode mode = Mode::completion;
  std::string prompt_text;
  std::string response_text;
  std::string backend_kind;
  std::string timestamp;  // UTC, ISO 8601
  unsigned attempt_count = 1;
};

nlohmann::json to_json(const ModelTranscript& t);
ModelTranscript transcript_from_json(const nlohmann::json& j);

enum class BackendFailure {
  fixture_missing,
  auth,
  retries_exhausted,
  timeout,
  bad_response,
  script_exhausted,
  write_failed,
};

class BackendError : public Error {
 public:
  BackendError(BackendFailure failure, const std::string& message)
      : Error(ErrorKind::backend, message), failure_(failure) {}

  BackendFailure failure() const noexcept { return failure_; }

 private:
  BackendFailure failure_;
};

/// Hex SHA-256 over mode, model name and prompt text.
std::string compute_request_id(Mode mode, std::string_view prompt_text, std::string_view model_name);

/// Delay before retry number `retry` (0-based).
std::chrono::milliseconds backoff_delay(const BackendConfig& config, unsigned retry, std::mt19937& rng);

struct BackendReply {
  std::string text;
  unsigned attempts = 1;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendReply send(const PromptRequest& request, const std::string& request_id) = 0;
  virtual BackendKind kind() const noexcept = 0;
};

/// OpenAI-style chat-completion endpoint with retry on transport errors,
/// HTTP 429 and 5xx. 401/403 fail immediately.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);
  BackendReply send(const PromptRequest& request, const std::string& request_id) override;
  BackendKind kind() const noexcept override { return BackendKind::http; }

 private:
  BackendConfig config_;
  std::string base_url_;
  std::string path_;
  std::mutex rng_mutex_;
  std::mt19937 rng_;
};

/// Answers from `<fixture_dir>/<request_id>.json`. Read-only.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::filesystem::path fixture_dir) : dir_(std::move(fixture_dir)) {}
  BackendReply send(const PromptRequest& request, const std::string& request_id) override;
  BackendKind kind() const noexcept override { return BackendKind::replay; }

 private:
  std::filesystem::path dir_;
};

/// Canned responses for tests and fixture authoring. Tracks how many calls
/// are in flight at once.
class ScriptedBackend : public Backend {
 public:
  using Responder = std::function<std::string(const PromptRequest&)>;

  /// Serves the responses in order; running out is a script_exhausted error.
  explicit ScriptedBackend(std::vector<std::string> responses);
  explicit ScriptedBackend(Responder responder);

  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& script);

  BackendReply send(const PromptRequest& request, const std::string& request_id) override;
  BackendKind kind() const noexcept override { return BackendKind::scripted; }

  void set_delay(std::chrono::milliseconds delay) { delay_ = delay; }
  std::size_t calls() const noexcept { return calls_.load(); }
  std::size_t max_in_flight() const noexcept { return max_in_flight_.load(); }

 private:
  std::mutex mutex_;
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
  Responder responder_;
  std::chrono::milliseconds delay_{0};
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> max_in_flight_{0};
};

struct BatchResult {
  std::vector<std::optional<ModelTranscript>> transcripts;  // input order
  std::exception_ptr first_error;                           // lowest failing index
};

/// Executes prompts against one backend, never more than max_parallel at once.
class ModelClient {
 public:
  explicit ModelClient(BackendConfig config);
  ModelClient(BackendConfig config, std::shared_ptr<Backend> backend);

  ModelTranscript complete(const PromptRequest& request);

  /// Runs complete() and persists the result as a replay fixture.
  ModelTranscript record(const PromptRequest& request, const std::filesystem::path& fixture_dir,
                         const std::optional<std::string>& provenance = std::nullopt);

  BatchResult complete_all(std::span<const PromptRequest> requests);

  const BackendConfig& config() const noexcept { return config_; }
  Backend& backend() noexcept { return *backend_; }

 private:
  BackendConfig config_;
  std::shared_ptr<Backend> backend_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

/// Writes `<dir>/<request_id>.json` via a temporary file and rename.
void write_fixture(const std::filesystem::path& dir, const ModelTranscript& transcript,
                   std::string_view model_name, const std::optional<std::string>& provenance);

}  // namespace ontoforge
