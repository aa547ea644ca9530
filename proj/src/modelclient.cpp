#include <httplib.h>

#include "ontoforge/modelclient.hpp"

#include <cmath>
#include <cstdlib>
#include <future>
#include <map>
#include <thread>

#include "ontoforge/fsio.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge {
namespace {

using nlohmann::json;

std::mutex& fixture_write_mutex(const std::filesystem::path& path) {
  static std::mutex registry_mutex;
  static std::map<std::string, std::unique_ptr<std::mutex>> registry;
  std::lock_guard lock(registry_mutex);
  auto& slot = registry[std::filesystem::absolute(path).lexically_normal().string()];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

// Splits "scheme://host[:port]/path" into "scheme://host[:port]" and "/path".
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw PreconditionError("endpoint URL '" + url + "' lacks a scheme");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw PreconditionError("endpoint URL scheme must be http or https");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool is_timeout(httplib::Error err) {
  return err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
         err == httplib::Error::Write;
}

class InFlightGuard {
 public:
  InFlightGuard(std::atomic<std::size_t>& in_flight, std::atomic<std::size_t>& max_seen)
      : in_flight_(in_flight) {
    const std::size_t now = in_flight_.fetch_add(1) + 1;
    std::size_t prev = max_seen.load();
    while (now > prev && !max_seen.compare_exchange_weak(prev, now)) {
    }
  }
  ~InFlightGuard() { in_flight_.fetch_sub(1); }
  InFlightGuard(const InFlightGuard&) = delete;
  InFlightGuard& operator=(const InFlightGuard&) = delete;

 private:
  std::atomic<std::size_t>& in_flight_;
};

}  // namespace

std::string_view to_string(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::http:
      return "http";
    case BackendKind::replay:
      return "replay";
    case BackendKind::scripted:
      return "scripted";
  }
  return "replay";
}

std::optional<BackendKind> parse_backend_kind(std::string_view s) noexcept {
  for (auto k : {BackendKind::http, BackendKind::replay, BackendKind::scripted}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

void BackendConfig::validate() const {
  if (max_parallel == 0) throw PreconditionError("max_parallel must be positive");
  if (request_timeout.count() <= 0) throw PreconditionError("request_timeout must be positive");
  switch (kind) {
    case BackendKind::http:
      if (!endpoint_url || endpoint_url->empty()) {
        throw PreconditionError("http backend requires an endpoint URL");
      }
      if (model_name.empty()) throw PreconditionError("http backend requires a model name");
      split_url(*endpoint_url);
      break;
    case BackendKind::replay:
      if (!fixture_dir) throw PreconditionError("replay backend requires a fixture directory");
      break;
    case BackendKind::scripted:
      break;
  }
}

json to_json(const ModelTranscript& t) {
  return json{{"request_id", t.request_id},       {"mode", to_string(t.mode)},
              {"prompt_text", t.prompt_text},     {"response_text", t.response_text},
              {"backend_kind", t.backend_kind},   {"timestamp", t.timestamp},
              {"attempt_count", t.attempt_count}};
}

ModelTranscript transcript_from_json(const json& j) {
  ModelTranscript t;
  t.request_id = j.at("request_id").get<std::string>();
  const auto mode = parse_mode(j.at("mode").get<std::string>());
  if (!mode) throw Error(ErrorKind::input_format, "transcript has an unknown mode");
  t.mode = *mode;
  t.prompt_text = j.at("prompt_text").get<std::string>();
  t.response_text = j.at("response_text").get<std::string>();
  t.backend_kind = j.value("backend_kind", "");
  t.timestamp = j.value("timestamp", "");
  t.attempt_count = j.value("attempt_count", 1u);
  return t;
}

std::string compute_request_id(Mode mode, std::string_view prompt_text, std::string_view model_name) {
  std::string material(to_string(mode));
  material += '\0';
  material += model_name;
  material += '\0';
  material += prompt_text;
  return text::sha256_hex(material);
}

std::chrono::milliseconds backoff_delay(const BackendConfig& config, unsigned retry,
                                        std::mt19937& rng) {
  const double base = static_cast<double>(config.backoff_base.count()) *
                      std::pow(config.backoff_factor, static_cast<double>(retry));
  double scale = 1.0;
  if (config.backoff_jitter > 0) {
    std::uniform_real_distribution<double> dist(1.0 - config.backoff_jitter, 1.0 + config.backoff_jitter);
    scale = dist(rng);
  }
  return std::chrono::milliseconds(static_cast<long long>(std::llround(base * scale)));
}

// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(BackendConfig config)
    : config_(std::move(config)), rng_(std::random_device{}()) {
  config_.validate();
  std::tie(base_url_, path_) = split_url(*config_.endpoint_url);
}

BackendReply HttpBackend::send(const PromptRequest& request, const std::string& request_id) {
  httplib::Client client(base_url_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(config_.request_timeout);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env_var.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const json body{{"model", config_.model_name},
                  {"messages", json::array({json{{"role", "user"}, {"content", request.prompt_text}}})},
                  {"temperature", config_.temperature}};
  const std::string payload = body.dump(-1, ' ', false, json::error_handler_t::replace);

  std::string last_problem;
  bool last_was_timeout = false;
  const unsigned total_attempts = config_.max_retries + 1;
  for (unsigned attempt = 1; attempt <= total_attempts; ++attempt) {
    auto res = client.Post(path_, headers, payload, "application/json");
    std::optional<std::chrono::milliseconds> retry_after;
    if (!res) {
      last_was_timeout = is_timeout(res.error());
      last_problem = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 401 || res->status == 403) {
      throw BackendError(BackendFailure::auth, "model endpoint rejected credentials (HTTP " +
                                                   std::to_string(res->status) + ") for request " +
                                                   request_id);
    } else if (res->status == 429 || res->status >= 500) {
      last_was_timeout = false;
      last_problem = "HTTP " + std::to_string(res->status);
      if (res->has_header("Retry-After")) {
        char* end = nullptr;
        const std::string v = res->get_header_value("Retry-After");
        const double secs = std::strtod(v.c_str(), &end);
        if (end != v.c_str() && secs >= 0 && secs <= 60) {
          retry_after = std::chrono::milliseconds(static_cast<long long>(secs * 1000));
        }
      }
    } else if (res->status != 200) {
      throw BackendError(BackendFailure::bad_response,
                         "model endpoint answered HTTP " + std::to_string(res->status));
    } else {
      try {
        const json reply = json::parse(res->body);
        return {reply.at("choices").at(0).at("message").at("content").get<std::string>(), attempt};
      } catch (const json::exception& e) {
        throw BackendError(BackendFailure::bad_response,
                           std::string("unexpected chat-completion response: ") + e.what());
      }
    }
    if (attempt < total_attempts) {
      std::chrono::milliseconds delay;
      {
        std::lock_guard lock(rng_mutex_);
        delay = backoff_delay(config_, attempt - 1, rng_);
      }
      if (retry_after && *retry_after > delay) delay = *retry_after;
      std::this_thread::sleep_for(delay);
    }
  }
  if (last_was_timeout) {
    throw BackendError(BackendFailure::timeout, "request " + request_id + " timed out after " +
                                                    std::to_string(total_attempts) + " attempts");
  }
  throw BackendError(BackendFailure::retries_exhausted,
                     "request " + request_id + " failed after " + std::to_string(total_attempts) +
                         " attempts (" + last_problem + ")");
}

BackendReply ReplayBackend::send(const PromptRequest&, const std::string& request_id) {
  const auto path = dir_ / (request_id + ".json");
  if (!std::filesystem::exists(path)) {
    throw BackendError(BackendFailure::fixture_missing,
                       "no replay fixture for request_id " + request_id + " in " + dir_.string());
  }
  try {
    const json j = json::parse(fsio::read_file(path));
    if (j.at("request_id").get<std::string>() != request_id) {
      throw BackendError(BackendFailure::bad_response, "fixture " + path.string() + " has a mismatched request_id");
    }
    return {j.at("response_text").get<std::string>(), 1};
  } catch (const json::exception& e) {
    throw BackendError(BackendFailure::bad_response, "malformed fixture " + path.string() + ": " + e.what());
  }
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses) : responses_(std::move(responses)) {}

ScriptedBackend::ScriptedBackend(Responder responder) : responder_(std::move(responder)) {}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& script) {
  const json j = json::parse(fsio::read_file(script), nullptr, false);
  if (!j.is_array()) {
    throw Error(ErrorKind::input_format, "script " + script.string() + " must be a JSON array of strings");
  }
  std::vector<std::string> responses;
  for (const auto& item : j) {
    if (!item.is_string()) {
      throw Error(ErrorKind::input_format, "script " + script.string() + " must contain only strings");
    }
    responses.push_back(item.get<std::string>());
  }
  return std::make_shared<ScriptedBackend>(std::move(responses));
}

BackendReply ScriptedBackend::send(const PromptRequest& request, const std::string&) {
  InFlightGuard guard(in_flight_, max_in_flight_);
  calls_.fetch_add(1);
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  if (responder_) return {responder_(request), 1};
  std::lock_guard lock(mutex_);
  if (next_ >= responses_.size()) {
    throw BackendError(BackendFailure::script_exhausted, "scripted backend has no response left");
  }
  return {responses_[next_++], 1};
}

// ---------------------------------------------------------------------------

namespace {

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  config.validate();
  switch (config.kind) {
    case BackendKind::http:
      return std::make_shared<HttpBackend>(config);
    case BackendKind::replay:
      return std::make_shared<ReplayBackend>(*config.fixture_dir);
    case BackendKind::scripted:
      if (!config.script_path) {
        throw PreconditionError("scripted backend requires a script file");
      }
      return ScriptedBackend::from_file(*config.script_path);
  }
  throw PreconditionError("unknown backend kind");
}

}  // namespace

ModelClient::ModelClient(BackendConfig config) : ModelClient(config, make_backend(config)) {}

ModelClient::ModelClient(BackendConfig config, std::shared_ptr<Backend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {
  if (config_.max_parallel == 0) throw PreconditionError("max_parallel must be positive");
  slots_ = std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(config_.max_parallel));
}

ModelTranscript ModelClient::complete(const PromptRequest& request) {
  ModelTranscript t;
  t.request_id = compute_request_id(request.mode, request.prompt_text, config_.model_name);
  t.mode = request.mode;
  t.prompt_text = request.prompt_text;
  t.backend_kind = std::string(to_string(backend_->kind()));
  slots_->acquire();
  try {
    BackendReply reply = backend_->send(request, t.request_id);
    slots_->release();
    t.response_text = std::move(reply.text);
    t.attempt_count = reply.attempts;
  } catch (...) {
    slots_->release();
    throw;
  }
  t.timestamp = text::utc_timestamp();
  return t;
}

ModelTranscript ModelClient::record(const PromptRequest& request, const std::filesystem::path& fixture_dir,
                                    const std::optional<std::string>& provenance) {
  ModelTranscript t = complete(request);
  write_fixture(fixture_dir, t, config_.model_name, provenance);
  return t;
}

BatchResult ModelClient::complete_all(std::span<const PromptRequest> requests) {
  BatchResult result;
  result.transcripts.resize(requests.size());
  std::vector<std::exception_ptr> errors(requests.size());
  std::vector<std::future<void>> futures;
  futures.reserve(requests.size());
  // Each task blocks on the semaphore inside complete(), which caps concurrency.
  for (std::size_t i = 0; i < requests.size(); ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] {
      try {
        result.transcripts[i] = complete(requests[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }));
  }
  for (auto& f : futures) f.get();
  for (auto& e : errors) {
    if (e) {
      result.first_error = e;
      break;
    }
  }
  return result;
}

void write_fixture(const std::filesystem::path& dir, const ModelTranscript& transcript,
                   std::string_view model_name, const std::optional<std::string>& provenance) {
  const auto path = dir / (transcript.request_id + ".json");
  json j{{"request_id", transcript.request_id},
         {"mode", to_string(transcript.mode)},
         {"model_name", model_name},
         {"recorded_at", transcript.timestamp},
         {"prompt_text", transcript.prompt_text},
         {"response_text", transcript.response_text}};
  if (provenance) j["provenance"] = *provenance;
  std::lock_guard lock(fixture_write_mutex(path));
  try {
    fsio::write_file_atomic(path, j.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
  } catch (const Error& e) {
    throw BackendError(BackendFailure::write_failed, e.what());
  }
}

}  // namespace ontoforge
