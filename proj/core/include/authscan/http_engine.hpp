#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "authscan/api_model.hpp"

namespace authscan {

struct HttpRequestRecord {
  HttpMethod method = HttpMethod::Get;
  std::string url;  // absolute
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponseRecord {
  int status = 0;
  std::map<std::string, std::string> headers;
  std::string body;
};

// One request/response pair. Exactly one of response / transport_error is
// set once the interaction completed.
struct HttpInteraction {
  std::size_t sequence_index = 0;
  std::string operation_id;
  HttpRequestRecord request;
  std::optional<HttpResponseRecord> response;
  std::int64_t sent_at_ms = 0;
  std::int64_t received_at_ms = 0;
  std::map<std::string, std::string> annotation;
  std::optional<std::string> transport_error;

  bool completed() const { return response.has_value(); }
  bool succeeded_2xx() const {
    return response.has_value() && response->status >= 200 &&
           response->status < 300;
  }
};

enum class ScenarioPhase { Nominal, Stuffing, BruteForce, MutatedToken, NoToken };

std::string_view to_string(ScenarioPhase phase);
std::optional<ScenarioPhase> phase_from_string(std::string_view text);

struct ExecutionTrace {
  ScenarioPhase phase = ScenarioPhase::Nominal;
  std::vector<HttpInteraction> interactions;
  std::int64_t started_at_ms = 0;
  std::int64_t ended_at_ms = 0;
  std::uint64_t seed = 0;
};

enum class PacingMode { Even, Burst };

struct PacingPolicy {
  int total_requests = 1;
  int window_ms = 1000;
  PacingMode mode = PacingMode::Even;

  // Inter-dispatch interval in even mode.
  double interval_ms() const {
    return static_cast<double>(window_ms) / static_cast<double>(total_requests);
  }
};

// A fully assembled request, ready to send. Built once without credentials
// so replays can re-apply a different token (or none) to the same request.
struct PreparedRequest {
  std::string operation_id;
  HttpMethod method = HttpMethod::Get;
  std::string url;
  std::map<std::string, std::string> headers;
  std::string body;
  std::map<std::string, std::string> annotation;
};

struct AuthAssignment {
  SecurityScheme scheme;
  std::string token;
};

// Parameter assignment: the parameter (dotted name for body fields) and the
// value it takes in this request.
using ParamAssignment = std::pair<ApiParameter, nlohmann::json>;

// Substitutes path placeholders, percent-encodes the query string, re-nests
// body-field assignments into a JSON body and places the token per the
// scheme carrier. Throws MissingRequiredParameterError when a required
// parameter has no assignment.
PreparedRequest build_request(const ApiOperation& op,
                              const std::vector<ParamAssignment>& assignments,
                              const std::optional<AuthAssignment>& auth,
                              const std::string& base_url);

// Applies (or re-applies) a token carrier to a prepared request. With
// std::nullopt the request is returned unchanged, i.e. carrier absent.
PreparedRequest with_auth(PreparedRequest request,
                          const std::optional<AuthAssignment>& auth);

// Sends requests and records interactions. One scenario run owns one engine;
// in-flight responses may be collected concurrently but the trace is
// assembled in dispatch order.
class HttpEngine {
 public:
  struct Options {
    int timeout_ms = 5000;
    bool reuse_connections = true;
  };

  explicit HttpEngine(Options options = {});
  ~HttpEngine();
  HttpEngine(const HttpEngine&) = delete;
  HttpEngine& operator=(const HttpEngine&) = delete;

  // Sends one request and waits for its outcome. Transport failures are
  // recorded in the interaction, never thrown.
  HttpInteraction send_single(const PreparedRequest& request,
                              std::size_t sequence_index);

  // Dispatches every request in order under the pacing policy. Responses are
  // awaited concurrently; a transport error or timeout never aborts the
  // sequence.
  ExecutionTrace execute_sequence(const std::vector<PreparedRequest>& requests,
                                  const PacingPolicy& pacing,
                                  ScenarioPhase phase, std::uint64_t seed);

  const Options& options() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Trace files are JSON lines: line 1 is the header {phase, seed, started_at,
// ended_at}, each following line one interaction. Bodies are base64.
void persist_trace(const ExecutionTrace& trace,
                   const std::filesystem::path& path);
ExecutionTrace load_trace(const std::filesystem::path& path);

nlohmann::ordered_json interaction_to_json(const HttpInteraction& interaction);
HttpInteraction interaction_from_json(const nlohmann::json& node);

std::string base64_encode(std::string_view data);
std::optional<std::string> base64_decode(std::string_view text);

// Monotonic milliseconds used for every trace timestamp.
std::int64_t steady_now_ms();

}  // namespace authscan
