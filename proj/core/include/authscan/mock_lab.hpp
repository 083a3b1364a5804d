#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace authscan {

enum class LockoutMode { None, RateLimit429, MessageRotation };
enum class TokenPolicy { Strict, Lax, Public };

std::string_view to_string(LockoutMode mode);
std::string_view to_string(TokenPolicy policy);

// Configuration of the local lab API. The defaults expose nine operations:
// strict = {POST /login, POST /items, GET /items/{id}, DELETE /items/{id}},
// lax = {PUT /items/{id}, GET /profile},
// public = {GET /items, GET /health, POST /signup}.
struct LabConfig {
  LockoutMode lockout_mode = LockoutMode::None;
  int lockout_threshold = 5;
  int lockout_window_ms = 10000;
  std::map<std::string, TokenPolicy> token_policies;  // "<METHOD> <path>"
  int listen_port = 0;  // 0 picks a free port
  std::string valid_token = "lab-token-5f2c9d";
  std::string valid_user = "alice";
  std::string valid_password = "correct-horse-battery";

  static LabConfig defaults();
  static LabConfig from_json(const nlohmann::json& node);
  nlohmann::json to_json() const;
};

// Local HTTP server with configurable authentication behavior, plus its
// OpenAPI document. Ground truth for every scanner experiment: the token
// oracle must flag exactly the lax endpoints.
class MockLab {
 public:
  explicit MockLab(LabConfig config);
  ~MockLab();
  MockLab(MockLab&&) noexcept;
  MockLab& operator=(MockLab&&) noexcept;
  MockLab(const MockLab&) = delete;
  MockLab& operator=(const MockLab&) = delete;

  int port() const;
  std::string base_url() const;
  const LabConfig& config() const;

  std::string openapi_document() const;  // JSON text
  void write_openapi_document(const std::filesystem::path& path) const;

  // Lax-policy operations minus public ones, as synthesized operation ids.
  std::vector<std::string> ground_truth_vulnerable_operations() const;

  // Clears lockout counters and the item store (also exposed over HTTP as
  // POST /_lab/reset, which the OpenAPI document deliberately omits).
  void reset();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Starts the lab server; throws BindError when the port is taken.
MockLab start_lab(LabConfig config);

}  // namespace authscan
