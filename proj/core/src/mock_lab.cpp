#include "authscan/mock_lab.hpp"

#include <chrono>
#include <deque>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "authscan/errors.hpp"

namespace authscan {

namespace {

using ojson = nlohmann::ordered_json;

std::int64_t lab_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

constexpr const char* kWrongCredentials = "Wrong username or password";
constexpr const char* kTryLater = "Please try again later";

std::optional<TokenPolicy> policy_from_string(const std::string& text) {
  if (text == "strict") return TokenPolicy::Strict;
  if (text == "lax") return TokenPolicy::Lax;
  if (text == "public") return TokenPolicy::Public;
  return std::nullopt;
}

std::optional<LockoutMode> mode_from_string(const std::string& text) {
  if (text == "none") return LockoutMode::None;
  if (text == "rate_limit_429") return LockoutMode::RateLimit429;
  if (text == "message_rotation") return LockoutMode::MessageRotation;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(LockoutMode mode) {
  switch (mode) {
    case LockoutMode::None:
      return "none";
    case LockoutMode::RateLimit429:
      return "rate_limit_429";
    case LockoutMode::MessageRotation:
      return "message_rotation";
  }
  return "none";
}

std::string_view to_string(TokenPolicy policy) {
  switch (policy) {
    case TokenPolicy::Strict:
      return "strict";
    case TokenPolicy::Lax:
      return "lax";
    case TokenPolicy::Public:
      return "public";
  }
  return "strict";
}

LabConfig LabConfig::defaults() {
  LabConfig cfg;
  cfg.token_policies = {
      {"POST /login", TokenPolicy::Strict},
      {"POST /items", TokenPolicy::Strict},
      {"GET /items", TokenPolicy::Public},
      {"GET /items/{id}", TokenPolicy::Strict},
      {"PUT /items/{id}", TokenPolicy::Lax},
      {"DELETE /items/{id}", TokenPolicy::Strict},
      {"GET /profile", TokenPolicy::Lax},
      {"GET /health", TokenPolicy::Public},
      {"POST /signup", TokenPolicy::Public},
  };
  return cfg;
}

LabConfig LabConfig::from_json(const nlohmann::json& node) {
  LabConfig cfg = defaults();
  if (!node.is_object()) throw FormatError("lab config must be a JSON object");
  if (node.contains("lockout_mode")) {
    auto mode = mode_from_string(node.at("lockout_mode").get<std::string>());
    if (!mode.has_value())
      throw FormatError("unknown lockout_mode " +
                        node.at("lockout_mode").dump());
    cfg.lockout_mode = *mode;
  }
  if (node.contains("lockout_threshold"))
    cfg.lockout_threshold = node.at("lockout_threshold").get<int>();
  if (node.contains("lockout_window_ms"))
    cfg.lockout_window_ms = node.at("lockout_window_ms").get<int>();
  if (node.contains("listen_port"))
    cfg.listen_port = node.at("listen_port").get<int>();
  if (node.contains("valid_token"))
    cfg.valid_token = node.at("valid_token").get<std::string>();
  if (node.contains("valid_user"))
    cfg.valid_user = node.at("valid_user").get<std::string>();
  if (node.contains("valid_password"))
    cfg.valid_password = node.at("valid_password").get<std::string>();
  if (node.contains("token_policies")) {
    for (const auto& [key, value] : node.at("token_policies").items()) {
      auto policy = policy_from_string(value.get<std::string>());
      if (!policy.has_value())
        throw FormatError("unknown token policy " + value.dump());
      if (cfg.token_policies.find(key) == cfg.token_policies.end())
        throw FormatError("unknown lab operation " + key);
      cfg.token_policies[key] = *policy;
    }
  }
  return cfg;
}

nlohmann::json LabConfig::to_json() const {
  ojson node;
  node["lockout_mode"] = std::string(to_string(lockout_mode));
  node["lockout_threshold"] = lockout_threshold;
  node["lockout_window_ms"] = lockout_window_ms;
  node["listen_port"] = listen_port;
  node["valid_token"] = valid_token;
  node["valid_user"] = valid_user;
  node["valid_password"] = valid_password;
  ojson policies;
  for (const auto& [key, policy] : token_policies)
    policies[key] = std::string(to_string(policy));
  node["token_policies"] = policies;
  return node;
}

struct MockLab::Impl {
  LabConfig cfg;
  httplib::Server server;
  std::thread server_thread;
  int port = 0;

  std::mutex mutex;
  // failed login attempt timestamps per client address
  std::map<std::string, std::deque<std::int64_t>> login_failures;
  std::map<int, ojson> items;
  int next_item_id = 1;
  int next_user_id = 1;

  explicit Impl(LabConfig config) : cfg(std::move(config)) {}

  ~Impl() {
    server.stop();
    if (server_thread.joinable()) server_thread.join();
  }

  TokenPolicy policy_of(const std::string& op_key) const {
    auto it = cfg.token_policies.find(op_key);
    return it == cfg.token_policies.end() ? TokenPolicy::Public : it->second;
  }

  void reply(httplib::Response& res, int status, const ojson& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  // nullopt = authorized; otherwise the 401 body to send.
  std::optional<ojson> gate(TokenPolicy policy, const httplib::Request& req) {
    if (policy == TokenPolicy::Public) return std::nullopt;
    std::string auth = req.get_header_value("Authorization");
    if (policy == TokenPolicy::Lax) {
      if (auth.empty()) return ojson{{"error", "Missing token"}};
      return std::nullopt;
    }
    if (auth == "Bearer " + cfg.valid_token) return std::nullopt;
    return ojson{{"error", "Invalid token"}};
  }

  void prune_failures(std::deque<std::int64_t>& window, std::int64_t now) {
    while (!window.empty() && now - window.front() > cfg.lockout_window_ms)
      window.pop_front();
  }

  void handle_login(const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex);
    std::int64_t now = lab_now_ms();
    auto& window = login_failures[req.remote_addr];
    prune_failures(window, now);

    if (cfg.lockout_mode == LockoutMode::RateLimit429 &&
        static_cast<int>(window.size()) >= cfg.lockout_threshold) {
      reply(res, 429, ojson{{"error", "Too many requests"}});
      return;
    }

    bool rotated = cfg.lockout_mode == LockoutMode::MessageRotation &&
                   static_cast<int>(window.size()) >= cfg.lockout_threshold;
    auto fail = [&](const ojson& body) {
      window.push_back(now);
      reply(res, 401, rotated ? ojson{{"error", kTryLater}} : body);
    };

    if (auto denied = gate(policy_of("POST /login"), req)) {
      fail(*denied);
      return;
    }

    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    std::string user =
        body.is_object() && body.contains("username") &&
                body.at("username").is_string()
            ? body.at("username").get<std::string>()
            : "";
    std::string password =
        body.is_object() && body.contains("password") &&
                body.at("password").is_string()
            ? body.at("password").get<std::string>()
            : "";
    if (user == cfg.valid_user && password == cfg.valid_password) {
      reply(res, 200, ojson{{"token", cfg.valid_token}});
      return;
    }
    fail(ojson{{"error", kWrongCredentials}});
  }

  void register_routes() {
    server.Post("/login", [this](const httplib::Request& req,
                                 httplib::Response& res) {
      handle_login(req, res);
    });

    server.Post("/items", [this](const httplib::Request& req,
                                 httplib::Response& res) {
      if (auto denied = gate(policy_of("POST /items"), req)) {
        reply(res, 401, *denied);
        return;
      }
      std::lock_guard lock(mutex);
      nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
      ojson item;
      item["id"] = next_item_id++;
      item["name"] = body.is_object() && body.contains("name") &&
                             body.at("name").is_string()
                         ? body.at("name").get<std::string>()
                         : "item";
      item["price"] = body.is_object() && body.contains("price") &&
                              body.at("price").is_number()
                          ? body.at("price").get<double>()
                          : 1.0;
      items[item["id"].get<int>()] = item;
      reply(res, 201, item);
    });

    server.Get("/items", [this](const httplib::Request& req,
                                httplib::Response& res) {
      if (auto denied = gate(policy_of("GET /items"), req)) {
        reply(res, 401, *denied);
        return;
      }
      std::lock_guard lock(mutex);
      ojson list = ojson::array();
      for (const auto& [id, item] : items) list.push_back(item);
      reply(res, 200, list);
    });

    server.Get(R"(/items/(\d+))", [this](const httplib::Request& req,
                                         httplib::Response& res) {
      if (auto denied = gate(policy_of("GET /items/{id}"), req)) {
        reply(res, 401, *denied);
        return;
      }
      std::lock_guard lock(mutex);
      int id = std::stoi(req.matches[1]);
      auto it = items.find(id);
      if (it == items.end()) {
        reply(res, 404, ojson{{"error", "Item not found"}});
        return;
      }
      reply(res, 200, it->second);
    });

    // upsert, so a lax policy here always yields 2xx once authorized
    server.Put(R"(/items/(\d+))", [this](const httplib::Request& req,
                                         httplib::Response& res) {
      if (auto denied = gate(policy_of("PUT /items/{id}"), req)) {
        reply(res, 401, *denied);
        return;
      }
      std::lock_guard lock(mutex);
      int id = std::stoi(req.matches[1]);
      nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
      ojson item;
      item["id"] = id;
      item["name"] = body.is_object() && body.contains("name") &&
                             body.at("name").is_string()
                         ? body.at("name").get<std::string>()
                         : "item";
      item["price"] = body.is_object() && body.contains("price") &&
                              body.at("price").is_number()
                          ? body.at("price").get<double>()
                          : 1.0;
      items[id] = item;
      reply(res, 200, item);
    });

    server.Delete(R"(/items/(\d+))", [this](const httplib::Request& req,
                                            httplib::Response& res) {
      if (auto denied = gate(policy_of("DELETE /items/{id}"), req)) {
        reply(res, 401, *denied);
        return;
      }
      std::lock_guard lock(mutex);
      int id = std::stoi(req.matches[1]);
      items.erase(id);
      reply(res, 200, ojson{{"status", "deleted"}, {"id", id}});
    });

    server.Get("/profile", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      if (auto denied = gate(policy_of("GET /profile"), req)) {
        reply(res, 401, *denied);
        return;
      }
      reply(res, 200, ojson{{"username", cfg.valid_user}, {"role", "user"}});
    });

    server.Get("/health", [this](const httplib::Request& req,
                                 httplib::Response& res) {
      if (auto denied = gate(policy_of("GET /health"), req)) {
        reply(res, 401, *denied);
        return;
      }
      reply(res, 200, ojson{{"status", "ok"}});
    });

    server.Post("/signup", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      if (auto denied = gate(policy_of("POST /signup"), req)) {
        reply(res, 401, *denied);
        return;
      }
      std::lock_guard lock(mutex);
      nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
      ojson out;
      out["id"] = next_user_id++;
      out["username"] = body.is_object() && body.contains("username") &&
                                body.at("username").is_string()
                            ? body.at("username").get<std::string>()
                            : "user";
      reply(res, 201, out);
    });

    // test hook, absent from the OpenAPI document so the scanner stays blind
    server.Post("/_lab/reset", [this](const httplib::Request&,
                                      httplib::Response& res) {
      reset_state();
      reply(res, 200, ojson{{"status", "reset"}});
    });
  }

  void reset_state() {
    std::lock_guard lock(mutex);
    login_failures.clear();
    items.clear();
    next_item_id = 1;
    next_user_id = 1;
  }

  void start() {
    register_routes();
    if (cfg.listen_port == 0) {
      port = server.bind_to_any_port("127.0.0.1");
      if (port <= 0) throw BindError("cannot bind lab server to any port");
    } else {
      if (!server.bind_to_port("127.0.0.1", cfg.listen_port))
        throw BindError("cannot bind lab server to port " +
                        std::to_string(cfg.listen_port));
      port = cfg.listen_port;
    }
    server_thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
};

MockLab::MockLab(LabConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  impl_->start();
}

MockLab::~MockLab() = default;
MockLab::MockLab(MockLab&&) noexcept = default;
MockLab& MockLab::operator=(MockLab&&) noexcept = default;

int MockLab::port() const { return impl_->port; }

std::string MockLab::base_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port);
}

const LabConfig& MockLab::config() const { return impl_->cfg; }

void MockLab::reset() { impl_->reset_state(); }

std::vector<std::string> MockLab::ground_truth_vulnerable_operations() const {
  std::vector<std::string> out;
  for (const auto& [key, policy] : impl_->cfg.token_policies)
    if (policy == TokenPolicy::Lax) out.push_back(key);
  return out;
}

std::string MockLab::openapi_document() const {
  const LabConfig& cfg = impl_->cfg;

  auto string_prop = [](const char* format = nullptr) {
    ojson node{{"type", "string"}};
    if (format != nullptr) node["format"] = format;
    return node;
  };
  ojson item_schema{
      {"type", "object"},
      {"properties",
       {{"id", {{"type", "integer"}}},
        {"name", {{"type", "string"}}},
        {"price", {{"type", "number"}}}}},
  };
  ojson error_schema{
      {"type", "object"},
      {"properties", {{"error", {{"type", "string"}}}}},
  };
  auto json_content = [](const ojson& schema) {
    return ojson{{"application/json", {{"schema", schema}}}};
  };
  auto response = [&](const char* description, const ojson& schema) {
    return ojson{{"description", description}, {"content", json_content(schema)}};
  };
  ojson security = ojson::array({ojson{{"bearerAuth", ojson::array()}}});

  auto secured = [&](const std::string& op_key) {
    return impl_->policy_of(op_key) != TokenPolicy::Public;
  };

  ojson doc;
  doc["openapi"] = "3.0.3";
  doc["info"] = {{"title", "Item store lab API"}, {"version", "1.0.0"}};
  doc["servers"] = ojson::array({ojson{{"url", base_url()}}});

  ojson paths;

  {
    ojson op;
    op["summary"] = "Exchange credentials for an access token";
    op["requestBody"] = {
        {"required", true},
        {"content",
         json_content(ojson{
             {"type", "object"},
             {"required", ojson::array({"username", "password"})},
             {"properties",
              {{"username", string_prop()},
               {"password", string_prop("password")}}}})}};
    op["responses"] = {{"200", response("token issued",
                                        ojson{{"type", "object"},
                                              {"properties",
                                               {{"token", string_prop()}}}})},
                       {"401", response("bad credentials", error_schema)}};
    if (secured("POST /login")) op["security"] = security;
    paths["/login"] = ojson{{"post", op}};
  }

  {
    ojson post_op;
    post_op["summary"] = "Create an item";
    post_op["requestBody"] = {
        {"required", true},
        {"content",
         json_content(ojson{
             {"type", "object"},
             {"required", ojson::array({"name"})},
             {"properties",
              {{"name", ojson{{"type", "string"}, {"example", "widget"}}},
               {"price", ojson{{"type", "number"}, {"example", 9.99}}}}}})}};
    post_op["responses"] = {{"201", response("created", item_schema)}};
    if (secured("POST /items")) post_op["security"] = security;

    ojson get_op;
    get_op["summary"] = "List items";
    get_op["responses"] = {
        {"200", response("item list",
                         ojson{{"type", "array"}, {"items", item_schema}})}};
    if (secured("GET /items")) get_op["security"] = security;

    paths["/items"] = ojson{{"post", post_op}, {"get", get_op}};
  }

  {
    ojson id_param{{"name", "id"},
                   {"in", "path"},
                   {"required", true},
                   {"schema", {{"type", "integer"}}}};

    ojson get_op;
    get_op["summary"] = "Fetch one item";
    get_op["parameters"] = ojson::array({id_param});
    get_op["responses"] = {{"200", response("the item", item_schema)},
                           {"404", response("no such item", error_schema)}};
    if (secured("GET /items/{id}")) get_op["security"] = security;

    ojson put_op;
    put_op["summary"] = "Update an item";
    put_op["parameters"] = ojson::array({id_param});
    put_op["requestBody"] = {
        {"required", false},
        {"content",
         json_content(ojson{{"type", "object"},
                            {"properties",
                             {{"name", {{"type", "string"}}},
                              {"price", {{"type", "number"}}}}}})}};
    put_op["responses"] = {{"200", response("updated", item_schema)}};
    if (secured("PUT /items/{id}")) put_op["security"] = security;

    ojson delete_op;
    delete_op["summary"] = "Delete an item";
    delete_op["parameters"] = ojson::array({id_param});
    delete_op["responses"] = {
        {"200", response("deleted",
                         ojson{{"type", "object"},
                               {"properties",
                                {{"status", {{"type", "string"}}},
                                 {"id", {{"type", "integer"}}}}}})}};
    if (secured("DELETE /items/{id}")) delete_op["security"] = security;

    paths["/items/{id}"] =
        ojson{{"get", get_op}, {"put", put_op}, {"delete", delete_op}};
  }

  {
    ojson op;
    op["summary"] = "Current user profile";
    op["responses"] = {
        {"200", response("profile",
                         ojson{{"type", "object"},
                               {"properties",
                                {{"username", string_prop()},
                                 {"role", string_prop()}}}})}};
    if (secured("GET /profile")) op["security"] = security;
    paths["/profile"] = ojson{{"get", op}};
  }

  {
    ojson op;
    op["summary"] = "Liveness probe";
    op["responses"] = {
        {"200", response("ok", ojson{{"type", "object"},
                                     {"properties",
                                      {{"status", string_prop()}}}})}};
    if (secured("GET /health")) op["security"] = security;
    paths["/health"] = ojson{{"get", op}};
  }

  {
    ojson op;
    op["summary"] = "Register a new account";
    op["requestBody"] = {
        {"required", true},
        {"content",
         json_content(ojson{
             {"type", "object"},
             {"required", ojson::array({"username", "password"})},
             {"properties",
              {{"username", string_prop()},
               {"password", string_prop("password")},
               {"email", string_prop("email")}}}})}};
    op["responses"] = {
        {"201", response("account created",
                         ojson{{"type", "object"},
                               {"properties",
                                {{"id", {{"type", "integer"}}},
                                 {"username", string_prop()}}}})}};
    if (secured("POST /signup")) op["security"] = security;
    paths["/signup"] = ojson{{"post", op}};
  }

  doc["paths"] = paths;
  doc["components"] = {
      {"securitySchemes",
       {{"bearerAuth",
         {{"type", "http"}, {"scheme", "bearer"}, {"bearerFormat", "opaque"}}}}}};

  (void)cfg;
  return doc.dump(2);
}

void MockLab::write_openapi_document(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot write OpenAPI document: " + path.string());
  out << openapi_document() << "\n";
}

MockLab start_lab(LabConfig config) { return MockLab(std::move(config)); }

}  // namespace authscan
