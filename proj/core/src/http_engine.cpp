#include "authscan/http_engine.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "authscan/errors.hpp"

namespace authscan {

namespace {

using ojson = nlohmann::ordered_json;

constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

bool unreserved(unsigned char c) {
  return std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~';
}

std::string percent_encode(std::string_view text) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    if (unreserved(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

// Scalar assignments render without JSON quoting; everything else is dumped.
std::string value_to_text(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  return value.dump();
}

struct ParsedUrl {
  std::string origin;  // scheme://host:port
  std::string target;  // path[?query]
};

ParsedUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error("not an absolute URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos)
    return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

void set_nested(nlohmann::json& root, const std::string& dotted,
                const nlohmann::json& value) {
  nlohmann::json* node = &root;
  std::size_t start = 0;
  while (true) {
    auto dot = dotted.find('.', start);
    if (dot == std::string::npos) {
      (*node)[dotted.substr(start)] = value;
      return;
    }
    node = &(*node)[dotted.substr(start, dot - start)];
    start = dot + 1;
  }
}

void append_cookie(std::map<std::string, std::string>& headers,
                   const std::string& name, const std::string& value) {
  auto it = headers.find("Cookie");
  std::string pair = name + "=" + value;
  if (it == headers.end())
    headers["Cookie"] = pair;
  else
    it->second += "; " + pair;
}

std::string join_url(const std::string& url, const std::string& query_pair) {
  return url + (url.find('?') == std::string::npos ? "?" : "&") + query_pair;
}

}  // namespace

std::string_view to_string(ScenarioPhase phase) {
  switch (phase) {
    case ScenarioPhase::Nominal:
      return "nominal";
    case ScenarioPhase::Stuffing:
      return "stuffing";
    case ScenarioPhase::BruteForce:
      return "brute_force";
    case ScenarioPhase::MutatedToken:
      return "mutated_token";
    case ScenarioPhase::NoToken:
      return "no_token";
  }
  return "nominal";
}

std::optional<ScenarioPhase> phase_from_string(std::string_view text) {
  if (text == "nominal") return ScenarioPhase::Nominal;
  if (text == "stuffing") return ScenarioPhase::Stuffing;
  if (text == "brute_force") return ScenarioPhase::BruteForce;
  if (text == "mutated_token") return ScenarioPhase::MutatedToken;
  if (text == "no_token") return ScenarioPhase::NoToken;
  return std::nullopt;
}

std::int64_t steady_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

PreparedRequest build_request(const ApiOperation& op,
                              const std::vector<ParamAssignment>& assignments,
                              const std::optional<AuthAssignment>& auth,
                              const std::string& base_url) {
  auto find_assignment =
      [&](const ApiParameter& p) -> const nlohmann::json* {
    for (const auto& [param, value] : assignments)
      if (param.name == p.name && param.location == p.location) return &value;
    return nullptr;
  };

  for (const auto& p : flatten_body_parameters(op)) {
    if (p.required && find_assignment(p) == nullptr)
      throw MissingRequiredParameterError(
          op.operation_id + ": required parameter '" + p.name +
          "' has no assignment");
  }

  PreparedRequest req;
  req.operation_id = op.operation_id;
  req.method = op.method;

  std::string path = op.path;
  std::string query;
  nlohmann::json body_object;

  for (const auto& [param, value] : assignments) {
    switch (param.location) {
      case ParamLocation::Path: {
        std::string placeholder = "{" + param.name + "}";
        auto pos = path.find(placeholder);
        if (pos != std::string::npos)
          path.replace(pos, placeholder.size(),
                       percent_encode(value_to_text(value)));
        break;
      }
      case ParamLocation::Query:
        if (!query.empty()) query.push_back('&');
        query += percent_encode(param.name) + "=" +
                 percent_encode(value_to_text(value));
        break;
      case ParamLocation::Header:
        req.headers[param.name] = value_to_text(value);
        break;
      case ParamLocation::Cookie:
        append_cookie(req.headers, param.name, value_to_text(value));
        break;
      case ParamLocation::BodyField:
        set_nested(body_object, param.name, value);
        break;
    }
  }

  std::string base = base_url;
  while (base.size() > 1 && base.back() == '/') base.pop_back();
  req.url = base + path;
  if (!query.empty()) req.url += "?" + query;

  if (!body_object.is_null()) {
    req.body = body_object.dump();
    req.headers["Content-Type"] = "application/json";
  }

  return with_auth(std::move(req), auth);
}

PreparedRequest with_auth(PreparedRequest request,
                          const std::optional<AuthAssignment>& auth) {
  if (!auth.has_value()) return request;
  const SecurityScheme& scheme = auth->scheme;
  switch (scheme.kind) {
    case SchemeKind::HttpBearer:
    case SchemeKind::OAuth2:
    case SchemeKind::Other:
      request.headers[scheme.carrier_name.empty() ? "Authorization"
                                                  : scheme.carrier_name] =
          "Bearer " + auth->token;
      break;
    case SchemeKind::HttpBasic:
      request.headers[scheme.carrier_name.empty() ? "Authorization"
                                                  : scheme.carrier_name] =
          "Basic " + auth->token;
      break;
    case SchemeKind::ApiKey:
      switch (scheme.carrier) {
        case TokenCarrier::Header:
          request.headers[scheme.carrier_name] = auth->token;
          break;
        case TokenCarrier::Query:
          request.url = join_url(request.url,
                                 percent_encode(scheme.carrier_name) + "=" +
                                     percent_encode(auth->token));
          break;
        case TokenCarrier::Cookie:
          append_cookie(request.headers, scheme.carrier_name, auth->token);
          break;
      }
      break;
  }
  return request;
}

struct HttpEngine::Impl {
  Options options;
  std::mutex mutex;
  std::map<std::string, std::vector<std::unique_ptr<httplib::Client>>> idle;

  explicit Impl(Options opts) : options(opts) {}

  std::unique_ptr<httplib::Client> acquire(const std::string& origin) {
    if (options.reuse_connections) {
      std::lock_guard lock(mutex);
      auto& pool = idle[origin];
      if (!pool.empty()) {
        auto client = std::move(pool.back());
        pool.pop_back();
        return client;
      }
    }
    auto client = std::make_unique<httplib::Client>(origin);
    client->set_connection_timeout(0, options.timeout_ms * 1000);
    client->set_read_timeout(0, options.timeout_ms * 1000);
    client->set_write_timeout(0, options.timeout_ms * 1000);
    client->set_keep_alive(options.reuse_connections);
    client->set_follow_location(false);  // redirects blur oracle status codes
    return client;
  }

  void release(const std::string& origin,
               std::unique_ptr<httplib::Client> client) {
    if (!options.reuse_connections) return;
    std::lock_guard lock(mutex);
    idle[origin].push_back(std::move(client));
  }

  void perform(const PreparedRequest& request, HttpInteraction& out) {
    ParsedUrl url;
    try {
      url = split_url(request.url);
    } catch (const Error& e) {
      out.transport_error = e.what();
      out.received_at_ms = steady_now_ms();
      return;
    }

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [name, value] : request.headers) {
      if (name == "Content-Type")
        content_type = value;
      else
        headers.emplace(name, value);
    }

    auto client = acquire(url.origin);
    httplib::Result result;
    switch (request.method) {
      case HttpMethod::Get:
        result = client->Get(url.target, headers);
        break;
      case HttpMethod::Post:
        result = client->Post(url.target, headers, request.body, content_type);
        break;
      case HttpMethod::Put:
        result = client->Put(url.target, headers, request.body, content_type);
        break;
      case HttpMethod::Patch:
        result =
            client->Patch(url.target, headers, request.body, content_type);
        break;
      case HttpMethod::Delete:
        result =
            client->Delete(url.target, headers, request.body, content_type);
        break;
      case HttpMethod::Head:
        result = client->Head(url.target, headers);
        break;
      case HttpMethod::Options:
        result = client->Options(url.target, headers);
        break;
    }

    out.received_at_ms = steady_now_ms();
    if (result) {
      HttpResponseRecord resp;
      resp.status = result->status;
      for (const auto& [name, value] : result->headers) {
        auto it = resp.headers.find(name);
        if (it == resp.headers.end())
          resp.headers[name] = value;
        else
          it->second += ", " + value;
      }
      resp.body = result->body;
      out.response = std::move(resp);
      release(url.origin, std::move(client));
    } else {
      out.transport_error = httplib::to_string(result.error());
      // a failed connection is not returned to the pool
    }
  }
};

HttpEngine::HttpEngine(Options options)
    : impl_(std::make_unique<Impl>(options)) {}

HttpEngine::~HttpEngine() = default;

const HttpEngine::Options& HttpEngine::options() const {
  return impl_->options;
}

HttpInteraction HttpEngine::send_single(const PreparedRequest& request,
                                        std::size_t sequence_index) {
  HttpInteraction interaction;
  interaction.sequence_index = sequence_index;
  interaction.operation_id = request.operation_id;
  interaction.request = {request.method, request.url, request.headers,
                         request.body};
  interaction.annotation = request.annotation;
  interaction.sent_at_ms = steady_now_ms();
  impl_->perform(request, interaction);
  return interaction;
}

ExecutionTrace HttpEngine::execute_sequence(
    const std::vector<PreparedRequest>& requests, const PacingPolicy& pacing,
    ScenarioPhase phase, std::uint64_t seed) {
  ExecutionTrace trace;
  trace.phase = phase;
  trace.seed = seed;
  trace.started_at_ms = steady_now_ms();
  trace.interactions.resize(requests.size());

  const auto interval = std::chrono::microseconds(
      static_cast<std::int64_t>(pacing.interval_ms() * 1000.0));
  std::vector<std::thread> workers;
  workers.reserve(requests.size());

  auto next_dispatch = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (pacing.mode == PacingMode::Even && i > 0)
      std::this_thread::sleep_until(next_dispatch);

    HttpInteraction& slot = trace.interactions[i];
    slot.sequence_index = i;
    slot.operation_id = requests[i].operation_id;
    slot.request = {requests[i].method, requests[i].url, requests[i].headers,
                    requests[i].body};
    slot.annotation = requests[i].annotation;
    slot.sent_at_ms = steady_now_ms();
    next_dispatch = std::chrono::steady_clock::now() + interval;

    workers.emplace_back(
        [this, &slot, &request = requests[i]] { impl_->perform(request, slot); });
  }
  for (auto& w : workers) w.join();
  trace.ended_at_ms = steady_now_ms();
  return trace;
}

std::string base64_encode(std::string_view data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < data.size()) {
    unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8) |
                 static_cast<unsigned char>(data[i + 2]);
    out.push_back(kBase64Alphabet[(v >> 18) & 63]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.push_back(kBase64Alphabet[(v >> 6) & 63]);
    out.push_back(kBase64Alphabet[v & 63]);
    i += 3;
  }
  if (i + 1 == data.size()) {
    unsigned v = static_cast<unsigned char>(data[i]) << 16;
    out.push_back(kBase64Alphabet[(v >> 18) & 63]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == data.size()) {
    unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8);
    out.push_back(kBase64Alphabet[(v >> 18) & 63]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.push_back(kBase64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::optional<std::string> base64_decode(std::string_view text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0) return std::nullopt;
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    unsigned v = 0;
    for (int j = 0; j < 4; ++j) {
      char c = text[i + j];
      if (c == '=') {
        if (i + 4 != text.size() || j < 2) return std::nullopt;
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0) return std::nullopt;  // data after padding
      int d = value_of(c);
      if (d < 0) return std::nullopt;
      v = (v << 6) | static_cast<unsigned>(d);
    }
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    if (pad < 2) out.push_back(static_cast<char>((v >> 8) & 0xFF));
    if (pad < 1) out.push_back(static_cast<char>(v & 0xFF));
  }
  return out;
}

nlohmann::ordered_json interaction_to_json(const HttpInteraction& interaction) {
  ojson node;
  node["sequence_index"] = interaction.sequence_index;
  node["operation_id"] = interaction.operation_id;
  node["request"] = {
      {"method", std::string(to_string(interaction.request.method))},
      {"url", interaction.request.url},
      {"headers", interaction.request.headers},
      {"body_b64", base64_encode(interaction.request.body)}};
  if (interaction.response.has_value()) {
    node["response"] = {{"status", interaction.response->status},
                        {"headers", interaction.response->headers},
                        {"body_b64", base64_encode(interaction.response->body)}};
  } else {
    node["response"] = nullptr;
  }
  node["sent_at"] = interaction.sent_at_ms;
  node["received_at"] = interaction.received_at_ms;
  node["annotation"] = interaction.annotation;
  if (interaction.transport_error.has_value())
    node["transport_error"] = *interaction.transport_error;
  else
    node["transport_error"] = nullptr;
  return node;
}

namespace {

std::map<std::string, std::string> headers_from_json(const nlohmann::json& node) {
  std::map<std::string, std::string> out;
  if (!node.is_object()) throw FormatError("headers must be an object");
  for (const auto& [name, value] : node.items()) {
    if (!value.is_string()) throw FormatError("header values must be strings");
    out[name] = value.get<std::string>();
  }
  return out;
}

std::string body_from_b64(const nlohmann::json& node, const char* field) {
  if (!node.is_string())
    throw FormatError(std::string(field) + " must be a base64 string");
  auto decoded = base64_decode(node.get<std::string>());
  if (!decoded.has_value())
    throw FormatError(std::string(field) + " is not valid base64");
  return *decoded;
}

}  // namespace

HttpInteraction interaction_from_json(const nlohmann::json& node) {
  if (!node.is_object()) throw FormatError("interaction must be an object");
  if (!node.contains("sequence_index") ||
      !node.at("sequence_index").is_number_unsigned())
    throw FormatError("interaction missing sequence_index");

  HttpInteraction out;
  out.sequence_index = node.at("sequence_index").get<std::size_t>();
  if (node.contains("operation_id") && node.at("operation_id").is_string())
    out.operation_id = node.at("operation_id").get<std::string>();

  if (!node.contains("request") || !node.at("request").is_object())
    throw FormatError("interaction missing request");
  const auto& req = node.at("request");
  auto method = req.contains("method") && req.at("method").is_string()
                    ? method_from_string(req.at("method").get<std::string>())
                    : std::nullopt;
  if (!method.has_value()) throw FormatError("request has no valid method");
  out.request.method = *method;
  if (!req.contains("url") || !req.at("url").is_string())
    throw FormatError("request has no url");
  out.request.url = req.at("url").get<std::string>();
  out.request.headers = headers_from_json(req.value("headers", nlohmann::json::object()));
  out.request.body = body_from_b64(req.at("body_b64"), "request.body_b64");

  if (node.contains("response") && !node.at("response").is_null()) {
    const auto& resp = node.at("response");
    if (!resp.is_object() || !resp.contains("status") ||
        !resp.at("status").is_number_integer())
      throw FormatError("response has no status");
    HttpResponseRecord record;
    record.status = resp.at("status").get<int>();
    record.headers = headers_from_json(resp.value("headers", nlohmann::json::object()));
    record.body = body_from_b64(resp.at("body_b64"), "response.body_b64");
    out.response = std::move(record);
  }

  if (node.contains("sent_at") && node.at("sent_at").is_number())
    out.sent_at_ms = node.at("sent_at").get<std::int64_t>();
  if (node.contains("received_at") && node.at("received_at").is_number())
    out.received_at_ms = node.at("received_at").get<std::int64_t>();
  if (node.contains("annotation") && node.at("annotation").is_object())
    out.annotation = headers_from_json(node.at("annotation"));
  if (node.contains("transport_error") && node.at("transport_error").is_string())
    out.transport_error = node.at("transport_error").get<std::string>();

  if (out.response.has_value() && out.transport_error.has_value())
    throw FormatError("interaction has both response and transport_error");
  return out;
}

void persist_trace(const ExecutionTrace& trace,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open trace file for writing: " + path.string());
  ojson header;
  header["phase"] = std::string(to_string(trace.phase));
  header["seed"] = trace.seed;
  header["started_at"] = trace.started_at_ms;
  header["ended_at"] = trace.ended_at_ms;
  out << header.dump() << "\n";
  for (const auto& interaction : trace.interactions)
    out << interaction_to_json(interaction).dump() << "\n";
  if (!out) throw IoError("short write to trace file: " + path.string());
}

ExecutionTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty trace file");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad trace header: ") + e.what());
  }
  if (!header.is_object() || !header.contains("phase") ||
      !header.at("phase").is_string())
    throw FormatError("trace header missing phase");
  auto phase = phase_from_string(header.at("phase").get<std::string>());
  if (!phase.has_value())
    throw FormatError("unknown phase " + header.at("phase").get<std::string>());

  ExecutionTrace trace;
  trace.phase = *phase;
  trace.seed = header.value("seed", 0ULL);
  trace.started_at_ms = header.value("started_at", 0LL);
  trace.ended_at_ms = header.value("ended_at", 0LL);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json node;
    try {
      node = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad interaction line: ") + e.what());
    }
    trace.interactions.push_back(interaction_from_json(node));
  }

  for (std::size_t i = 0; i < trace.interactions.size(); ++i)
    if (trace.interactions[i].sequence_index != i)
      throw FormatError("sequence_index values must be 0..n-1 with no gaps");
  return trace;
}

}  // namespace authscan
