#include "authscan/api_model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "authscan/errors.hpp"

namespace authscan {

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kMaxRefDepth = 64;

const char* kMethodNames[] = {"GET",    "POST", "PUT",    "PATCH",
                              "DELETE", "HEAD", "OPTIONS"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// yaml-cpp node -> ordered_json, preserving map insertion order. Quoted
// scalars stay strings; plain scalars are tried as bool, integer, double.
ojson yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
      return nullptr;
    case YAML::NodeType::Scalar: {
      if (node.Tag() == "!") return node.Scalar();  // quoted
      const std::string& s = node.Scalar();
      if (s == "null" || s == "~" || s == "Null" || s == "NULL")
        return nullptr;
      if (s == "true" || s == "True" || s == "TRUE") return true;
      if (s == "false" || s == "False" || s == "FALSE") return false;
      try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos == s.size()) return v;
      } catch (const std::exception&) {
      }
      try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
      } catch (const std::exception&) {
      }
      return s;
    }
    case YAML::NodeType::Sequence: {
      ojson arr = ojson::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      ojson obj = ojson::object();
      for (const auto& kv : node) obj[kv.first.Scalar()] = yaml_to_json(kv.second);
      return obj;
    }
    default:
      return nullptr;
  }
}

struct Parser {
  const ojson& doc;
  const std::string& source;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source + ": " + what);
  }

  // Resolves "#/a/b/c" within the document. Remote refs are rejected.
  const ojson& resolve_pointer(const std::string& ref) const {
    if (ref.empty() || ref[0] != '#')
      fail("external $ref not supported: " + ref);
    const ojson* node = &doc;
    std::string rest = ref.substr(1);
    std::stringstream ss(rest);
    std::string part;
    while (std::getline(ss, part, '/')) {
      if (part.empty()) continue;
      // JSON pointer escapes
      std::string key;
      for (std::size_t i = 0; i < part.size(); ++i) {
        if (part[i] == '~' && i + 1 < part.size()) {
          key.push_back(part[i + 1] == '0' ? '~' : '/');
          ++i;
        } else {
          key.push_back(part[i]);
        }
      }
      if (!node->is_object() || !node->contains(key))
        fail("unresolvable $ref: " + ref);
      node = &node->at(key);
    }
    return *node;
  }

  const ojson& deref(const ojson& node, int depth = 0) const {
    if (depth > kMaxRefDepth) fail("$ref chain too deep");
    if (node.is_object() && node.contains("$ref") &&
        node.at("$ref").is_string())
      return deref(resolve_pointer(node.at("$ref").get<std::string>()),
                   depth + 1);
    return node;
  }

  static ValueType type_from_string(const std::string& t) {
    if (t == "string") return ValueType::String;
    if (t == "number") return ValueType::Number;
    if (t == "integer") return ValueType::Integer;
    if (t == "boolean") return ValueType::Boolean;
    if (t == "array") return ValueType::Array;
    if (t == "object") return ValueType::Object;
    return ValueType::String;
  }

  Schema to_schema(const ojson& raw, int depth = 0) const {
    Schema out;
    if (depth > kMaxRefDepth) return out;  // cyclic schema, truncate
    const ojson& node = deref(raw);
    if (!node.is_object()) return out;

    if (node.contains("type") && node.at("type").is_string()) {
      out.type = type_from_string(node.at("type").get<std::string>());
    } else if (node.contains("properties")) {
      out.type = ValueType::Object;
    } else if (node.contains("items")) {
      out.type = ValueType::Array;
    } else if (node.contains("enum") && node.at("enum").is_array() &&
               !node.at("enum").empty()) {
      const auto& first = node.at("enum").at(0);
      out.type = first.is_number_integer()  ? ValueType::Integer
                 : first.is_number()        ? ValueType::Number
                 : first.is_boolean()       ? ValueType::Boolean
                                            : ValueType::String;
    } else {
      out.type = ValueType::String;
    }

    if (node.contains("format") && node.at("format").is_string())
      out.format = node.at("format").get<std::string>();
    if (node.contains("enum") && node.at("enum").is_array())
      for (const auto& v : node.at("enum"))
        out.enum_values.push_back(nlohmann::json(v));
    if (node.contains("example"))
      out.example_values.push_back(nlohmann::json(node.at("example")));
    if (node.contains("examples") && node.at("examples").is_array())
      for (const auto& v : node.at("examples"))
        out.example_values.push_back(nlohmann::json(v));
    if (node.contains("default"))
      out.default_value = nlohmann::json(node.at("default"));
    if (node.contains("required") && node.at("required").is_array())
      for (const auto& r : node.at("required"))
        if (r.is_string()) out.required.push_back(r.get<std::string>());
    if (node.contains("properties") && node.at("properties").is_object())
      for (const auto& [key, sub] : node.at("properties").items())
        out.properties.emplace_back(key, to_schema(sub, depth + 1));
    if (node.contains("items"))
      out.items = std::make_shared<Schema>(to_schema(node.at("items"), depth + 1));
    return out;
  }

  ApiParameter to_parameter(const ojson& raw) const {
    const ojson& node = deref(raw);
    if (!node.is_object() || !node.contains("name") ||
        !node.at("name").is_string())
      fail("parameter object without a name");
    ApiParameter p;
    p.name = node.at("name").get<std::string>();
    if (p.name.empty()) fail("parameter with empty name");

    std::string in = node.contains("in") && node.at("in").is_string()
                         ? node.at("in").get<std::string>()
                         : "query";
    if (in == "path")
      p.location = ParamLocation::Path;
    else if (in == "header")
      p.location = ParamLocation::Header;
    else if (in == "cookie")
      p.location = ParamLocation::Cookie;
    else
      p.location = ParamLocation::Query;

    p.required = p.location == ParamLocation::Path ||
                 (node.contains("required") && node.at("required").is_boolean() &&
                  node.at("required").get<bool>());

    if (node.contains("schema")) {
      Schema s = to_schema(node.at("schema"));
      p.value_type = s.type;
      p.format = s.format;
      p.enum_values = s.enum_values;
      p.example_values = s.example_values;
      p.default_value = s.default_value;
    }
    if (node.contains("example"))
      p.example_values.push_back(nlohmann::json(node.at("example")));
    if (node.contains("examples") && node.at("examples").is_object())
      for (const auto& [key, ex] : node.at("examples").items()) {
        (void)key;
        const ojson& exn = deref(ex);
        if (exn.is_object() && exn.contains("value"))
          p.example_values.push_back(nlohmann::json(exn.at("value")));
      }
    return p;
  }

  // Picks the JSON media-type schema, falling back to the first entry.
  std::optional<Schema> content_schema(const ojson& owner) const {
    const ojson& node = deref(owner);
    if (!node.is_object() || !node.contains("content") ||
        !node.at("content").is_object() || node.at("content").empty())
      return std::nullopt;
    const ojson& content = node.at("content");
    const ojson* media = nullptr;
    for (const auto& [mime, m] : content.items()) {
      if (lower(mime).find("json") != std::string::npos) {
        media = &m;
        break;
      }
    }
    if (media == nullptr) media = &content.begin().value();
    if (!media->is_object() || !media->contains("schema")) return std::nullopt;
    return to_schema(media->at("schema"));
  }
};

std::vector<std::string> path_placeholders(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '{') {
      auto end = path.find('}', i);
      if (end == std::string::npos) break;
      out.push_back(path.substr(i + 1, end - i - 1));
      i = end + 1;
    } else {
      ++i;
    }
  }
  return out;
}

std::string normalize_trailing_slash(std::string path) {
  while (path.size() > 1 && path.back() == '/') path.pop_back();
  return path;
}

bool is_absolute_http_url(const std::string& url) {
  auto l = lower(url);
  return l.rfind("http://", 0) == 0 || l.rfind("https://", 0) == 0;
}

SecurityScheme to_security_scheme(const std::string& name, const ojson& node) {
  SecurityScheme s;
  s.name = name;
  std::string type = node.contains("type") && node.at("type").is_string()
                         ? lower(node.at("type").get<std::string>())
                         : "";
  if (type == "http") {
    std::string scheme = node.contains("scheme") && node.at("scheme").is_string()
                             ? lower(node.at("scheme").get<std::string>())
                             : "bearer";
    s.kind = scheme == "basic" ? SchemeKind::HttpBasic : SchemeKind::HttpBearer;
    s.carrier = TokenCarrier::Header;
    s.carrier_name = "Authorization";
  } else if (type == "apikey") {
    s.kind = SchemeKind::ApiKey;
    std::string in = node.contains("in") && node.at("in").is_string()
                         ? lower(node.at("in").get<std::string>())
                         : "header";
    s.carrier = in == "query"    ? TokenCarrier::Query
                : in == "cookie" ? TokenCarrier::Cookie
                                 : TokenCarrier::Header;
    s.carrier_name = node.contains("name") && node.at("name").is_string()
                         ? node.at("name").get<std::string>()
                         : "X-API-Key";
  } else if (type == "oauth2") {
    s.kind = SchemeKind::OAuth2;
    s.carrier = TokenCarrier::Header;
    s.carrier_name = "Authorization";
  } else {
    s.kind = SchemeKind::Other;
    s.carrier = TokenCarrier::Header;
    s.carrier_name = "Authorization";
  }
  if (s.carrier_name.empty()) s.carrier_name = "Authorization";
  return s;
}

void flatten_schema_leaves(const Schema& schema, const std::string& prefix,
                           bool ancestors_required,
                           std::vector<ApiParameter>& out, int depth = 0) {
  if (depth > kMaxRefDepth) return;
  for (const auto& [name, sub] : schema.properties) {
    std::string dotted = prefix.empty() ? name : prefix + "." + name;
    bool listed = std::find(schema.required.begin(), schema.required.end(),
                            name) != schema.required.end();
    bool required = ancestors_required && listed;
    if (sub.type == ValueType::Object) {
      if (!sub.properties.empty())
        flatten_schema_leaves(sub, dotted, required, out, depth + 1);
      // free-form objects have no leaves to expose
      continue;
    }
    ApiParameter p;
    p.name = dotted;
    p.location = ParamLocation::BodyField;
    p.value_type = sub.type;
    p.required = required;
    p.example_values = sub.example_values;
    p.enum_values = sub.enum_values;
    p.default_value = sub.default_value;
    p.format = sub.format;
    out.push_back(std::move(p));
  }
}

}  // namespace

std::string_view to_string(HttpMethod method) {
  return kMethodNames[static_cast<int>(method)];
}

std::optional<HttpMethod> method_from_string(std::string_view text) {
  std::string up(text);
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  for (int i = 0; i < 7; ++i)
    if (up == kMethodNames[i]) return static_cast<HttpMethod>(i);
  return std::nullopt;
}

std::string_view to_string(ParamLocation location) {
  switch (location) {
    case ParamLocation::Path:
      return "path";
    case ParamLocation::Query:
      return "query";
    case ParamLocation::Header:
      return "header";
    case ParamLocation::Cookie:
      return "cookie";
    case ParamLocation::BodyField:
      return "body-field";
  }
  return "query";
}

std::string_view to_string(ValueType type) {
  switch (type) {
    case ValueType::String:
      return "string";
    case ValueType::Number:
      return "number";
    case ValueType::Integer:
      return "integer";
    case ValueType::Boolean:
      return "boolean";
    case ValueType::Array:
      return "array";
    case ValueType::Object:
      return "object";
  }
  return "string";
}

ApiSpecification parse_specification(
    const std::string& text, const std::string& source_name,
    const std::optional<std::string>& base_url_override,
    std::optional<bool> is_yaml) {
  bool yaml;
  if (is_yaml.has_value()) {
    yaml = *is_yaml;
  } else {
    auto first = text.find_first_not_of(" \t\r\n");
    yaml = !(first != std::string::npos &&
             (text[first] == '{' || text[first] == '['));
  }

  ojson doc;
  if (yaml) {
    try {
      doc = yaml_to_json(YAML::Load(text));
    } catch (const YAML::Exception& e) {
      throw ParseError(source_name + ": YAML parse failure: " + e.what());
    }
  } else {
    try {
      doc = ojson::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source_name + ": JSON parse failure: " + e.what());
    }
  }
  if (!doc.is_object())
    throw ParseError(source_name + ": document root is not an object");

  if (doc.contains("swagger"))
    throw UnsupportedSpecError(source_name +
                               ": Swagger 2.0 documents are not supported; "
                               "convert to OpenAPI 3.x first");
  if (doc.contains("openapi") && doc.at("openapi").is_string() &&
      doc.at("openapi").get<std::string>().rfind("3", 0) != 0)
    throw UnsupportedSpecError(source_name + ": unsupported OpenAPI version " +
                               doc.at("openapi").get<std::string>());
  if (!doc.contains("paths") || !doc.at("paths").is_object())
    throw UnsupportedSpecError(source_name + ": missing paths section");

  Parser parser{doc, source_name};

  ApiSpecification spec;
  spec.source_path = source_name;

  if (base_url_override.has_value()) {
    spec.base_url = *base_url_override;
  } else if (doc.contains("servers") && doc.at("servers").is_array() &&
             !doc.at("servers").empty()) {
    const ojson& server = doc.at("servers").at(0);
    if (server.is_object() && server.contains("url") &&
        server.at("url").is_string())
      spec.base_url = server.at("url").get<std::string>();
  }
  if (spec.base_url.empty())
    throw MissingServerError(source_name +
                             ": no server URL in the document and no "
                             "base URL override given");
  if (!is_absolute_http_url(spec.base_url))
    throw MissingServerError(source_name + ": base URL is not absolute: " +
                             spec.base_url);
  while (spec.base_url.size() > 1 && spec.base_url.back() == '/')
    spec.base_url.pop_back();

  bool global_security = doc.contains("security") &&
                         doc.at("security").is_array() &&
                         !doc.at("security").empty();

  if (doc.contains("components") && doc.at("components").is_object() &&
      doc.at("components").contains("securitySchemes") &&
      doc.at("components").at("securitySchemes").is_object()) {
    for (const auto& [name, node] :
         doc.at("components").at("securitySchemes").items()) {
      spec.security_schemes.push_back(
          to_security_scheme(name, parser.deref(node)));
    }
  }

  std::set<std::pair<HttpMethod, std::string>> seen_method_path;

  for (const auto& [raw_path, raw_item] : doc.at("paths").items()) {
    const ojson& item = parser.deref(raw_item);
    if (!item.is_object()) continue;
    std::string path = normalize_trailing_slash(raw_path);

    std::vector<ApiParameter> shared_params;
    if (item.contains("parameters") && item.at("parameters").is_array())
      for (const auto& p : item.at("parameters"))
        shared_params.push_back(parser.to_parameter(p));

    for (const auto& [key, raw_op] : item.items()) {
      auto method = method_from_string(key);
      if (!method.has_value()) continue;
      const ojson& op_node = parser.deref(raw_op);
      if (!op_node.is_object()) continue;

      ApiOperation op;
      op.method = *method;
      op.path = path;

      if (!seen_method_path.insert({op.method, op.path}).second)
        throw ParseError(source_name + ": duplicate operation " +
                         std::string(to_string(op.method)) + " " + op.path);

      // operation-level parameters override shared ones with the same
      // (name, location)
      std::vector<ApiParameter> own_params;
      if (op_node.contains("parameters") && op_node.at("parameters").is_array())
        for (const auto& p : op_node.at("parameters"))
          own_params.push_back(parser.to_parameter(p));
      for (const auto& shared : shared_params) {
        bool overridden =
            std::any_of(own_params.begin(), own_params.end(),
                        [&](const ApiParameter& q) {
                          return q.name == shared.name &&
                                 q.location == shared.location;
                        });
        if (!overridden) op.parameters.push_back(shared);
      }
      for (auto& p : own_params) op.parameters.push_back(std::move(p));

      for (const auto& ph : path_placeholders(op.path)) {
        bool declared = std::any_of(
            op.parameters.begin(), op.parameters.end(),
            [&](const ApiParameter& q) {
              return q.location == ParamLocation::Path && q.name == ph;
            });
        if (!declared)
          throw ParseError(source_name + ": path " + op.path +
                           " uses placeholder {" + ph +
                           "} without a matching path parameter");
      }

      if (op_node.contains("requestBody")) {
        const ojson& body = parser.deref(op_node.at("requestBody"));
        auto schema = parser.content_schema(body);
        if (schema.has_value()) {
          bool body_required = body.is_object() &&
                               body.contains("required") &&
                               body.at("required").is_boolean() &&
                               body.at("required").get<bool>();
          if (!body_required) {
            // leaves of an optional body are never required
            schema->required.clear();
          }
          op.request_body_schema = std::move(schema);
        }
      }

      if (op_node.contains("responses") && op_node.at("responses").is_object())
        for (const auto& [status, resp] : op_node.at("responses").items()) {
          auto schema = parser.content_schema(parser.deref(resp));
          if (schema.has_value())
            op.response_schemas.emplace_back(status, std::move(*schema));
        }

      if (op_node.contains("security") && op_node.at("security").is_array())
        op.requires_auth_declared = !op_node.at("security").empty();
      else
        op.requires_auth_declared = global_security;

      if (op_node.contains("operationId") &&
          op_node.at("operationId").is_string() &&
          !op_node.at("operationId").get<std::string>().empty())
        op.operation_id = op_node.at("operationId").get<std::string>();
      else
        op.operation_id =
            std::string(to_string(op.method)) + " " + op.path;

      spec.operations.push_back(std::move(op));
    }
  }

  // Duplicate explicit operationIds fall back to the synthesized form, which
  // is unique because (method, path) pairs are.
  std::set<std::string> seen_ids;
  for (auto& op : spec.operations) {
    if (!seen_ids.insert(op.operation_id).second) {
      op.operation_id = std::string(to_string(op.method)) + " " + op.path;
      if (!seen_ids.insert(op.operation_id).second)
        throw ParseError(source_name + ": duplicate operation id " +
                         op.operation_id);
    }
  }

  return spec;
}

ApiSpecification load_specification(
    const std::filesystem::path& path,
    const std::optional<std::string>& base_url_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();

  std::optional<bool> is_yaml;
  auto ext = lower(path.extension().string());
  if (ext == ".yaml" || ext == ".yml")
    is_yaml = true;
  else if (ext == ".json")
    is_yaml = false;

  ApiSpecification spec =
      parse_specification(buf.str(), path.string(), base_url_override, is_yaml);
  spec.source_path = path;
  return spec;
}

std::vector<ApiParameter> flatten_body_parameters(const ApiOperation& op) {
  std::vector<ApiParameter> out = op.parameters;
  if (op.request_body_schema.has_value() &&
      op.request_body_schema->type == ValueType::Object)
    flatten_schema_leaves(*op.request_body_schema, "", true, out);
  return out;
}

}  // namespace authscan
