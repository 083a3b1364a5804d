#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace authscan {

enum class HttpMethod { Get, Post, Put, Patch, Delete, Head, Options };

std::string_view to_string(HttpMethod method);
std::optional<HttpMethod> method_from_string(std::string_view text);

enum class ParamLocation { Path, Query, Header, Cookie, BodyField };

std::string_view to_string(ParamLocation location);

enum class ValueType { String, Number, Integer, Boolean, Array, Object };

std::string_view to_string(ValueType type);

// Resolved JSON schema node. Only the pieces the scanner needs are kept:
// shape, documented values, and which object fields are required.
struct Schema {
  ValueType type = ValueType::Object;
  std::string format;
  std::vector<std::pair<std::string, Schema>> properties;
  std::shared_ptr<Schema> items;  // element schema for arrays
  std::vector<nlohmann::json> enum_values;
  std::vector<nlohmann::json> example_values;
  nlohmann::json default_value;  // null when absent
  std::vector<std::string> required;
};

struct ApiParameter {
  std::string name;
  ParamLocation location = ParamLocation::Query;
  ValueType value_type = ValueType::String;
  bool required = false;
  std::vector<nlohmann::json> example_values;
  std::vector<nlohmann::json> enum_values;
  nlohmann::json default_value;  // null when absent
  std::string format;
};

struct ApiOperation {
  std::string operation_id;  // "<METHOD> <path>" when the document has none
  HttpMethod method = HttpMethod::Get;
  std::string path;  // template, placeholders kept verbatim
  std::vector<ApiParameter> parameters;
  std::optional<Schema> request_body_schema;
  std::vector<std::pair<std::string, Schema>> response_schemas;  // status pattern -> schema
  bool requires_auth_declared = false;
};

enum class SchemeKind { HttpBearer, ApiKey, HttpBasic, OAuth2, Other };
enum class TokenCarrier { Header, Query, Cookie };

struct SecurityScheme {
  std::string name;
  SchemeKind kind = SchemeKind::HttpBearer;
  TokenCarrier carrier = TokenCarrier::Header;
  std::string carrier_name = "Authorization";
};

// Immutable after construction; safe to share across concurrent readers.
struct ApiSpecification {
  std::string base_url;
  std::vector<ApiOperation> operations;
  std::vector<SecurityScheme> security_schemes;
  std::filesystem::path source_path;
};

// Loads an OpenAPI 3.x document (JSON or YAML) into the normalized model.
// Local $ref references are resolved; remote references are not fetched.
// Throws ParseError, UnsupportedSpecError or MissingServerError.
ApiSpecification load_specification(
    const std::filesystem::path& path,
    const std::optional<std::string>& base_url_override = std::nullopt);

// Same, from already-loaded text. `source_name` is used in error messages and
// may name a file, "<string>", etc. `is_yaml` forces the YAML front-end; by
// default the text is sniffed (JSON when it starts with '{' or '[').
ApiSpecification parse_specification(
    const std::string& text, const std::string& source_name,
    const std::optional<std::string>& base_url_override = std::nullopt,
    std::optional<bool> is_yaml = std::nullopt);

// The operation's declared parameters plus one parameter per leaf field of
// the request body object schema (location = body-field, dotted names for
// nested fields). Arrays stay as a single parameter of type array.
std::vector<ApiParameter> flatten_body_parameters(const ApiOperation& op);

}  // namespace authscan
