#include "authscan/value_providers.hpp"

#include <cctype>
#include <cmath>
#include <optional>

#include "authscan/auth_locator.hpp"

namespace authscan {

namespace {

// Coerces a candidate value to the parameter's declared type. Numeric
// strings become numbers, numbers render to strings, etc. nullopt when the
// value cannot conform.
std::optional<nlohmann::json> coerce(ValueType type,
                                     const nlohmann::json& value) {
  switch (type) {
    case ValueType::String:
      if (value.is_string()) return value;
      if (value.is_number() || value.is_boolean())
        return nlohmann::json(value.dump());
      return std::nullopt;
    case ValueType::Integer:
      if (value.is_number_integer()) return value;
      if (value.is_number_float()) {
        double d = value.get<double>();
        if (d == std::floor(d)) return nlohmann::json(static_cast<std::int64_t>(d));
        return std::nullopt;
      }
      if (value.is_string()) {
        try {
          std::size_t pos = 0;
          long long v = std::stoll(value.get<std::string>(), &pos);
          if (pos == value.get<std::string>().size()) return nlohmann::json(v);
        } catch (const std::exception&) {
        }
      }
      return std::nullopt;
    case ValueType::Number:
      if (value.is_number()) return value;
      if (value.is_string()) {
        try {
          std::size_t pos = 0;
          double v = std::stod(value.get<std::string>(), &pos);
          if (pos == value.get<std::string>().size()) return nlohmann::json(v);
        } catch (const std::exception&) {
        }
      }
      return std::nullopt;
    case ValueType::Boolean:
      if (value.is_boolean()) return value;
      if (value.is_string()) {
        if (value.get<std::string>() == "true") return nlohmann::json(true);
        if (value.get<std::string>() == "false") return nlohmann::json(false);
      }
      return std::nullopt;
    case ValueType::Array:
      if (value.is_array()) return value;
      return std::nullopt;
    case ValueType::Object:
      if (value.is_object()) return value;
      return std::nullopt;
  }
  return std::nullopt;
}

nlohmann::json random_fallback(const ApiParameter& param, RandomSource& rng) {
  switch (param.value_type) {
    case ValueType::String: {
      if (param.format == "email")
        return rng.string_of("abcdefghijklmnopqrstuvwxyz", 8) + "@" +
               rng.string_of("abcdefghijklmnopqrstuvwxyz", 7) + ".com";
      auto length = static_cast<std::size_t>(rng.uniform_int(8, 16));
      return rng.string_of(kLowercaseAlnum, length);
    }
    case ValueType::Integer:
      return rng.uniform_int(0, 100);
    case ValueType::Number:
      return rng.uniform_real();
    case ValueType::Boolean:
      return rng.coin();
    case ValueType::Array:
      return nlohmann::json::array();
    case ValueType::Object:
      return nlohmann::json::object();
  }
  return nlohmann::json();
}

// Leaf values of a JSON tree. Scalars inside arrays count as leaves of the
// array's own field name.
void record_json_leaves(ObservedDictionary& dict, const nlohmann::json& node,
                        const std::string& path, const std::string& leaf_name,
                        ValueSource source, std::int64_t ts, int depth = 0) {
  if (depth > 32) return;
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      std::string sub_path = path.empty() ? key : path + "." + key;
      record_json_leaves(dict, value, sub_path, key, source, ts, depth + 1);
    }
    return;
  }
  if (node.is_array()) {
    for (const auto& value : node)
      record_json_leaves(dict, value, path, leaf_name, source, ts, depth + 1);
    return;
  }
  if (leaf_name.empty()) return;
  dict.record(leaf_name, node, source, ts);
  if (path != leaf_name) dict.record(path, node, source, ts);
}

// "page=2" -> number 2, "flag=true" -> bool, otherwise the raw string.
nlohmann::json parse_query_scalar(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  try {
    std::size_t pos = 0;
    long long v = std::stoll(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  return text;
}

std::string percent_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%' && i + 2 < text.size() &&
        std::isxdigit(static_cast<unsigned char>(text[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(text[i + 2]))) {
      auto hex = [](char c) {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return c - 'A' + 10;
      };
      out.push_back(static_cast<char>(hex(text[i + 1]) * 16 + hex(text[i + 2])));
      i += 2;
    } else if (text[i] == '+') {
      out.push_back(' ');
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

void record_query_params(ObservedDictionary& dict, const std::string& url,
                         std::int64_t ts) {
  auto qpos = url.find('?');
  if (qpos == std::string::npos) return;
  std::string_view query(url);
  query.remove_prefix(qpos + 1);
  while (!query.empty()) {
    auto amp = query.find('&');
    std::string_view pair = query.substr(0, amp);
    auto eq = pair.find('=');
    if (eq != std::string_view::npos && eq > 0) {
      std::string name = percent_decode(pair.substr(0, eq));
      std::string value = percent_decode(pair.substr(eq + 1));
      dict.record(name, parse_query_scalar(value), ValueSource::Request, ts);
    }
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
}

void record_body_leaves(ObservedDictionary& dict, const std::string& body,
                        ValueSource source, std::int64_t ts) {
  if (body.empty()) return;
  nlohmann::json node = nlohmann::json::parse(body, nullptr, false);
  if (node.is_discarded()) return;  // non-JSON bodies carry no named leaves
  record_json_leaves(dict, node, "", "", source, ts);
}

}  // namespace

void ObservedDictionary::record(std::string_view raw_name,
                                nlohmann::json value, ValueSource source,
                                std::int64_t timestamp_ms) {
  std::string key = normalize_name(raw_name);
  if (key.empty()) return;
  entries_[key].push_back({std::move(value), source, timestamp_ms});
}

const ObservedValue* ObservedDictionary::most_recent(
    std::string_view raw_name) const {
  auto it = entries_.find(normalize_name(raw_name));
  if (it == entries_.end() || it->second.empty()) return nullptr;
  return &it->second.back();
}

std::size_t ObservedDictionary::entry_count() const {
  std::size_t n = 0;
  for (const auto& [key, values] : entries_) n += values.size();
  return n;
}

nlohmann::json provide_value(const ApiParameter& param,
                             const ObservedDictionary& dictionary,
                             RandomSource& rng) {
  if (!param.example_values.empty()) {
    const auto& pick =
        param.example_values[rng.uniform_index(param.example_values.size())];
    if (auto v = coerce(param.value_type, pick)) return *v;
  }
  if (!param.enum_values.empty()) {
    const auto& pick =
        param.enum_values[rng.uniform_index(param.enum_values.size())];
    if (auto v = coerce(param.value_type, pick)) return *v;
  }
  if (!param.default_value.is_null()) {
    if (auto v = coerce(param.value_type, param.default_value)) return *v;
  }
  if (const ObservedValue* seen = dictionary.most_recent(param.name)) {
    if (auto v = coerce(param.value_type, seen->value)) return *v;
  }
  return random_fallback(param, rng);
}

void record_interaction(ObservedDictionary& dictionary,
                        const HttpInteraction& interaction) {
  record_query_params(dictionary, interaction.request.url,
                      interaction.sent_at_ms);
  record_body_leaves(dictionary, interaction.request.body,
                     ValueSource::Request, interaction.sent_at_ms);
  if (interaction.succeeded_2xx())
    record_body_leaves(dictionary, interaction.response->body,
                       ValueSource::Response, interaction.received_at_ms);
}

}  // namespace authscan
