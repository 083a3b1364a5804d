#include "authscan/auth_locator.hpp"

#include <array>
#include <cctype>

namespace authscan {

namespace {

bool credential_eligible(const ApiParameter& p) {
  // User identifiers and passwords are strings or numbers, never booleans,
  // arrays, or objects.
  return p.value_type == ValueType::String ||
         p.value_type == ValueType::Number ||
         p.value_type == ValueType::Integer;
}

bool same_parameter(const ApiParameter& a, const ApiParameter& b) {
  return a.name == b.name && a.location == b.location;
}

}  // namespace

std::string normalize_path(std::string_view path) {
  std::string out;
  out.reserve(path.size());
  for (unsigned char c : path)
    if (std::isalpha(c)) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

std::string normalize_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (unsigned char c : name)
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

bool is_login_operation(const ApiOperation& op) {
  if (op.method != HttpMethod::Post && op.method != HttpMethod::Get)
    return false;
  std::string p = normalize_path(op.path);
  return p.find("login") != std::string::npos ||
         p.find("signin") != std::string::npos;
}

std::optional<ApiParameter> rank_password_parameter(
    const std::vector<ApiParameter>& params) {
  for (std::string_view keyword : {"password", "pass"}) {
    for (const auto& p : params) {
      if (!credential_eligible(p)) continue;
      if (normalize_name(p.name).find(keyword) != std::string::npos) return p;
    }
  }
  return std::nullopt;
}

std::optional<ApiParameter> rank_user_parameter(
    const std::vector<ApiParameter>& params,
    const std::optional<ApiParameter>& exclude) {
  static constexpr std::array<std::string_view, 7> kPriority = {
      "username", "email", "login", "user", "phone", "mail", "id"};
  // Keyword-major scan: a parameter is claimed by the highest-priority
  // keyword its name contains, e.g. "userId" matches "user" before "id".
  for (std::string_view keyword : kPriority) {
    for (const auto& p : params) {
      if (!credential_eligible(p)) continue;
      if (exclude.has_value() && same_parameter(p, *exclude)) continue;
      if (normalize_name(p.name).find(keyword) != std::string::npos) return p;
    }
  }
  return std::nullopt;
}

std::vector<LoginCandidate> locate_login(const ApiSpecification& spec) {
  std::vector<LoginCandidate> out;
  for (const auto& op : spec.operations) {
    if (!is_login_operation(op)) continue;
    LoginCandidate candidate;
    candidate.operation = &op;
    std::vector<ApiParameter> params = flatten_body_parameters(op);
    candidate.password_param = rank_password_parameter(params);
    candidate.user_param = rank_user_parameter(params, candidate.password_param);
    for (const auto& p : params) {
      bool is_user = candidate.user_param.has_value() &&
                     same_parameter(p, *candidate.user_param);
      bool is_password = candidate.password_param.has_value() &&
                         same_parameter(p, *candidate.password_param);
      if (!is_user && !is_password) candidate.other_params.push_back(p);
    }
    out.push_back(std::move(candidate));
  }
  return out;
}

}  // namespace authscan
