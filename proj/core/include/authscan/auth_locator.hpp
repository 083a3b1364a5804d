#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "authscan/api_model.hpp"

namespace authscan {

// A login operation together with the parameters picked as the user
// identifier and the password. other_params holds everything else the
// operation accepts (already flattened, body fields included).
struct LoginCandidate {
  const ApiOperation* operation = nullptr;
  std::optional<ApiParameter> user_param;
  std::optional<ApiParameter> password_param;
  std::vector<ApiParameter> other_params;
};

// Lowercases and strips every non-alphabetical character ('/', '-', '_',
// digits, braces, ...).
std::string normalize_path(std::string_view path);

// Lowercases and strips every non-alphanumeric character. Used for parameter
// names and dictionary keys.
std::string normalize_name(std::string_view name);

// POST or GET on a path whose normalized form contains "login" or "signin".
bool is_login_operation(const ApiOperation& op);

// Among string/number/integer parameters, the first whose normalized name
// contains "password"; failing that, the first containing "pass".
std::optional<ApiParameter> rank_password_parameter(
    const std::vector<ApiParameter>& params);

// Scans the priority list username, email, login, user, phone, mail, id and
// returns the first parameter (lowest input index) whose normalized name
// contains the current keyword. `exclude` is the already-chosen password
// parameter and is never returned.
std::optional<ApiParameter> rank_user_parameter(
    const std::vector<ApiParameter>& params,
    const std::optional<ApiParameter>& exclude = std::nullopt);

// One candidate per login operation, parameters ranked as above.
std::vector<LoginCandidate> locate_login(const ApiSpecification& spec);

}  // namespace authscan
