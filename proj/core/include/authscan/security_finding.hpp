#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace authscan {

enum class VulnerabilityClass {
  CredentialStuffing,
  PasswordBruteForce,
  UncheckedTokenAuthenticity,
};

std::string_view to_string(VulnerabilityClass vulnerability);
std::string_view severity_of(VulnerabilityClass vulnerability);

// Lockout oracle outcome over one stuffing / brute-force trace.
struct OracleVerdict {
  bool vulnerable = false;
  bool property1_rate_limit_absent = false;
  bool property2_messages_static = false;
  std::vector<std::size_t> evidence;  // compared interaction indexes
  double min_similarity = 1.0;
  double mean_similarity = 1.0;
};

// W / N / V sets of the token-authenticity oracle, sorted.
struct TokenSetSummary {
  std::vector<std::string> accepted_with_mutated_token;  // W
  std::vector<std::string> accepted_without_token;       // N
  std::vector<std::string> vulnerable_operations;        // V = W - N
};

struct SecurityFinding {
  VulnerabilityClass vulnerability = VulnerabilityClass::CredentialStuffing;
  std::string operation_id;
  std::optional<OracleVerdict> lockout_verdict;
  std::optional<TokenSetSummary> token_summary;
  std::vector<std::size_t> evidence_indexes;
  std::string severity;
  std::string trace_file;     // filled when the report is assembled
  std::size_t trace_ordinal = 0;  // index into the producing strategy's traces
};

}  // namespace authscan
