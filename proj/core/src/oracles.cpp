#include "authscan/oracles.hpp"

#include <algorithm>
#include <cctype>

#include "authscan/errors.hpp"

namespace authscan {

std::string_view to_string(VulnerabilityClass vulnerability) {
  switch (vulnerability) {
    case VulnerabilityClass::CredentialStuffing:
      return "credential_stuffing";
    case VulnerabilityClass::PasswordBruteForce:
      return "password_brute_force";
    case VulnerabilityClass::UncheckedTokenAuthenticity:
      return "unchecked_token_authenticity";
  }
  return "credential_stuffing";
}

std::string_view severity_of(VulnerabilityClass vulnerability) {
  switch (vulnerability) {
    case VulnerabilityClass::CredentialStuffing:
    case VulnerabilityClass::PasswordBruteForce:
      return "high";
    case VulnerabilityClass::UncheckedTokenAuthenticity:
      return "critical";
  }
  return "high";
}

MessageFingerprint fingerprint(std::string_view message) {
  MessageFingerprint fp;
  fp.raw = std::string(message);

  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    bool numeric = std::all_of(token.begin(), token.end(), [](unsigned char c) {
      return std::isdigit(c);
    });
    // numeric tokens are request ids / timestamps, not message content
    if (!numeric) fp.tokens.insert(porter_stem(token));
    token.clear();
  };

  for (unsigned char c : message) {
    if (std::isalnum(c))
      token.push_back(static_cast<char>(std::tolower(c)));
    else
      flush();
  }
  flush();
  return fp;
}

double similarity(const MessageFingerprint& a, const MessageFingerprint& b) {
  if (a.tokens.empty() && b.tokens.empty()) return 1.0;
  if (a.tokens.empty() || b.tokens.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : a.tokens) shared += b.tokens.count(t);
  return static_cast<double>(shared) /
         static_cast<double>(std::max(a.tokens.size(), b.tokens.size()));
}

OracleVerdict lockout_oracle(const ExecutionTrace& trace, double threshold) {
  std::size_t completed = 0;
  for (const auto& i : trace.interactions)
    if (i.completed()) ++completed;
  if (completed < 3)
    throw InsufficientDataError(
        "lockout oracle needs at least 3 completed interactions, got " +
        std::to_string(completed));

  OracleVerdict verdict;

  bool saw_429 = false;
  for (const auto& i : trace.interactions)
    if (i.completed() && i.response->status == 429) saw_429 = true;
  verdict.property1_rate_limit_absent = !saw_429;

  // Property 2 compares error bodies (non-2xx, non-429) against the first
  // error response; 2xx responses are outside the oracle's domain.
  const HttpInteraction* anchor = nullptr;
  MessageFingerprint anchor_fp;
  verdict.property2_messages_static = true;
  double min_sim = 1.0;
  double sum_sim = 0.0;
  std::size_t compared = 0;

  for (const auto& i : trace.interactions) {
    if (!i.completed() || i.succeeded_2xx() || i.response->status == 429)
      continue;
    if (anchor == nullptr) {
      anchor = &i;
      anchor_fp = fingerprint(i.response->body);
      verdict.evidence.push_back(i.sequence_index);
      continue;
    }
    double sim = similarity(anchor_fp, fingerprint(i.response->body));
    verdict.evidence.push_back(i.sequence_index);
    min_sim = std::min(min_sim, sim);
    sum_sim += sim;
    ++compared;
    if (sim < threshold) verdict.property2_messages_static = false;
  }

  verdict.min_similarity = compared > 0 ? min_sim : 1.0;
  verdict.mean_similarity =
      compared > 0 ? sum_sim / static_cast<double>(compared) : 1.0;
  verdict.vulnerable =
      verdict.property1_rate_limit_absent && verdict.property2_messages_static;
  return verdict;
}

TokenOracleResult token_oracle(const ExecutionTrace& mutated_trace,
                               const ExecutionTrace& no_token_trace) {
  if (mutated_trace.interactions.size() != no_token_trace.interactions.size())
    throw TraceMismatchError("traces cover different numbers of interactions");
  for (std::size_t i = 0; i < mutated_trace.interactions.size(); ++i)
    if (mutated_trace.interactions[i].operation_id !=
        no_token_trace.interactions[i].operation_id)
      throw TraceMismatchError(
          "traces diverge at interaction " + std::to_string(i) + ": " +
          mutated_trace.interactions[i].operation_id + " vs " +
          no_token_trace.interactions[i].operation_id);

  TokenOracleResult result;
  for (const auto& i : mutated_trace.interactions)
    if (i.succeeded_2xx())
      result.accepted_with_mutated_token.insert(i.operation_id);
  for (const auto& i : no_token_trace.interactions)
    if (i.succeeded_2xx())
      result.accepted_without_token.insert(i.operation_id);

  std::set_difference(
      result.accepted_with_mutated_token.begin(),
      result.accepted_with_mutated_token.end(),
      result.accepted_without_token.begin(),
      result.accepted_without_token.end(),
      std::inserter(result.vulnerable_operations,
                    result.vulnerable_operations.begin()));

  TokenSetSummary summary;
  summary.accepted_with_mutated_token.assign(
      result.accepted_with_mutated_token.begin(),
      result.accepted_with_mutated_token.end());
  summary.accepted_without_token.assign(result.accepted_without_token.begin(),
                                        result.accepted_without_token.end());
  summary.vulnerable_operations.assign(result.vulnerable_operations.begin(),
                                       result.vulnerable_operations.end());

  for (const auto& op_id : result.vulnerable_operations) {
    SecurityFinding finding;
    finding.vulnerability = VulnerabilityClass::UncheckedTokenAuthenticity;
    finding.operation_id = op_id;
    finding.token_summary = summary;
    finding.severity = std::string(severity_of(finding.vulnerability));
    for (const auto& i : mutated_trace.interactions)
      if (i.operation_id == op_id && i.succeeded_2xx())
        finding.evidence_indexes.push_back(i.sequence_index);
    result.findings.push_back(std::move(finding));
  }
  return result;
}

}  // namespace authscan
