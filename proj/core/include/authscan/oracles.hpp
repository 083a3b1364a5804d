#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "authscan/http_engine.hpp"
#include "authscan/security_finding.hpp"

namespace authscan {

// Suffix-stripping stemmer, steps 1a through 5b of the classic algorithm.
// Expects a lowercase word; words of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

// An error message reduced to its set of stemmed tokens. Tokenization splits
// on every non-alphanumeric character; purely numeric tokens (timestamps,
// request ids) are dropped before stemming.
struct MessageFingerprint {
  std::string raw;
  std::set<std::string> tokens;
};

MessageFingerprint fingerprint(std::string_view message);

// |a ∩ b| / max(|a|, |b|). 1 when both sets are empty, 0 when exactly one is.
double similarity(const MessageFingerprint& a, const MessageFingerprint& b);

// Judges a stuffing / brute-force trace:
//   property 1 — no interaction answered 429,
//   property 2 — every error body stays similar (>= threshold) to the first.
// vulnerable = both properties hold, i.e. no lockout countermeasure fired.
// Throws InsufficientDataError below 3 completed interactions.
OracleVerdict lockout_oracle(const ExecutionTrace& trace, double threshold);

struct TokenOracleResult {
  std::set<std::string> accepted_with_mutated_token;  // W
  std::set<std::string> accepted_without_token;       // N
  std::set<std::string> vulnerable_operations;        // V = W - N
  std::vector<SecurityFinding> findings;
};

// W = operations answering 2xx to a mutated token, N = operations answering
// 2xx with no token at all, V = W - N. Both traces must cover the same
// operation sequence (TraceMismatchError otherwise).
TokenOracleResult token_oracle(const ExecutionTrace& mutated_trace,
                               const ExecutionTrace& no_token_trace);

}  // namespace authscan
