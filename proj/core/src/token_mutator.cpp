#include "authscan/token_mutator.hpp"

#include <algorithm>
#include <set>

#include "authscan/errors.hpp"

namespace authscan {

namespace {

constexpr std::string_view kBase64UrlAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
constexpr std::string_view kAlnumAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

bool in_alphabet(char c, std::string_view alphabet) {
  return alphabet.find(c) != std::string_view::npos;
}

std::string_view alphabet_for(TokenShape shape) {
  return shape == TokenShape::Jwt ? kBase64UrlAlphabet : kAlnumAlphabet;
}

// Indices that may be touched: everything for opaque tokens, everything but
// the structural dots for jwt-shaped ones.
std::vector<std::size_t> eligible_positions(const std::string& token,
                                            TokenShape shape) {
  std::vector<std::size_t> out;
  out.reserve(token.size());
  for (std::size_t i = 0; i < token.size(); ++i)
    if (shape != TokenShape::Jwt || token[i] != '.') out.push_back(i);
  return out;
}

}  // namespace

std::string_view to_string(MutationOperator op) {
  switch (op) {
    case MutationOperator::AlterChar:
      return "alter_char";
    case MutationOperator::RemoveChar:
      return "remove_char";
    case MutationOperator::AddChar:
      return "add_char";
  }
  return "alter_char";
}

TokenShape detect_token_shape(const std::string& token) {
  if (token.empty()) throw EmptyTokenError("token is empty");
  std::vector<std::string> segments;
  std::size_t start = 0;
  while (true) {
    auto dot = token.find('.', start);
    if (dot == std::string::npos) {
      segments.push_back(token.substr(start));
      break;
    }
    segments.push_back(token.substr(start, dot - start));
    start = dot + 1;
  }
  if (segments.size() != 3) return TokenShape::Opaque;
  for (const auto& seg : segments) {
    if (seg.empty()) return TokenShape::Opaque;
    for (char c : seg)
      if (!in_alphabet(c, kBase64UrlAlphabet)) return TokenShape::Opaque;
  }
  return TokenShape::Jwt;
}

TokenMutation mutate(const std::string& token, MutationOperator op,
                     RandomSource& rng) {
  if (token.empty()) throw EmptyTokenError("token is empty");
  const TokenShape shape = detect_token_shape(token);
  const std::string_view alphabet = alphabet_for(shape);

  TokenMutation mutation;
  mutation.op = op;
  mutation.original_token = token;
  mutation.rng_seed = rng.seed();

  switch (op) {
    case MutationOperator::AlterChar: {
      auto positions = eligible_positions(token, shape);
      if (positions.empty())
        throw NoEligiblePositionError("no non-structural character to alter");
      std::size_t pos = positions[rng.uniform_index(positions.size())];
      char replacement = rng.pick(alphabet);
      while (replacement == token[pos]) replacement = rng.pick(alphabet);
      mutation.position = pos;
      mutation.mutated_token = token;
      mutation.mutated_token[pos] = replacement;
      break;
    }
    case MutationOperator::RemoveChar: {
      auto positions = eligible_positions(token, shape);
      if (positions.empty())
        throw NoEligiblePositionError("no non-structural character to remove");
      std::size_t pos = positions[rng.uniform_index(positions.size())];
      mutation.position = pos;
      mutation.mutated_token = token;
      mutation.mutated_token.erase(pos, 1);
      break;
    }
    case MutationOperator::AddChar: {
      // Inserted characters come from the alphabet, so no insertion can
      // create or destroy a dot.
      std::size_t pos = rng.uniform_index(token.size() + 1);
      mutation.position = pos;
      mutation.mutated_token = token;
      mutation.mutated_token.insert(mutation.mutated_token.begin() +
                                        static_cast<std::ptrdiff_t>(pos),
                                    rng.pick(alphabet));
      break;
    }
  }
  return mutation;
}

std::vector<TokenMutation> mutation_plan(const std::string& token,
                                         std::size_t count,
                                         RandomSource& rng) {
  if (token.empty()) throw EmptyTokenError("token is empty");
  constexpr MutationOperator kCycle[] = {MutationOperator::AlterChar,
                                         MutationOperator::RemoveChar,
                                         MutationOperator::AddChar};
  constexpr int kMaxAttempts = 100;

  std::vector<TokenMutation> plan;
  plan.reserve(count);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < count; ++i) {
    MutationOperator op = kCycle[i % 3];
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      TokenMutation m = mutate(token, op, rng);
      if (seen.insert(m.mutated_token).second) {
        plan.push_back(std::move(m));
        placed = true;
        break;
      }
    }
    if (!placed)
      throw ExhaustedMutationsError(
          "cannot produce " + std::to_string(count) +
          " pairwise distinct mutations of a " +
          std::to_string(token.size()) + "-character token");
  }
  return plan;
}

}  // namespace authscan
