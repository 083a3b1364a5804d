#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "authscan/random_source.hpp"

namespace authscan {

enum class MutationOperator { AlterChar, RemoveChar, AddChar };

std::string_view to_string(MutationOperator op);

enum class TokenShape { Jwt, Opaque };

// Descriptor of one token mutation plus the resulting token.
struct TokenMutation {
  MutationOperator op = MutationOperator::AlterChar;
  std::size_t position = 0;
  std::string original_token;
  std::string mutated_token;
  std::uint64_t rng_seed = 0;
};

// jwt iff the token splits on '.' into exactly three non-empty base64url
// segments ('=' or any other character outside the alphabet makes it opaque).
TokenShape detect_token_shape(const std::string& token);

// Applies one operator at a random eligible position. Dots in jwt-shaped
// tokens are structural and never altered, removed, or created; replacement
// and inserted characters come from the token's valid alphabet (base64url
// for jwt, alphanumerics for opaque).
TokenMutation mutate(const std::string& token, MutationOperator op,
                     RandomSource& rng);

// `count` mutations cycling through [alter, remove, add, ...], all mutated
// tokens pairwise distinct. Resamples on collision; throws
// ExhaustedMutationsError when distinctness cannot be met.
std::vector<TokenMutation> mutation_plan(const std::string& token,
                                         std::size_t count, RandomSource& rng);

}  // namespace authscan
