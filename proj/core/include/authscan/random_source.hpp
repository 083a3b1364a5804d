#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace authscan {

inline constexpr std::string_view kLowercaseAlnum =
    "abcdefghijklmnopqrstuvwxyz0123456789";

// Seeded random source shared by value providers, credential generation and
// token mutation. Every draw goes through one engine, so a fixed seed makes a
// whole scenario run reproducible.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

  // Inclusive bounds.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }

  // [0, count); count must be > 0.
  std::size_t uniform_index(std::size_t count) {
    return std::uniform_int_distribution<std::size_t>(0, count - 1)(engine_);
  }

  // [0, 1)
  double uniform_real() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  bool coin() { return uniform_index(2) == 1; }

  char pick(std::string_view alphabet) {
    return alphabet[uniform_index(alphabet.size())];
  }

  std::string string_of(std::string_view alphabet, std::size_t length) {
    std::string out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) out.push_back(pick(alphabet));
    return out;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace authscan
