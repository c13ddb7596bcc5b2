#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace labornet {

using Rng = std::mt19937_64;

// Seed for the sub-stream (component, purpose, index) of a root seed.
// Distinct names or indices give statistically independent streams.
std::uint64_t derive_seed(std::uint64_t root, std::string_view component,
                          std::string_view purpose, std::uint64_t index = 0);

inline Rng make_stream(std::uint64_t root, std::string_view component,
                       std::string_view purpose, std::uint64_t index = 0) {
  return Rng(derive_seed(root, component, purpose, index));
}

}  // namespace labornet
