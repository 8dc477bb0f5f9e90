#pragma once

#include <cstdint>
#include <string_view>

namespace phasorsec {

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

// Independent child seeds from one root, keyed by a label and an index.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0);

}  // namespace phasorsec
