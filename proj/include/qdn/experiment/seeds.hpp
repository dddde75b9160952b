#pragma once

#include <cstdint>
#include <string_view>

namespace qdn {

/// splitmix64 finalizer.
std::uint64_t mix_seed(std::uint64_t x);

/// Independent stream seed for a named component: FNV-1a over the name,
/// combined with the root and mixed. Adding a component never changes the
/// seeds of the others.
std::uint64_t derive_seed(std::uint64_t root, std::string_view component);

}  // namespace qdn
