#pragma once

#include <cstdint>
#include <string_view>

namespace cvo::harness {

// Named random streams. Every stochastic unit in a run draws from exactly one
// of these, keyed by an index (apartment id, experience index, ...).
enum class Stream { Apartment, Traj, Init, Epoch, Scratch, Fisher, Buffer };

std::string_view stream_label(Stream stream);

std::uint64_t splitmix64(std::uint64_t x);

// splitmix64(splitmix64(master) ^ fnv1a(label) ^ index). Throws ContractViolation for a
// label outside the stream vocabulary.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index);
std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index);

}  // namespace cvo::harness
