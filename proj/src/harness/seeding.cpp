#include "cvo/harness/seeding.hpp"

#include <array>
#include <string>

#include "cvo/core/contract.hpp"

namespace cvo::harness {
namespace {

constexpr std::array<std::string_view, 7> kLabels = {
    "apartment", "traj", "init", "epoch", "scratch", "fisher", "buffer"};

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace

std::string_view stream_label(Stream stream) { return kLabels[static_cast<std::size_t>(stream)]; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
  bool known = false;
  for (auto l : kLabels) known = known || l == label;
  require(known, "derive_seed: unknown stream label '" + std::string(label) + "'");
  // The master is mixed first. With a raw master, small masters and small
  // indices alias (1 ^ 2 == 2 ^ 1), so different runs would share apartments.
  return splitmix64(splitmix64(master) ^ fnv1a64(label) ^ index);
}

std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index) {
  return derive_seed(master, stream_label(stream), index);
}

}  // namespace cvo::harness
