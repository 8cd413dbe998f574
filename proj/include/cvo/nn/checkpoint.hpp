#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cvo/nn/network.hpp"

namespace cvo::nn {

struct Checkpoint {
  NetworkSpec spec;
  ParamVector params;
  std::uint64_t master_seed = 0;
  std::string lineage;  // free-form description of how the seed was derived
  std::uint64_t step = 0;
};

// Layout: "CVOK" | u64 header length | JSON header | f64 little-endian values.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace cvo::nn
