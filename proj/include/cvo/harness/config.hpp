#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cvo/nn/network.hpp"
#include "cvo/strategies/strategies.hpp"

namespace cvo::harness {

struct RunConfig {
  std::uint64_t master_seed = 1;
  int n_train_apartments = 24;
  int n_holdout_apartments = 8;
  int samples_per_apartment = 2000;
  std::vector<std::string> strategies = {"naive",      "ewc_100",    "lwf_1",
                                         "replay_164", "replay_820", "replay_1640"};
  bool action_conditioned = false;
  nn::Preset preset = nn::Preset::Small;
  std::filesystem::path output_dir = "runs/default";
  // Empty means <output_dir>/data.
  std::filesystem::path cache_dir;
  bool scratch = true;
  bool joint = true;
  bool save_checkpoints = true;

  int max_epochs = 40;
  int batch_size = 32;
  double learning_rate = 2e-4;
  int patience = 5;
  std::size_t fisher_samples = 512;

  std::filesystem::path resolved_cache_dir() const;
  strategies::StrategyConfig strategy(const std::string& label) const;
  void validate() const;
  // One key per line in a fixed order; hashed into the manifest.
  std::string canonical_text() const;
};

// Parses `key = value` lines. Values are numbers, true/false, quoted or bare
// strings, or bracketed comma-separated lists. '#' starts a comment.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// CVO_OUTPUT_DIR, when set and non-empty, replaces output_dir.
inline constexpr const char* kOutputDirEnv = "CVO_OUTPUT_DIR";
void apply_env_overrides(RunConfig& config);

}  // namespace cvo::harness
