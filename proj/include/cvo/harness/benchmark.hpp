#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cvo/envsim/dataset.hpp"
#include "cvo/harness/config.hpp"
#include "cvo/harness/manifest.hpp"
#include "cvo/metrics/metrics.hpp"
#include "cvo/strategies/strategies.hpp"

namespace cvo::harness {

struct ApartmentStats {
  std::uint32_t apartment_id = 0;
  bool holdout = false;
  double gain = 0.0, bias = 0.0, depth_noise_std = 0.0, motion_scale = 0.0;
  std::size_t records = 0;
  std::size_t forward = 0, left = 0, right = 0, collisions = 0;
};

struct BenchmarkData {
  std::vector<envsim::ExperienceDataset> train;
  std::vector<envsim::ExperienceDataset> holdout;
  std::vector<ApartmentStats> stats;  // train apartments first, then holdout
  std::vector<std::filesystem::path> files;
  std::size_t generated = 0;  // apartments not found in the cache
};

std::filesystem::path dataset_path(const RunConfig& config, int apartment_index);

// Loads each apartment from the cache or generates and stores it.
BenchmarkData prepare_datasets(const RunConfig& config);

struct StrategyResult {
  std::string label;
  strategies::StrategyConfig config;
  metrics::LossMatrix loss{1};
  metrics::Summary summary;
  // Indexed by k - 1; empty for k = 1 (and for fwt without scratch runs).
  std::vector<std::optional<double>> bwt, fr, fwt;
  std::vector<std::optional<double>> holdout;
  // components[k][j]
  std::vector<std::vector<metrics::ComponentLosses>> components;
  std::vector<metrics::VariabilityProfile> variability;
  std::vector<strategies::TrainReport> reports;
  double final_val_loss = 0.0;  // mean validation loss over experiences after the last one
};

struct JointResult {
  std::vector<double> test_loss;  // per experience
  double final_value = 0.0;
  std::optional<double> holdout;
  strategies::TrainReport report;
};

struct BenchmarkResult {
  RunConfig config;
  std::vector<ApartmentStats> dataset_stats;
  std::vector<StrategyResult> strategies;
  std::vector<std::optional<double>> scratch;  // per experience, entry 0 unused by FWT
  std::vector<strategies::TrainReport> scratch_reports;
  std::optional<JointResult> joint;
  RunManifest manifest;
};

// Full pipeline: datasets, every strategy in order, scratch and joint
// baselines, CSVs, plots and the manifest. On failure a partial manifest is
// written and the exception rethrown.
BenchmarkResult run_benchmark(const RunConfig& config);

// Re-renders every SVG from the CSVs in a run directory; returns the files.
std::vector<std::filesystem::path> render_plots(const std::filesystem::path& run_dir);

// Output files that are expected to differ between identical runs.
bool is_timing_artifact(const std::filesystem::path& relative);

}  // namespace cvo::harness
