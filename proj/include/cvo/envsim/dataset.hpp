#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "cvo/core/random.hpp"
#include "cvo/envsim/apartment.hpp"
#include "cvo/envsim/simulator.hpp"

namespace cvo::envsim {

struct ExperienceDataset {
  std::uint32_t apartment_id = 0;
  int n_rays = 0;
  std::vector<StepRecord> train;
  std::vector<StepRecord> val;
  std::vector<StepRecord> test;

  std::size_t size() const { return train.size() + val.size() + test.size(); }
};

// Largest-remainder split of n into 82/6/12 percent; ties favor train.
std::array<std::size_t, 3> split_sizes(std::size_t n);

struct ExperienceParams {
  PolicyParams policy;
  int trajectory_steps = 200;
};

ExperienceDataset build_experience(const ApartmentSpec& apartment, std::size_t n_samples, Rng& rng,
                                   const ExperienceParams& params = {});

// Rounds every scan and displacement value to the on-disk f32 precision, so a
// freshly generated dataset and one loaded from disk are identical.
void quantize_to_storage(ExperienceDataset& dataset);

// Binary, little-endian: "CVOD" | u16 version | u32 apartment id | u16 n_rays |
// u32 x3 split counts | records (f32 scan_t[n], f32 scan_t1[n], u8 action,
// f32 gt[3], u8 collided) in train, val, test order.
inline constexpr std::uint16_t kDatasetFormatVersion = 1;

void write_dataset(const std::filesystem::path& path, const ExperienceDataset& dataset);
ExperienceDataset read_dataset(const std::filesystem::path& path);
void export_csv(const std::filesystem::path& path, const ExperienceDataset& dataset);

}  // namespace cvo::envsim
