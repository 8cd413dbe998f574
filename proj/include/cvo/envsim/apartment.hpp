#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "cvo/envsim/grid.hpp"

namespace cvo::envsim {

struct SensorModel {
  int n_rays = 32;
  double fov = std::numbers::pi / 2.0;
  double max_range = 5.0;
  double gain = 1.0;
  double bias = 0.0;
  double depth_noise_std = 0.0;
};

struct GenerationParams {
  int width = 64;
  int height = 64;
  double cell_size = 0.1;
  int min_rooms = 4;
  int max_rooms = 9;
  int min_room_side = 8;  // cells
  int door_width = 8;     // cells
  int n_rays = 32;
  double fov = std::numbers::pi / 2.0;
  double max_range = 5.0;
  double gain_min = 0.8, gain_max = 1.2;
  double bias_min = -0.05, bias_max = 0.05;
  double noise_min = 0.005, noise_max = 0.02;
  double motion_scale_min = 0.5, motion_scale_max = 2.0;
  int min_free_region = 100;
  int max_attempts = 100;
};

struct ApartmentSpec {
  std::uint32_t id = 0;
  std::uint64_t seed = 0;
  OccupancyGrid grid;
  SensorModel sensor;
  double motion_scale = 1.0;
  std::vector<int> reachable;  // largest free region, cell indices
};

// Carves axis-aligned rooms by recursive binary splits of the interior and
// opens one door in every splitting wall. Throws std::runtime_error if no
// attempt yields a free region of at least params.min_free_region cells.
ApartmentSpec generate_apartment(std::uint64_t seed, const GenerationParams& params = {},
                                 std::uint32_t id = 0);

}  // namespace cvo::envsim
