#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "cvo/envsim/grid.hpp"

namespace testutil {

// Closed box of the given size with every interior cell free.
inline cvo::envsim::OccupancyGrid open_box(int w, int h, double cell = 0.1) {
  cvo::envsim::OccupancyGrid g(w, h, cell, true);
  for (int iz = 1; iz < h - 1; ++iz)
    for (int ix = 1; ix < w - 1; ++ix) g.set(ix, iz, false);
  return g;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cvo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
