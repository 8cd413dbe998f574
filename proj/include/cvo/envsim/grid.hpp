#pragma once

#include <cstdint>
#include <vector>

namespace cvo::envsim {

// Planar world pose. The world plane is spanned by (x, z); theta is measured
// counterclockwise from +x and kept in (-pi, pi].
struct AgentPose {
  double x = 0.0;
  double z = 0.0;
  double theta = 0.0;
};

double wrap_angle(double angle);

// Row-major occupancy raster, cell (ix, iz) at index iz * width + ix.
// Cell (ix, iz) covers [ix, ix+1) x [iz, iz+1) times cell_size in world units.
struct OccupancyGrid {
  int width = 0;
  int height = 0;
  double cell_size = 0.1;
  std::vector<std::uint8_t> cells;  // 1 = obstacle

  OccupancyGrid() = default;
  OccupancyGrid(int w, int h, double cell, bool fill_occupied);

  bool in_bounds(int ix, int iz) const { return ix >= 0 && iz >= 0 && ix < width && iz < height; }
  bool occupied(int ix, int iz) const {
    return !in_bounds(ix, iz) || cells[static_cast<std::size_t>(iz) * width + ix] != 0;
  }
  void set(int ix, int iz, bool obstacle) {
    cells[static_cast<std::size_t>(iz) * width + ix] = obstacle ? 1 : 0;
  }
  int cell_index(int ix, int iz) const { return iz * width + ix; }

  bool occupied_at(double x, double z) const;
  bool border_closed() const;

  // Center of a cell in world coordinates.
  AgentPose cell_center(int index) const;

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;
};

// Distance from (x, z) along `angle` to the boundary of the first occupied
// cell, by exact grid traversal. Returns 0 when starting inside an obstacle.
double trace_ray(const OccupancyGrid& grid, double x, double z, double angle);

// Indices of the largest 4-connected free region, ascending.
std::vector<int> largest_free_region(const OccupancyGrid& grid);

}  // namespace cvo::envsim
