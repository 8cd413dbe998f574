#include "cvo/envsim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cvo::envsim {

double wrap_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle, kTwoPi);
  if (wrapped <= -std::numbers::pi) wrapped += kTwoPi;
  if (wrapped > std::numbers::pi) wrapped -= kTwoPi;
  return wrapped;
}

OccupancyGrid::OccupancyGrid(int w, int h, double cell, bool fill_occupied)
    : width(w), height(h), cell_size(cell),
      cells(static_cast<std::size_t>(w) * h, fill_occupied ? 1 : 0) {}

bool OccupancyGrid::occupied_at(double x, double z) const {
  const int ix = static_cast<int>(std::floor(x / cell_size));
  const int iz = static_cast<int>(std::floor(z / cell_size));
  return occupied(ix, iz);
}

bool OccupancyGrid::border_closed() const {
  for (int ix = 0; ix < width; ++ix)
    if (!occupied(ix, 0) || !occupied(ix, height - 1)) return false;
  for (int iz = 0; iz < height; ++iz)
    if (!occupied(0, iz) || !occupied(width - 1, iz)) return false;
  return true;
}

AgentPose OccupancyGrid::cell_center(int index) const {
  const int ix = index % width;
  const int iz = index / width;
  return {(ix + 0.5) * cell_size, (iz + 0.5) * cell_size, 0.0};
}

double trace_ray(const OccupancyGrid& grid, double x, double z, double angle) {
  const double dir_x = std::cos(angle);
  const double dir_z = std::sin(angle);
  const double inv = 1.0 / grid.cell_size;
  const double gx = x * inv;
  const double gz = z * inv;
  int ix = static_cast<int>(std::floor(gx));
  int iz = static_cast<int>(std::floor(gz));
  if (grid.occupied(ix, iz)) return 0.0;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int step_x = dir_x > 0 ? 1 : -1;
  const int step_z = dir_z > 0 ? 1 : -1;
  // Parametric distance (in cells) to the next vertical / horizontal boundary.
  const double delta_x = dir_x != 0.0 ? std::abs(1.0 / dir_x) : kInf;
  const double delta_z = dir_z != 0.0 ? std::abs(1.0 / dir_z) : kInf;
  double next_x = dir_x != 0.0 ? (dir_x > 0 ? (ix + 1 - gx) : (gx - ix)) * delta_x : kInf;
  double next_z = dir_z != 0.0 ? (dir_z > 0 ? (iz + 1 - gz) : (gz - iz)) * delta_z : kInf;

  // The border is closed for generated grids; the bound guards open rasters.
  const int max_steps = 2 * (grid.width + grid.height) + 4;
  for (int i = 0; i < max_steps; ++i) {
    double travelled;
    if (next_x < next_z) {
      travelled = next_x;
      next_x += delta_x;
      ix += step_x;
    } else {
      travelled = next_z;
      next_z += delta_z;
      iz += step_z;
    }
    if (grid.occupied(ix, iz)) return travelled * grid.cell_size;
  }
  return std::min(next_x, next_z) * grid.cell_size;
}

std::vector<int> largest_free_region(const OccupancyGrid& grid) {
  const int n = grid.width * grid.height;
  std::vector<int> label(n, -1);
  std::vector<int> best;
  std::vector<int> stack;
  std::vector<int> region;
  int next_label = 0;
  for (int start = 0; start < n; ++start) {
    if (label[start] >= 0 || grid.cells[start] != 0) continue;
    region.clear();
    stack.assign(1, start);
    label[start] = next_label;
    while (!stack.empty()) {
      const int cell = stack.back();
      stack.pop_back();
      region.push_back(cell);
      const int cx = cell % grid.width;
      const int cz = cell / grid.width;
      const int nbr[4][2] = {{cx + 1, cz}, {cx - 1, cz}, {cx, cz + 1}, {cx, cz - 1}};
      for (const auto& p : nbr) {
        if (grid.occupied(p[0], p[1])) continue;
        const int idx = grid.cell_index(p[0], p[1]);
        if (label[idx] >= 0) continue;
        label[idx] = next_label;
        stack.push_back(idx);
      }
    }
    ++next_label;
    if (region.size() > best.size()) best = region;
  }
  std::sort(best.begin(), best.end());
  return best;
}

}  // namespace cvo::envsim
