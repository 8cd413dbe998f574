#include "cvo/envsim/apartment.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "cvo/core/contract.hpp"
#include "cvo/core/random.hpp"

namespace cvo::envsim {
namespace {

struct Rect {
  int x0, z0, x1, z1;  // inclusive
  int w() const { return x1 - x0 + 1; }
  int h() const { return z1 - z0 + 1; }
};

struct Wall {
  bool vertical;  // constant x
  int at;
  int from, to;  // inclusive span along the other axis
};

bool splittable(const Rect& r, int min_side) {
  return std::max(r.w(), r.h()) >= 2 * min_side + 1;
}

void open_door(OccupancyGrid& grid, const Wall& wall, int door_width, Rng& rng) {
  auto passable = [&](int p) {
    return wall.vertical ? !grid.occupied(wall.at - 1, p) && !grid.occupied(wall.at + 1, p)
                         : !grid.occupied(p, wall.at - 1) && !grid.occupied(p, wall.at + 1);
  };
  std::vector<std::pair<int, int>> runs;  // maximal passable runs [start, end]
  for (int p = wall.from; p <= wall.to; ++p) {
    if (!passable(p)) continue;
    int q = p;
    while (q + 1 <= wall.to && passable(q + 1)) ++q;
    runs.emplace_back(p, q);
    p = q;
  }
  if (runs.empty()) return;
  int max_run = 0;
  for (const auto& r : runs) max_run = std::max(max_run, r.second - r.first + 1);
  const int width = std::min(door_width, max_run);

  std::vector<int> starts;
  for (const auto& r : runs)
    for (int s = r.first; s + width - 1 <= r.second; ++s) starts.push_back(s);
  const int start = starts[rng.uniform_index(starts.size())];
  for (int p = start; p < start + width; ++p) {
    if (wall.vertical)
      grid.set(wall.at, p, false);
    else
      grid.set(p, wall.at, false);
  }
}

OccupancyGrid carve_rooms(const GenerationParams& params, Rng& rng) {
  OccupancyGrid grid(params.width, params.height, params.cell_size, true);
  const int target = rng.uniform_int(params.min_rooms, params.max_rooms);
  std::vector<Rect> leaves{{1, 1, params.width - 2, params.height - 2}};
  std::vector<Wall> walls;

  while (static_cast<int>(leaves.size()) < target) {
    int pick = -1;
    for (int i = 0; i < static_cast<int>(leaves.size()); ++i) {
      if (!splittable(leaves[i], params.min_room_side)) continue;
      if (pick < 0 || leaves[i].w() * leaves[i].h() > leaves[pick].w() * leaves[pick].h())
        pick = i;
    }
    if (pick < 0) break;
    const Rect r = leaves[pick];
    const bool vertical = r.w() >= r.h();
    const int lo = (vertical ? r.x0 : r.z0) + params.min_room_side;
    const int hi = (vertical ? r.x1 : r.z1) - params.min_room_side;
    const int at = rng.uniform_int(lo, hi);
    if (vertical) {
      leaves[pick] = {r.x0, r.z0, at - 1, r.z1};
      leaves.push_back({at + 1, r.z0, r.x1, r.z1});
      walls.push_back({true, at, r.z0, r.z1});
    } else {
      leaves[pick] = {r.x0, r.z0, r.x1, at - 1};
      leaves.push_back({r.x0, at + 1, r.x1, r.z1});
      walls.push_back({false, at, r.x0, r.x1});
    }
  }

  for (const Rect& r : leaves)
    for (int iz = r.z0; iz <= r.z1; ++iz)
      for (int ix = r.x0; ix <= r.x1; ++ix) grid.set(ix, iz, false);
  for (const Wall& w : walls) open_door(grid, w, params.door_width, rng);
  return grid;
}

}  // namespace

ApartmentSpec generate_apartment(std::uint64_t seed, const GenerationParams& params,
                                 std::uint32_t id) {
  require(params.width >= 3 && params.height >= 3, "generate_apartment: grid too small");
  require(params.min_rooms >= 1 && params.min_rooms <= params.max_rooms,
          "generate_apartment: bad room-count range");
  require(params.n_rays >= 2, "generate_apartment: n_rays must be >= 2");

  Rng rng(seed);
  ApartmentSpec spec;
  spec.id = id;
  spec.seed = seed;
  spec.sensor.n_rays = params.n_rays;
  spec.sensor.fov = params.fov;
  spec.sensor.max_range = params.max_range;
  spec.sensor.gain = rng.uniform(params.gain_min, params.gain_max);
  spec.sensor.bias = rng.uniform(params.bias_min, params.bias_max);
  spec.sensor.depth_noise_std = rng.uniform(params.noise_min, params.noise_max);
  spec.motion_scale = rng.uniform(params.motion_scale_min, params.motion_scale_max);

  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    spec.grid = carve_rooms(params, rng);
    spec.reachable = largest_free_region(spec.grid);
    if (static_cast<int>(spec.reachable.size()) >= params.min_free_region) return spec;
  }
  throw std::runtime_error("generate_apartment: no free region of " +
                           std::to_string(params.min_free_region) + " cells after " +
                           std::to_string(params.max_attempts) + " attempts");
}

}  // namespace cvo::envsim
