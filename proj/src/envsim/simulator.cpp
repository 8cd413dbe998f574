#include "cvo/envsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

#include "cvo/core/contract.hpp"

namespace cvo::envsim {

double encode(Action action) {
  switch (action) {
    case Action::Forward: return 0.0;
    case Action::Left: return 1.0;
    case Action::Right: return -1.0;
  }
  return 0.0;
}

const char* action_name(Action action) {
  switch (action) {
    case Action::Forward: return "forward";
    case Action::Left: return "left";
    case Action::Right: return "right";
  }
  return "?";
}

AgentPose integrate(const AgentPose& pose, const Displacement& d) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  // forward = (c, s), left = (-s, c); the local z axis is -forward.
  AgentPose out;
  out.x = pose.x - d.dz * c - d.dx * s;
  out.z = pose.z - d.dz * s + d.dx * c;
  out.theta = wrap_angle(pose.theta + d.dtheta);
  return out;
}

std::vector<double> raycast_scan(const OccupancyGrid& grid, const AgentPose& pose,
                                 const SensorModel& sensor, Rng& rng) {
  require(sensor.n_rays >= 2, "raycast_scan: n_rays must be >= 2");
  std::vector<double> scan(static_cast<std::size_t>(sensor.n_rays));
  const double spacing = sensor.fov / (sensor.n_rays - 1);
  for (int i = 0; i < sensor.n_rays; ++i) {
    const double angle = pose.theta - 0.5 * sensor.fov + spacing * i;
    const double truth = trace_ray(grid, pose.x, pose.z, angle);
    const double noise = rng.normal(0.0, sensor.depth_noise_std);
    scan[i] = std::clamp(sensor.gain * truth + sensor.bias + noise, 0.0, sensor.max_range);
  }
  return scan;
}

namespace {

// True when the straight segment from pose along local (dz, dx) keeps at
// least `clearance` from every obstacle boundary in its direction.
bool translation_clear(const OccupancyGrid& grid, const AgentPose& pose, double dz, double dx,
                       double clearance) {
  const double length = std::hypot(dz, dx);
  if (length == 0.0) return true;
  const AgentPose end = integrate(pose, {dz, dx, 0.0});
  const double heading = std::atan2(end.z - pose.z, end.x - pose.x);
  return trace_ray(grid, pose.x, pose.z, heading) - clearance >= length;
}

}  // namespace

StepOutcome step(const OccupancyGrid& grid, const AgentPose& pose, Action action,
                 const MotionModel& motion, double motion_scale, Rng& rng) {
  const double trans_std = motion.trans_noise_std * motion_scale;
  const double rot_std = motion.rot_noise_std * motion_scale;
  const double noise_z = rng.normal(0.0, trans_std);
  const double noise_x = rng.normal(0.0, trans_std);
  const double noise_theta = rng.normal(0.0, rot_std);
  const double jitter = rng.normal(0.0, motion.collision_jitter_std);

  StepOutcome out;
  Displacement d;
  if (action == Action::Forward) {
    const double intended = std::max(0.0, motion.forward_dist - noise_z);
    const double free_ahead =
        trace_ray(grid, pose.x, pose.z, pose.theta) - motion.collision_clearance;
    double travel = intended;
    d.dx = noise_x;
    if (intended > free_ahead) {
      travel = std::max(0.0, free_ahead);
      out.collided = true;
      d.dx += jitter;
    }
    d.dz = -travel;
    if (!translation_clear(grid, pose, d.dz, d.dx, motion.collision_clearance)) d.dx = 0.0;
    d.dtheta = noise_theta;
  } else {
    d.dz = noise_z;
    d.dx = noise_x;
    if (!translation_clear(grid, pose, d.dz, d.dx, motion.collision_clearance)) {
      d.dz = 0.0;
      d.dx = 0.0;
    }
    const double sign = action == Action::Left ? 1.0 : -1.0;
    d.dtheta = sign * motion.turn_angle + noise_theta;
  }
  out.displacement = d;
  out.pose = integrate(pose, d);
  return out;
}

Action greedy_action(const AgentPose& pose, double goal_x, double goal_z, double turn_angle,
                     double tolerance) {
  const double bearing = std::atan2(goal_z - pose.z, goal_x - pose.x);
  const double error = wrap_angle(bearing - pose.theta);
  if (std::abs(error) <= (tolerance >= 0.0 ? tolerance : 0.5 * turn_angle)) return Action::Forward;
  return error > 0.0 ? Action::Left : Action::Right;
}

namespace {

// Chebyshev distance (in cells) to the nearest obstacle, capped at cap + 1.
std::vector<int> obstacle_clearance(const OccupancyGrid& grid, int cap) {
  std::vector<int> out(grid.cells.size(), 0);
  for (int iz = 0; iz < grid.height; ++iz)
    for (int ix = 0; ix < grid.width; ++ix) {
      if (grid.occupied(ix, iz)) continue;
      int r = 1;
      for (; r <= cap; ++r) {
        bool hit = false;
        for (int d = -r; d <= r && !hit; ++d)
          hit = grid.occupied(ix + d, iz - r) || grid.occupied(ix + d, iz + r) ||
                grid.occupied(ix - r, iz + d) || grid.occupied(ix + r, iz + d);
        if (hit) break;
      }
      out[grid.cell_index(ix, iz)] = r;
    }
  return out;
}

}  // namespace

std::vector<double> distance_field(const OccupancyGrid& grid, int goal_cell, int margin,
                                   double penalty) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> field(grid.cells.size(), kInf);
  if (grid.cells[goal_cell] != 0) return field;
  const std::vector<int> clearance = obstacle_clearance(grid, margin);
  auto enter_cost = [&](int idx) {
    return 1.0 + penalty * std::max(0, margin + 1 - clearance[idx]);
  };
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  field[goal_cell] = 0.0;
  queue.emplace(0.0, goal_cell);
  while (!queue.empty()) {
    const auto [cost, cell] = queue.top();
    queue.pop();
    if (cost > field[cell]) continue;
    const int cx = cell % grid.width;
    const int cz = cell / grid.width;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dz == 0) continue;
        if (grid.occupied(cx + dx, cz + dz)) continue;
        // Diagonal moves may not cut obstacle corners.
        if (dx != 0 && dz != 0 && (grid.occupied(cx + dx, cz) || grid.occupied(cx, cz + dz)))
          continue;
        const int idx = grid.cell_index(cx + dx, cz + dz);
        // Stepping from idx toward the goal pays the entry cost of cell.
        const double length = (dx != 0 && dz != 0) ? std::numbers::sqrt2 : 1.0;
        const double next = cost + length * enter_cost(cell);
        if (next < field[idx]) {
          field[idx] = next;
          queue.emplace(next, idx);
        }
      }
  }
  return field;
}

int next_waypoint(const OccupancyGrid& grid, const std::vector<double>& field, int cell,
                  int lookahead) {
  for (int i = 0; i < lookahead && field[cell] > 0.0; ++i) {
    const int cx = cell % grid.width;
    const int cz = cell / grid.width;
    int best = cell;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dx = -1; dx <= 1; ++dx) {
        if (grid.occupied(cx + dx, cz + dz)) continue;
        const int idx = grid.cell_index(cx + dx, cz + dz);
        if (field[idx] < field[best]) best = idx;
      }
    if (best == cell) break;
    cell = best;
  }
  return cell;
}

namespace {

// Goal bookkeeping and waypoint selection for one rollout.
class Navigator {
 public:
  Navigator(const ApartmentSpec& apartment, const PolicyParams& policy, Rng& rng)
      : grid_(apartment.grid), policy_(policy), rng_(rng) {
    // Spawns and goals keep clear of the obstacle margin when the layout allows.
    const std::vector<int> clearance = obstacle_clearance(grid_, policy_.planning_margin);
    for (int c : apartment.reachable)
      if (clearance[c] > policy_.planning_margin) pool_.push_back(c);
    if (pool_.empty()) pool_ = apartment.reachable;
  }

  AgentPose spawn() {
    AgentPose pose = grid_.cell_center(pool_[rng_.uniform_index(pool_.size())]);
    pose.theta = wrap_angle(rng_.uniform(-std::numbers::pi, std::numbers::pi));
    return pose;
  }

  void new_goal(const AgentPose& from) {
    goal_cell_ = pick_goal(from);
    goal_ = grid_.cell_center(goal_cell_);
    field_ = distance_field(grid_, goal_cell_, policy_.planning_margin, policy_.margin_penalty);
    direct_ = rng_.uniform() < policy_.direct_goal_prob;
    has_waypoint_ = false;
    best_cost_ = cost_to_go(from);
    stalled_ = 0;
  }

  // Point the greedy rule should steer at from `pose`. Direct goals are
  // steered at in a straight line; otherwise the farthest visible path cell
  // is held until reached or occluded.
  AgentPose target(const AgentPose& pose) {
    if (direct_) return goal_;
    if (!has_waypoint_ ||
        std::hypot(waypoint_.x - pose.x, waypoint_.z - pose.z) < policy_.arrival_radius ||
        !visible(pose, waypoint_)) {
      waypoint_ = pick_waypoint(pose);
      has_waypoint_ = true;
    }
    return waypoint_;
  }

  // Updates progress after a step; true when a new goal should be drawn.
  bool update(const AgentPose& pose) {
    const double cost = cost_to_go(pose);
    if (cost < best_cost_ - policy_.progress_epsilon) {
      best_cost_ = cost;
      stalled_ = 0;
    } else {
      ++stalled_;
    }
    const bool arrived = std::hypot(goal_.x - pose.x, goal_.z - pose.z) < policy_.arrival_radius;
    return arrived || stalled_ >= policy_.stall_steps;
  }

 private:
  int cell_of(const AgentPose& p) const {
    return grid_.cell_index(static_cast<int>(std::floor(p.x / grid_.cell_size)),
                            static_cast<int>(std::floor(p.z / grid_.cell_size)));
  }

  double cost_to_go(const AgentPose& p) const { return field_[cell_of(p)]; }

  bool visible(const AgentPose& from, const AgentPose& c) const {
    const double dist = std::hypot(c.x - from.x, c.z - from.z);
    const double free =
        trace_ray(grid_, from.x, from.z, std::atan2(c.z - from.z, c.x - from.x));
    return free >= dist + policy_.sight_margin;
  }

  // With probability ahead_goal_prob: a visible cell inside the frontal cone.
  // Otherwise (or when the cone is empty): a cell at least min_goal_distance
  // away along the free grid, or the farthest one when none qualifies.
  int pick_goal(const AgentPose& from) {
    if (rng_.uniform() < policy_.ahead_goal_prob) {
      std::vector<int> ahead;
      for (int c : pool_) {
        const AgentPose g = grid_.cell_center(c);
        const double dist = std::hypot(g.x - from.x, g.z - from.z);
        if (dist < policy_.ahead_min_distance) continue;
        const double bearing = std::atan2(g.z - from.z, g.x - from.x);
        if (std::abs(wrap_angle(bearing - from.theta)) > policy_.ahead_cone) continue;
        if (!visible(from, g)) continue;
        ahead.push_back(c);
      }
      if (!ahead.empty()) return ahead[rng_.uniform_index(ahead.size())];
    }
    const std::vector<double> reach = distance_field(grid_, cell_of(from));
    std::vector<int> far;
    int farthest = pool_.front();
    for (int c : pool_) {
      if (!std::isfinite(reach[c])) continue;
      if (!std::isfinite(reach[farthest]) || reach[c] > reach[farthest]) farthest = c;
      if (reach[c] * grid_.cell_size >= policy_.min_goal_distance) far.push_back(c);
    }
    return far.empty() ? farthest : far[rng_.uniform_index(far.size())];
  }

  AgentPose pick_waypoint(const AgentPose& pose) const {
    if (visible(pose, goal_)) return goal_;
    const int start = cell_of(pose);
    int cell = start;
    bool found = false;
    AgentPose best = goal_;
    for (int i = 0; i < policy_.waypoint_lookahead; ++i) {
      const int next = next_waypoint(grid_, field_, cell, 1);
      if (next == cell) break;
      cell = next;
      const AgentPose c = grid_.cell_center(cell);
      if (visible(pose, c)) {
        best = c;
        found = true;
      } else if (found) {
        break;
      }
    }
    if (!found) best = grid_.cell_center(next_waypoint(grid_, field_, start, 1));
    return best;
  }

  const OccupancyGrid& grid_;
  const PolicyParams& policy_;
  Rng& rng_;
  std::vector<int> pool_;
  int goal_cell_ = 0;
  AgentPose goal_;
  std::vector<double> field_;
  bool direct_ = false;
  AgentPose waypoint_;
  bool has_waypoint_ = false;
  double best_cost_ = 0.0;
  int stalled_ = 0;
};

}  // namespace

std::vector<StepRecord> sample_trajectory(const ApartmentSpec& apartment,
                                          const PolicyParams& policy, Rng& rng, int max_steps) {
  require(max_steps >= 1, "sample_trajectory: max_steps must be >= 1");
  if (apartment.reachable.empty())
    throw std::runtime_error("sample_trajectory: apartment has no free spawn cell");

  Navigator nav(apartment, policy, rng);
  AgentPose pose = nav.spawn();
  nav.new_goal(pose);

  std::vector<StepRecord> records;
  records.reserve(static_cast<std::size_t>(max_steps));
  std::vector<double> scan = raycast_scan(apartment.grid, pose, apartment.sensor, rng);
  Action previous = Action::Left;
  for (int t = 0; t < max_steps; ++t) {
    const AgentPose target = nav.target(pose);
    // Once moving forward, keep going until the error exceeds the hold tolerance.
    const double tolerance = previous == Action::Forward
                                 ? policy.hold_tolerance_factor * policy.motion.turn_angle
                                 : 0.5 * policy.motion.turn_angle;
    const Action action =
        greedy_action(pose, target.x, target.z, policy.motion.turn_angle, tolerance);
    previous = action;
    const StepOutcome next =
        step(apartment.grid, pose, action, policy.motion, apartment.motion_scale, rng);

    StepRecord record;
    record.scan_t = std::move(scan);
    record.scan_t1 = raycast_scan(apartment.grid, next.pose, apartment.sensor, rng);
    scan = record.scan_t1;
    record.action = action;
    record.gt = next.displacement;
    record.collided = next.collided;
    record.pose_t = pose;
    record.pose_t1 = next.pose;
    records.push_back(std::move(record));

    pose = next.pose;
    if (nav.update(pose)) nav.new_goal(pose);
  }
  return records;
}

}  // namespace cvo::envsim
