#pragma once

#include <cstdint>
#include <vector>

#include "cvo/core/random.hpp"
#include "cvo/envsim/apartment.hpp"
#include "cvo/envsim/grid.hpp"

namespace cvo::envsim {

enum class Action : std::uint8_t { Forward = 0, Left = 1, Right = 2 };

// Scalar fed to action-conditioned models: Forward 0, Left +1, Right -1.
double encode(Action action);
const char* action_name(Action action);

// Realized motion in the agent frame at time t: z points backwards, x points
// left, theta is counterclockwise-positive.
struct Displacement {
  double dz = 0.0;
  double dx = 0.0;
  double dtheta = 0.0;
};

struct MotionModel {
  double forward_dist = 0.25;
  double turn_angle = 0.174533;
  double trans_noise_std = 0.01;
  double rot_noise_std = 0.0105;
  double collision_clearance = 0.05;
  double collision_jitter_std = 0.03;
};

// Pose reached by applying `d` (in the frame of `pose`) to `pose`.
AgentPose integrate(const AgentPose& pose, const Displacement& d);

// One depth reading per ray, rays evenly spanning [theta - fov/2, theta + fov/2]
// from right to left.
std::vector<double> raycast_scan(const OccupancyGrid& grid, const AgentPose& pose,
                                 const SensorModel& sensor, Rng& rng);

struct StepOutcome {
  AgentPose pose;
  Displacement displacement;
  bool collided = false;
};

StepOutcome step(const OccupancyGrid& grid, const AgentPose& pose, Action action,
                 const MotionModel& motion, double motion_scale, Rng& rng);

struct StepRecord {
  std::vector<double> scan_t;
  std::vector<double> scan_t1;
  Action action = Action::Forward;
  Displacement gt;
  bool collided = false;
  // Debug metadata; not serialized.
  AgentPose pose_t;
  AgentPose pose_t1;
};

struct PolicyParams {
  MotionModel motion;
  double arrival_radius = 0.3;
  int stall_steps = 50;
  double progress_epsilon = 1e-3;      // path-cost decrease that counts as progress
  double hold_tolerance_factor = 1.0;  // bearing tolerance (in turns) while already moving forward
  // Goal selection.
  double ahead_goal_prob = 0.9;        // draw from visible cells in the frontal cone
  double ahead_cone = 0.785398;        // half-angle, radians
  double ahead_min_distance = 1.5;     // meters
  double min_goal_distance = 3.0;      // geodesic meters, for goals outside the cone
  double direct_goal_prob = 0.15;      // goals steered at in a straight line, ignoring walls
  // Path following.
  int planning_margin = 2;             // cells near obstacles that paths avoid
  double margin_penalty = 4.0;         // extra path cost per cell of intrusion into the margin
  int waypoint_lookahead = 30;         // path cells searched for a visible waypoint
  double sight_margin = 0.15;          // line-of-sight slack beyond a waypoint, meters
};

// Shortest-path costs from every free cell to `goal_cell` over the
// 8-connected free grid (no corner cutting). Entering a cell costs its step
// length times 1 + `penalty` per cell of intrusion into the `margin` band
// around obstacles. Unreachable and occupied cells get infinity.
std::vector<double> distance_field(const OccupancyGrid& grid, int goal_cell, int margin = 0,
                                   double penalty = 0.0);

// Cell reached by walking `lookahead` steps down the distance field.
int next_waypoint(const OccupancyGrid& grid, const std::vector<double>& field, int cell,
                  int lookahead);

// Greedy point-goal rule: rotate toward the goal while the bearing error
// exceeds `tolerance` (default half a turn), otherwise go forward. An error of
// exactly pi turns left.
Action greedy_action(const AgentPose& pose, double goal_x, double goal_z, double turn_angle,
                     double tolerance = -1.0);

// Random spawn; goals from the apartment's reachable region. Most goals are
// followed along a shortest grid path, a fraction (direct_goal_prob) by
// steering straight at them, which produces wall collisions.
std::vector<StepRecord> sample_trajectory(const ApartmentSpec& apartment,
                                          const PolicyParams& policy, Rng& rng, int max_steps);

}  // namespace cvo::envsim
