#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hvrs/config.hpp"
#include "hvrs/geometry.hpp"
#include "hvrs/rewards.hpp"
#include "hvrs/tasks.hpp"

namespace hvrs {

// Flattened action layout (11 dims, all squashed to [-1, 1] by the policy):
//   0-1  root velocity command, agent frame, scaled by v_max
//   2    yaw rate command, scaled by yaw_rate_max
//   3-5  left hand offset from the torso, agent frame, scaled by reach_radius
//   6-8  right hand offset, same scaling
//   9    grasp (> 0 engages)
//   10   lift in [0, 1] (maps from [-1, 1])
constexpr int kActionDim = 11;

struct ActionCommand {
  Vec2 root_vel_cmd;        // agent frame, m/s
  double yaw_rate_cmd = 0.0;
  Vec3 hand_offset_left;    // agent frame, relative to the torso point
  Vec3 hand_offset_right;
  bool grasp = false;
  double lift = 0.0;        // 0 = lowered, 1 = carry height
};

struct AgentState {
  Pose2Z root;              // z is the fixed torso height
  Vec2 root_vel;            // world frame, actual velocity of the last step
  Vec3 hand_left;           // world frame
  Vec3 hand_right;
  std::string carrying;     // object id, empty if none
  bool standing = true;     // false models the bent post-placement posture
  // internal bookkeeping
  double carry_yaw_offset = 0.0;
  int stand_progress = 0;
};

struct SceneObject {
  std::string id;
  Pose2Z pose;
  Vec3 vel;                 // world frame
  double z_init = 0.0;      // support height recorded at reset
  double footprint_radius = 0.0;
  const ObjectTemplate* tmpl = nullptr;  // borrowed from the layout
};

struct SimState {
  AgentState agent;
  std::vector<SceneObject> objects;
  std::vector<Obstacle> obstacles;
  std::vector<GoalSpec> goals;       // one per sub-task
  std::vector<int> guide_progress;   // per goal: first unpassed guide index
  int active_goal = 0;
  Rect bounds;
  std::string layout;
  int64_t step_count = 0;
  uint64_t rng_seed = 0;
};

struct StepEvents {
  bool attached = false;
  bool released = false;
  bool collided = false;
};

// Builds the initial state for one sub-task episode. The agent spawns at the
// layout default unless initial_agent is given. Throws on an invalid sub-task
// index or an out-of-bounds spawn.
SimState reset(const TaskSpec& task, int sub_task_index, uint64_t seed,
               const std::optional<AgentInit>& initial_agent, const SimConfig& cfg);

// Advances the state in place by one dt. Throws on non-finite action input.
StepEvents step_mut(SimState& state, const ActionCommand& action, double dt, const SimConfig& cfg);

// Pure variant.
std::pair<SimState, StepEvents> step(const SimState& state, const ActionCommand& action, double dt,
                                     const SimConfig& cfg);

// Privileged feature vector layout (kPrivilegedBaseDim + 3*feature_pcd_points):
//   0-1   root xy (world)            2     root z
//   3-4   cos yaw, sin yaw           5-6   root velocity, agent frame
//   7-9   left hand - torso, agent frame
//   10-12 right hand - torso, agent frame
//   13-15 target object: xy agent frame, z world
//   16-17 cos/sin(object yaw - agent yaw)
//   18-20 object velocity: xy agent frame, vz
//   21-23 goal: xy agent frame, z_target
//   24-25 cos/sin(goal yaw - agent yaw)
//   26-27 active guide vertex, agent frame
//   28    d_robot2object   29 d_hand2object   30 d_object2goal
//   31    carrying target  32 carrying anything   33 standing
//   34+   downsampled object-frame point cloud, zero-padded
constexpr int kPrivilegedBaseDim = 34;
int privileged_feature_dim(const SimConfig& cfg);
std::vector<float> privileged_features(const SimState& state, const GoalSpec& goal,
                                       const SimConfig& cfg);

// C x C x 3 egocentric occupancy (row-major [cell_x][cell_y][channel]):
// channel 0 static obstacles, 1 movable objects, 2 the carried object.
// Forward 180 degrees only: cells with agent-frame x <= 0 stay zero.
std::vector<float> egocentric_observation(const SimState& state, const GridSpec& grid);

// Scalar context for the reward engine, measured against the given goal.
RewardContext distances(const SimState& state, const GoalSpec& goal);

// Convenience lookups.
const SceneObject* find_object(const SimState& state, const std::string& id);
SceneObject* find_object(SimState& state, const std::string& id);
// Index into goal.guides for the active guide, or guides.size() when done.
int active_guide_index(const SimState& state, const GoalSpec& goal);
Vec2 active_guide_point(const SimState& state, const GoalSpec& goal);
// Minimum over both hands and all cloud points, 3D, world frame.
double hand_to_object_distance(const SimState& state, const SceneObject& obj);

}  // namespace hvrs
