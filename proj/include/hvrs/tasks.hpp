#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hvrs/geometry.hpp"

namespace hvrs {

struct Rect {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  bool contains(const Vec2& p, double margin = 0.0) const {
    return p.x >= x_min + margin && p.x <= x_max - margin && p.y >= y_min + margin &&
           p.y <= y_max - margin;
  }
};

struct Obstacle {
  Vec2 center;
  double radius = 0.0;
};

struct Region {
  std::string name;
  Vec2 center;
  double radius = 0.0;
  int token = 0;  // globally unique across layouts
};

struct ObjectTemplate {
  std::string id;
  std::string category;
  int category_token = 0;
  double footprint_radius = 0.0;
  double rest_z = 0.0;             // support height the object rests at
  std::vector<Vec3> points;        // object-frame point cloud
};

struct RoomLayout {
  std::string name;
  Rect bounds;
  std::vector<Obstacle> obstacles;
  std::vector<Region> regions;
  std::vector<ObjectTemplate> objects;
  Pose2Z default_spawn;

  const ObjectTemplate* find_object(const std::string& id) const;
  const Region* find_region_token(int token) const;
};

struct InstructionSpec {
  int object_token = 0;
  int source_token = 0;
  int target_token = 0;
  std::string text;
};

struct GoalSpec {
  std::string object_id;
  Pose2Z pose;                // z is the target height z_target
  std::vector<Vec2> guides;   // polyline vertices, terminal within 0.5 m of pose
  double success_radius = 0.5;
};

struct SubTask {
  std::string object_id;
  Pose2Z start_pose;
  GoalSpec goal;
  InstructionSpec instruction;
};

struct TaskSpec {
  std::string id;
  std::string layout;
  std::string split;  // "train" or "unseen"
  std::vector<SubTask> sub_tasks;  // exactly two
};

struct AgentInit {
  Pose2Z pose;
  bool standing = true;
};

// One pretraining episode spec: a task restricted to a single sub-task, with
// an optional non-default agent spawn.
struct SingleTask {
  TaskSpec task;
  int sub_task_index = 0;
  std::optional<AgentInit> initial_agent;
};

int category_vocab_size();
int region_vocab_size();

// The four built-in rooms. Layout geometry is code-defined, so a task file
// only ever names a layout.
const std::vector<RoomLayout>& builtin_layouts();
const RoomLayout& layout_by_name(const std::string& name);  // throws if unknown

// Deterministic task sampler. Held-out (object, source, target) combinations
// are reserved for the unseen split, so no combination appears in both.
std::vector<TaskSpec> generate_dataset(const std::vector<RoomLayout>& layouts, int n_train,
                                       int n_unseen, uint64_t seed);

// Doubles a task list into per-sub-task pretraining episodes: for each task,
// sub-task 0 from the layout's default spawn, then sub-task 1 from a bent
// spawn within 1 m of sub-task 0's goal, facing the sub-task-1 object.
std::vector<SingleTask> split_pretraining(const std::vector<TaskSpec>& tasks);

// Task file round trip (strict schema, atomic write).
void save_tasks(const std::string& path, const std::vector<TaskSpec>& tasks);
std::vector<TaskSpec> load_tasks(const std::string& path);

void save_single_tasks(const std::string& path, const std::vector<SingleTask>& singles);
std::vector<SingleTask> load_single_tasks(const std::string& path);

}  // namespace hvrs
