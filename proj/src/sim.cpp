#include "hvrs/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hvrs/rng.hpp"

namespace hvrs {

namespace {

bool finite(double v) { return std::isfinite(v); }
bool finite(const Vec2& v) { return finite(v.x) && finite(v.y); }
bool finite(const Vec3& v) { return finite(v.x) && finite(v.y) && finite(v.z); }

Vec3 torso_point(const AgentState& a) { return {a.root.x, a.root.y, a.root.z}; }

Vec3 pcd_world(const SceneObject& obj, const Vec3& local) {
  const Vec2 r = rotate(Vec2{local.x, local.y}, obj.pose.yaw);
  return {obj.pose.x + r.x, obj.pose.y + r.y, obj.pose.z + local.z};
}

// Moves the agent center out of circular obstacles and the walls. Returns
// true if any correction was applied.
bool resolve_agent_static(SimState& st, const SimConfig& cfg) {
  bool hit = false;
  Vec2 p = st.agent.root.xy();
  for (const auto& ob : st.obstacles) {
    const double min_d = ob.radius + cfg.agent_radius;
    const Vec2 d = p - ob.center;
    const double n = d.norm();
    if (n < min_d) {
      const Vec2 dir = normalized_or(d, {1.0, 0.0});
      p = ob.center + dir * min_d;
      hit = true;
    }
  }
  const double m = cfg.agent_radius;
  const Vec2 clamped = {clampd(p.x, st.bounds.x_min + m, st.bounds.x_max - m),
                        clampd(p.y, st.bounds.y_min + m, st.bounds.y_max - m)};
  if (clamped.x != p.x || clamped.y != p.y) hit = true;
  st.agent.root.x = clamped.x;
  st.agent.root.y = clamped.y;
  return hit;
}

bool resolve_object_static(SimState& st, SceneObject& obj) {
  bool hit = false;
  Vec2 p = obj.pose.xy();
  for (const auto& ob : st.obstacles) {
    const double min_d = ob.radius + obj.footprint_radius;
    const Vec2 d = p - ob.center;
    const double n = d.norm();
    if (n < min_d) {
      p = ob.center + normalized_or(d, {1.0, 0.0}) * min_d;
      hit = true;
    }
  }
  const double m = obj.footprint_radius;
  const Vec2 clamped = {clampd(p.x, st.bounds.x_min + m, st.bounds.x_max - m),
                        clampd(p.y, st.bounds.y_min + m, st.bounds.y_max - m)};
  if (clamped.x != p.x || clamped.y != p.y) hit = true;
  obj.pose.x = clamped.x;
  obj.pose.y = clamped.y;
  return hit;
}

void advance_guides(SimState& st, const SimConfig& cfg) {
  for (size_t gi = 0; gi < st.goals.size(); ++gi) {
    const GoalSpec& goal = st.goals[gi];
    const SceneObject* obj = find_object(st, goal.object_id);
    if (!obj) continue;
    int& prog = st.guide_progress[gi];
    while (prog < static_cast<int>(goal.guides.size()) &&
           (obj->pose.xy() - goal.guides[prog]).norm() < cfg.guide_pass_radius)
      ++prog;
  }
}

double support_height(const SimState& st, const SceneObject& obj) {
  for (const GoalSpec& g : st.goals) {
    if (g.object_id != obj.id) continue;
    if ((obj.pose.xy() - g.pose.xy()).norm() < g.success_radius) return g.pose.z;
  }
  return obj.z_init;
}

}  // namespace

const SceneObject* find_object(const SimState& state, const std::string& id) {
  for (const auto& o : state.objects)
    if (o.id == id) return &o;
  return nullptr;
}

SceneObject* find_object(SimState& state, const std::string& id) {
  for (auto& o : state.objects)
    if (o.id == id) return &o;
  return nullptr;
}

int active_guide_index(const SimState& state, const GoalSpec& goal) {
  for (size_t gi = 0; gi < state.goals.size(); ++gi) {
    if (state.goals[gi].object_id == goal.object_id)
      return std::min(state.guide_progress[gi], static_cast<int>(goal.guides.size()));
  }
  // Foreign goal: derive progress on the fly from the object position.
  const SceneObject* obj = find_object(state, goal.object_id);
  int prog = 0;
  if (obj) {
    while (prog < static_cast<int>(goal.guides.size()) &&
           (obj->pose.xy() - goal.guides[prog]).norm() < 0.5)
      ++prog;
  }
  return prog;
}

Vec2 active_guide_point(const SimState& state, const GoalSpec& goal) {
  const int gi = active_guide_index(state, goal);
  if (gi >= static_cast<int>(goal.guides.size())) return goal.pose.xy();
  return goal.guides[gi];
}

double hand_to_object_distance(const SimState& state, const SceneObject& obj) {
  double best = 1e30;
  for (const Vec3& hand : {state.agent.hand_left, state.agent.hand_right}) {
    if (obj.tmpl && !obj.tmpl->points.empty()) {
      for (const Vec3& p : obj.tmpl->points) best = std::min(best, (pcd_world(obj, p) - hand).norm());
    } else {
      best = std::min(best, (obj.pose.xyz() - hand).norm());
    }
  }
  return best;
}

SimState reset(const TaskSpec& task, int sub_task_index, uint64_t seed,
               const std::optional<AgentInit>& initial_agent, const SimConfig& cfg) {
  if (sub_task_index < 0 || sub_task_index >= static_cast<int>(task.sub_tasks.size()))
    throw std::invalid_argument("invalid sub-task index " + std::to_string(sub_task_index) +
                                " for task " + task.id);
  const RoomLayout& layout = layout_by_name(task.layout);

  SimState st;
  st.layout = task.layout;
  st.bounds = layout.bounds;
  st.obstacles = layout.obstacles;
  st.rng_seed = seed;
  st.active_goal = sub_task_index;

  for (const SubTask& sub : task.sub_tasks) {
    const ObjectTemplate* tmpl = layout.find_object(sub.object_id);
    if (!tmpl)
      throw std::invalid_argument("task " + task.id + " references unknown object " + sub.object_id);
    SceneObject obj;
    obj.id = sub.object_id;
    obj.pose = sub.start_pose;
    obj.z_init = sub.start_pose.z;
    obj.footprint_radius = tmpl->footprint_radius;
    obj.tmpl = tmpl;
    st.objects.push_back(obj);
    st.goals.push_back(sub.goal);
    st.guide_progress.push_back(0);
  }

  AgentState& a = st.agent;
  if (initial_agent) {
    a.root = initial_agent->pose;
    a.standing = initial_agent->standing;
  } else {
    a.root = layout.default_spawn;
    a.standing = true;
  }
  a.root.z = cfg.torso_height;
  a.root.yaw = wrap_angle(a.root.yaw);
  if (!layout.bounds.contains(a.root.xy(), cfg.agent_radius))
    throw std::invalid_argument("spawn out of bounds for task " + task.id);

  const Vec2 fwd = rotate(Vec2{0.3, 0.0}, a.root.yaw);
  const Vec2 side = rotate(Vec2{0.0, 0.18}, a.root.yaw);
  a.hand_left = {a.root.x + fwd.x + side.x, a.root.y + fwd.y + side.y, cfg.torso_height - 0.1};
  a.hand_right = {a.root.x + fwd.x - side.x, a.root.y + fwd.y - side.y, cfg.torso_height - 0.1};
  a.root_vel = {0.0, 0.0};
  a.carrying.clear();
  a.carry_yaw_offset = 0.0;
  a.stand_progress = 0;

  advance_guides(st, cfg);
  return st;
}

StepEvents step_mut(SimState& st, const ActionCommand& action, double dt, const SimConfig& cfg) {
  if (!finite(action.root_vel_cmd) || !finite(action.yaw_rate_cmd) ||
      !finite(action.hand_offset_left) || !finite(action.hand_offset_right) ||
      !finite(action.lift))
    throw std::invalid_argument("invalid action");

  StepEvents ev;
  AgentState& a = st.agent;
  const double scale = a.standing ? 1.0 : cfg.bent_speed_scale;
  const double v_cap = cfg.v_max * scale;
  const double w_cap = cfg.yaw_rate_max * scale;

  const Vec2 v_agent = {clampd(action.root_vel_cmd.x, -v_cap, v_cap),
                        clampd(action.root_vel_cmd.y, -v_cap, v_cap)};
  const double yaw_rate = clampd(action.yaw_rate_cmd, -w_cap, w_cap);
  const Vec3 off_l = clamp_norm(action.hand_offset_left, cfg.reach_radius);
  const Vec3 off_r = clamp_norm(action.hand_offset_right, cfg.reach_radius);
  const double lift = clampd(action.lift, 0.0, 1.0);

  const Vec2 old_pos = a.root.xy();

  // Root integration (velocity command is agent-frame).
  const Vec2 v_world = rotate(v_agent, a.root.yaw);
  a.root.x += v_world.x * dt;
  a.root.y += v_world.y * dt;
  a.root.yaw = wrap_angle(a.root.yaw + yaw_rate * dt);

  // Plow non-carried objects out of the agent disc; blocked objects push the
  // agent back instead.
  for (auto& obj : st.objects) {
    if (obj.id == a.carrying) continue;
    const double min_d = cfg.agent_radius + obj.footprint_radius;
    Vec2 d = obj.pose.xy() - a.root.xy();
    if (d.norm() >= min_d) continue;
    ev.collided = true;
    const Vec2 dir = normalized_or(d, rotate(Vec2{1.0, 0.0}, a.root.yaw));
    const Vec2 target = a.root.xy() + dir * min_d;
    obj.pose.x = target.x;
    obj.pose.y = target.y;
    // The object inherits the agent's approach speed along the push direction
    // (a slow retreat that still overlaps only separates, it does not fling),
    // and keeps any faster outward slide it already had.
    const double impart = std::max(0.0, v_world.dot(dir));
    const double outward = Vec2{obj.vel.x, obj.vel.y}.dot(dir);
    const double speed = std::max(impart, outward);
    obj.vel.x = dir.x * speed;
    obj.vel.y = dir.y * speed;
    resolve_object_static(st, obj);
    // If the object could not move the full way, project the agent out.
    d = obj.pose.xy() - a.root.xy();
    if (d.norm() < min_d - 1e-9) {
      const Vec2 back = normalized_or(d, {1.0, 0.0});
      const Vec2 fixed = obj.pose.xy() - back * min_d;
      a.root.x = fixed.x;
      a.root.y = fixed.y;
    }
  }
  if (resolve_agent_static(st, cfg)) ev.collided = true;

  // Stand-up: lift held high with the grasp open for standup_steps in a row.
  if (!a.standing) {
    if (lift >= cfg.standup_lift_min && !action.grasp) {
      if (++a.stand_progress >= cfg.standup_steps) {
        a.standing = true;
        a.stand_progress = 0;
      }
    } else {
      a.stand_progress = 0;
    }
  }

  // Hands track their commanded offsets at bounded speed.
  const Vec3 torso = torso_point(a);
  auto move_hand = [&](Vec3& hand, const Vec3& off) {
    const Vec3 target = torso + rotate(off, a.root.yaw);
    const Vec3 d = target - hand;
    const double n = d.norm();
    const double step = std::min(n, cfg.hand_speed * dt);
    if (n > 1e-12) hand += d * (step / n);
    const Vec3 rel = clamp_norm(hand - torso, cfg.reach_radius);
    hand = torso + rel;
    if (hand.z < 0.02) hand.z = 0.02;
  };
  move_hand(a.hand_left, off_l);
  move_hand(a.hand_right, off_r);

  // Grasp and release transitions.
  if (action.grasp && a.carrying.empty()) {
    double best = 1e30;
    SceneObject* pick = nullptr;
    for (auto& obj : st.objects) {
      const double d = hand_to_object_distance(st, obj);
      if (d < cfg.grasp_radius && d < best) {
        best = d;
        pick = &obj;
      }
    }
    if (pick) {
      a.carrying = pick->id;
      a.carry_yaw_offset = wrap_angle(pick->pose.yaw - a.root.yaw);
      ev.attached = true;
    }
  } else if (!action.grasp && !a.carrying.empty()) {
    a.carrying.clear();
    a.standing = false;  // releasing leaves the agent in the bent posture
    a.stand_progress = 0;
    ev.released = true;
  }

  // Carried object follows the hand midpoint rigidly.
  if (!a.carrying.empty()) {
    SceneObject* obj = find_object(st, a.carrying);
    const Vec3 mid = (a.hand_left + a.hand_right) * 0.5;
    const Vec3 old = obj->pose.xyz();
    obj->pose.x = mid.x;
    obj->pose.y = mid.y;
    obj->pose.yaw = wrap_angle(a.root.yaw + a.carry_yaw_offset);
    const double z_target = obj->z_init + lift * cfg.carry_height;
    const double dz = clampd(z_target - obj->pose.z, -cfg.settle_z_speed * dt, cfg.settle_z_speed * dt);
    obj->pose.z += dz;

    // Keep the carried object out of obstacles by shifting the whole rig.
    Vec2 p = obj->pose.xy();
    Vec2 shift = {0.0, 0.0};
    for (const auto& ob : st.obstacles) {
      const double min_d = ob.radius + obj->footprint_radius;
      const Vec2 d = p + shift - ob.center;
      if (d.norm() < min_d) {
        const Vec2 fixed = ob.center + normalized_or(d, {1.0, 0.0}) * min_d;
        shift += fixed - (p + shift);
        ev.collided = true;
      }
    }
    const double m = obj->footprint_radius;
    const Vec2 want = p + shift;
    const Vec2 walled = {clampd(want.x, st.bounds.x_min + m, st.bounds.x_max - m),
                         clampd(want.y, st.bounds.y_min + m, st.bounds.y_max - m)};
    if (walled.x != want.x || walled.y != want.y) ev.collided = true;
    shift = walled - p;
    if (shift.x != 0.0 || shift.y != 0.0) {
      obj->pose.x += shift.x;
      obj->pose.y += shift.y;
      a.root.x += shift.x;
      a.root.y += shift.y;
      a.hand_left.x += shift.x;
      a.hand_left.y += shift.y;
      a.hand_right.x += shift.x;
      a.hand_right.y += shift.y;
    }
    obj->vel = (obj->pose.xyz() - old) * (1.0 / dt);
  }

  // Free objects settle: horizontal velocity decays, height relaxes to the
  // support surface, position integrates what is left.
  for (auto& obj : st.objects) {
    if (obj.id == a.carrying) continue;
    const double sp = obj.vel.xy().norm();
    if (sp > 0.0) {
      const double ns = std::max(0.0, sp - cfg.settle_decel * dt);
      obj.vel.x *= (sp > 0.0 ? ns / sp : 0.0);
      obj.vel.y *= (sp > 0.0 ? ns / sp : 0.0);
      obj.pose.x += obj.vel.x * dt;
      obj.pose.y += obj.vel.y * dt;
    }
    const double sup = support_height(st, obj);
    const double dz = clampd(sup - obj.pose.z, -cfg.settle_z_speed * dt, cfg.settle_z_speed * dt);
    obj.pose.z += dz;
    obj.vel.z = dz / dt;
    if (resolve_object_static(st, obj)) {
      obj.vel.x = 0.0;
      obj.vel.y = 0.0;
    }
  }

  a.root_vel = (a.root.xy() - old_pos) * (1.0 / dt);
  advance_guides(st, cfg);
  st.step_count += 1;
  return ev;
}

std::pair<SimState, StepEvents> step(const SimState& state, const ActionCommand& action, double dt,
                                     const SimConfig& cfg) {
  SimState next = state;
  StepEvents ev = step_mut(next, action, dt, cfg);
  return {std::move(next), ev};
}

int privileged_feature_dim(const SimConfig& cfg) {
  return kPrivilegedBaseDim + 3 * cfg.feature_pcd_points;
}

std::vector<float> privileged_features(const SimState& st, const GoalSpec& goal,
                                       const SimConfig& cfg) {
  const AgentState& a = st.agent;
  const SceneObject* obj = find_object(st, goal.object_id);
  if (!obj) throw std::invalid_argument("goal references unknown object " + goal.object_id);

  std::vector<float> f;
  f.reserve(privileged_feature_dim(cfg));
  const double yaw = a.root.yaw;
  const Vec3 torso = torso_point(a);

  auto push2 = [&](const Vec2& v) {
    f.push_back(static_cast<float>(v.x));
    f.push_back(static_cast<float>(v.y));
  };
  auto push3 = [&](const Vec3& v) {
    f.push_back(static_cast<float>(v.x));
    f.push_back(static_cast<float>(v.y));
    f.push_back(static_cast<float>(v.z));
  };

  push2(a.root.xy());
  f.push_back(static_cast<float>(a.root.z));
  f.push_back(static_cast<float>(std::cos(yaw)));
  f.push_back(static_cast<float>(std::sin(yaw)));
  push2(rotate_inv(a.root_vel, yaw));
  push3(rotate_inv(a.hand_left - torso, yaw));
  push3(rotate_inv(a.hand_right - torso, yaw));

  const Vec2 obj_rel = rotate_inv(obj->pose.xy() - a.root.xy(), yaw);
  push2(obj_rel);
  f.push_back(static_cast<float>(obj->pose.z));
  f.push_back(static_cast<float>(std::cos(obj->pose.yaw - yaw)));
  f.push_back(static_cast<float>(std::sin(obj->pose.yaw - yaw)));
  push3(rotate_inv(obj->vel, yaw));

  const Vec2 goal_rel = rotate_inv(goal.pose.xy() - a.root.xy(), yaw);
  push2(goal_rel);
  f.push_back(static_cast<float>(goal.pose.z));
  f.push_back(static_cast<float>(std::cos(goal.pose.yaw - yaw)));
  f.push_back(static_cast<float>(std::sin(goal.pose.yaw - yaw)));

  push2(rotate_inv(active_guide_point(st, goal) - a.root.xy(), yaw));

  const RewardContext ctx = distances(st, goal);
  f.push_back(static_cast<float>(ctx.d_robot2object));
  f.push_back(static_cast<float>(ctx.d_hand2object));
  f.push_back(static_cast<float>(ctx.d_object2goal));
  f.push_back(a.carrying == goal.object_id ? 1.0f : 0.0f);
  f.push_back(a.carrying.empty() ? 0.0f : 1.0f);
  f.push_back(a.standing ? 1.0f : 0.0f);

  const auto& pts = obj->tmpl ? obj->tmpl->points : std::vector<Vec3>{};
  const int want = cfg.feature_pcd_points;
  const int have = static_cast<int>(pts.size());
  for (int i = 0; i < want; ++i) {
    if (have == 0) {
      f.push_back(0.0f);
      f.push_back(0.0f);
      f.push_back(0.0f);
      continue;
    }
    const int src = std::min(have - 1, i * std::max(1, have / want));
    push3(pts[src]);
  }
  return f;
}

std::vector<float> egocentric_observation(const SimState& st, const GridSpec& grid) {
  const int c = grid.cells;
  std::vector<float> out(static_cast<size_t>(c) * c * 3, 0.0f);
  const double cell = grid.extent / c;
  const double half = grid.extent / 2.0;
  const AgentState& a = st.agent;

  for (int ix = 0; ix < c; ++ix) {
    const double fx = -half + (ix + 0.5) * cell;  // agent-frame forward
    if (fx <= 0.0) continue;                      // behind the agent
    for (int iy = 0; iy < c; ++iy) {
      const double fy = -half + (iy + 0.5) * cell;
      const Vec2 world = a.root.xy() + rotate(Vec2{fx, fy}, a.root.yaw);
      float* cellp = &out[(static_cast<size_t>(ix) * c + iy) * 3];
      for (const auto& ob : st.obstacles) {
        if ((world - ob.center).norm() <= ob.radius) {
          cellp[0] = 1.0f;
          break;
        }
      }
      for (const auto& obj : st.objects) {
        if ((world - obj.pose.xy()).norm() <= obj.footprint_radius) {
          cellp[1] = 1.0f;
          if (obj.id == a.carrying) cellp[2] = 1.0f;
        }
      }
    }
  }
  return out;
}

RewardContext distances(const SimState& st, const GoalSpec& goal) {
  const AgentState& a = st.agent;
  const SceneObject* obj = find_object(st, goal.object_id);
  if (!obj) throw std::invalid_argument("goal references unknown object " + goal.object_id);

  RewardContext ctx;
  ctx.carrying_target = (a.carrying == goal.object_id);
  ctx.d_robot2object = (a.root.xy() - obj->pose.xy()).norm();
  ctx.d_hand2object = hand_to_object_distance(st, *obj);
  ctx.d_object2goal = (obj->pose.xy() - goal.pose.xy()).norm();
  const Vec2 guide = active_guide_point(st, goal);
  ctx.d_object2guide = (obj->pose.xy() - guide).norm();

  const Vec2 target = ctx.carrying_target ? guide : obj->pose.xy();
  const Vec2 facing = rotate(Vec2{1.0, 0.0}, a.root.yaw);
  ctx.dhat = normalized_or(target - a.root.xy(), facing);
  ctx.v_r_proj = a.root_vel.dot(ctx.dhat);
  ctx.v_o_proj = obj->vel.xy().dot(ctx.dhat);

  ctx.z_o = obj->pose.z;
  ctx.z_init = obj->z_init;
  ctx.z_target = goal.pose.z;
  ctx.delta_rot = angle_dist(obj->pose.yaw, goal.pose.yaw);
  return ctx;
}

}  // namespace hvrs
