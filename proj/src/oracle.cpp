#include "hvrs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hvrs {

namespace {

// Shortest distance from point p to the segment a-b.
double seg_point_dist(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  const double t = len2 > 1e-12 ? clampd((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  const Vec2 c = {a.x + ab.x * t, a.y + ab.y * t};
  return (c - p).norm();
}

double bounds_inset(const Rect& b, const Vec2& p) {
  return std::min(std::min(p.x - b.x_min, b.x_max - p.x),
                  std::min(p.y - b.y_min, b.y_max - p.y));
}

// Movable objects are deliberately NOT obstacles for the walk: plowing an
// unplaced one aside is harmless, and treating every footprint as a hard
// circle creates unwalkable pockets. Only circles that must never be touched
// (an already-placed object) are passed explicitly.
struct Keepout {
  Vec2 center;
  double radius = 0.0;
};

// The payload rides ahead of the root, so a transport probe must keep its
// swept disc clear of obstacles and walls too (they shift the whole rig back,
// stalling the walk).
struct CarriedProbe {
  Vec2 xy;
  double fp = 0.0;
};

// A probe step is acceptable when it stays inside the walkable inset and cuts
// no inflated circle more deeply than the agent already does, so hugging a
// wall or standing over a just-released object only forbids going deeper.
bool path_clear(const SimState& st, const SimConfig& cfg, const Vec2& from, const Vec2& probe,
                const std::vector<Keepout>& keep, const CarriedProbe* carried) {
  const double wall_req =
      std::min(cfg.agent_radius + 0.03, bounds_inset(st.bounds, from) - 1e-9);
  if (bounds_inset(st.bounds, probe) < wall_req) return false;
  const auto clears = [&](const Vec2& a, const Vec2& b, const Vec2& center, double radius) {
    const double req = std::min(radius, (a - center).norm() - 1e-9);
    return seg_point_dist(a, b, center) >= req;
  };
  for (const auto& ob : st.obstacles)
    if (!clears(from, probe, ob.center, ob.radius + cfg.agent_radius + 0.04)) return false;
  for (const auto& k : keep)
    if (!clears(from, probe, k.center, k.radius)) return false;
  if (carried) {
    const Vec2 u = normalized_or(probe - from, {1.0, 0.0});
    const double lead = (carried->xy - from).norm();
    const Vec2 cto = probe + u * lead;  // payload swings in line with the heading
    const double creq =
        std::min(carried->fp + 0.05, bounds_inset(st.bounds, carried->xy) - 1e-9);
    if (bounds_inset(st.bounds, cto) < creq) return false;
    for (const auto& ob : st.obstacles)
      if (!clears(carried->xy, cto, ob.center, ob.radius + carried->fp + 0.06)) return false;
  }
  return true;
}

// Feasible walk direction closest to `desired`, probing a short look-ahead.
// Blocked probes deflect around the nearest offender on a side committed from
// the geometry, so successive steps accumulate tangential progress instead of
// flip-flopping between the two sides.
Vec2 walk_direction(const SimState& st, const SimConfig& cfg, const Vec2& from,
                    const Vec2& desired, double remaining, const std::vector<Keepout>& keep,
                    const CarriedProbe* carried) {
  const double full = clampd(remaining * 0.8, 0.2, 0.6);
  if (path_clear(st, cfg, from, from + desired * full, keep, carried)) return desired;

  double block_t = 1e18;
  double side = 1.0;
  const auto consider = [&](const Vec2& center, double radius) {
    const Vec2 rel = center - from;
    const double t = rel.dot(desired);
    if (t <= 0.0 || t - radius > full) return;
    const double cross = desired.x * rel.y - desired.y * rel.x;
    if (std::abs(cross) >= radius) return;
    if (t < block_t) {
      block_t = t;
      side = cross >= 0.0 ? -1.0 : 1.0;  // deflect away from the circle
    }
  };
  for (const auto& ob : st.obstacles)
    consider(ob.center, ob.radius + cfg.agent_radius + (carried ? carried->fp + 0.06 : 0.04));
  for (const auto& k : keep) consider(k.center, k.radius);

  // Chatter damping: while already moving, keep deflecting toward the side of
  // the travel direction. The geometric side flips between adjacent steps when
  // the blocker sits on the desired ray, which otherwise pins the rig in place.
  const Vec2 vel = st.agent.root_vel;
  const double speed = vel.norm();
  if (speed > 0.4) {
    const double vcross = desired.x * vel.y - desired.y * vel.x;
    if (std::abs(vcross) > 0.15 * speed) side = vcross >= 0.0 ? 1.0 : -1.0;
  }

  // Exhaust the committed side across every deflection and stride before
  // touching the other side. Any crossover candidate reverses the slide along
  // the current blocker, and taking one while the committed side still has a
  // short step or a wide swing available sets up a shuttle that undoes each
  // stretch of progress a few steps later.
  for (const double s : {side, -side}) {
    for (const double look : {full, full * 0.5}) {
      for (int k = 1; k <= 14; ++k) {
        const Vec2 cand = rotate(desired, s * 0.15 * k);
        if (path_clear(st, cfg, from, from + cand * look, keep, carried)) return cand;
      }
    }
  }
  return desired;
}

// Retreat bearing that backs farthest away from `center`; along-wall bearings
// stay viable in corners, and shorter probes let the walk thread gaps that a
// full stride would clip.
Vec2 retreat_direction(const SimState& st, const SimConfig& cfg, const Vec2& from,
                       const Vec2& center, const std::vector<Keepout>& keep) {
  const Vec2 away = normalized_or(from - center, rotate(Vec2{1.0, 0.0}, st.agent.root.yaw));
  Vec2 best = away;
  double best_score = -1e18;
  for (int k = 0; k < 48; ++k) {
    const Vec2 cand = rotate(away, k * (std::numbers::pi / 24.0));
    for (const double look : {0.45, 0.30, 0.18}) {
      const Vec2 probe = from + cand * look;
      if (!path_clear(st, cfg, from, probe, keep, nullptr)) continue;
      const double score = (probe - center).norm();
      if (score > best_score + 1e-9) {
        best_score = score;
        best = cand;
      }
      break;
    }
  }
  return best;
}

double face(double current_yaw, double target_yaw, double gain, double cap) {
  return clampd(gain * wrap_angle(target_yaw - current_yaw), -cap, cap);
}

// The upper-ring cloud point nearest to the agent: it sits within easy hand
// reach for every object template.
Vec3 nearest_cloud_point(const SceneObject& obj, const Vec2& root) {
  Vec3 best{obj.pose.x, obj.pose.y, obj.pose.z + 0.12};
  if (!obj.tmpl || obj.tmpl->points.empty()) return best;
  double max_z = -1.0;
  for (const Vec3& p : obj.tmpl->points) max_z = std::max(max_z, p.z);
  double best_d = 1e18;
  for (const Vec3& p : obj.tmpl->points) {
    if (p.z < max_z - 1e-9) continue;
    const Vec2 world = obj.pose.xy() + rotate(Vec2{p.x, p.y}, obj.pose.yaw);
    const double d = (world - root).norm();
    if (d < best_d) {
      best_d = d;
      best = Vec3{world.x, world.y, obj.pose.z + p.z};
    }
  }
  return best;
}

}  // namespace

ActionCommand scripted_oracle(const SimState& state, const GoalSpec& goal, const SimConfig& cfg,
                              const RewardConfig& rcfg, const std::string& protect_id) {
  ActionCommand cmd;
  cmd.hand_offset_left = {0.35, 0.22, -0.25};
  cmd.hand_offset_right = {0.35, -0.22, -0.25};
  cmd.grasp = false;
  cmd.lift = 0.2;

  const AgentState& a = state.agent;
  const SceneObject* obj = find_object(state, goal.object_id);
  if (!obj) return cmd;  // nothing sensible to do; stand still

  const Vec2 root = a.root.xy();
  const Vec2 obj_xy = obj->pose.xy();
  const double d_goal = (obj_xy - goal.pose.xy()).norm();
  const bool carrying_target = a.carrying == goal.object_id;
  const bool carrying_other = !a.carrying.empty() && !carrying_target;
  const bool placed = !carrying_target && d_goal < goal.success_radius;

  std::vector<Keepout> keep;
  if (!protect_id.empty() && protect_id != goal.object_id && protect_id != a.carrying) {
    if (const SceneObject* prot = find_object(state, protect_id))
      keep.push_back({prot->pose.xy(), prot->footprint_radius + cfg.agent_radius + 0.10});
  }

  if (carrying_other) {
    // Wrong object in hand: let go and wait one step.
    cmd.grasp = false;
    return cmd;
  }

  if (carrying_target) {
    cmd.grasp = true;
    cmd.lift = clampd((goal.pose.z - obj->z_init) / cfg.carry_height, 0.0, 1.0);
    // Carry far enough ahead that releasing never leaves the plow disc
    // overlapping the object, even for the widest footprint.
    cmd.hand_offset_left = {0.62, 0.16, -0.15};
    cmd.hand_offset_right = {0.62, -0.16, -0.15};

    if (d_goal > 0.75) {
      // Pure pursuit along the remaining guide polyline: project the payload
      // onto it and aim a fixed arc length ahead. Chasing vertices instead
      // wedges the rig whenever a corner is cut or the payload hangs just
      // outside the pass radius with the backtrack direction blocked.
      const int n_guides = static_cast<int>(goal.guides.size());
      const int gi = active_guide_index(state, goal);
      std::vector<Vec2> pts;
      for (int i = std::max(gi - 1, 0); i < n_guides; ++i) pts.push_back(goal.guides[i]);
      pts.push_back(goal.pose.xy());
      // Earliest segment within 0.25 of the true minimum wins, so a path that
      // curls back near itself never yanks the projection past a detour.
      double best_d = 1e30, best_arc = 0.0, arc = 0.0;
      for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 ab = pts[i + 1] - pts[i];
        const double len = ab.norm();
        if (len < 1e-9) continue;
        const double t = clampd((obj_xy - pts[i]).dot(ab) / (len * len), 0.0, 1.0);
        const double d = (obj_xy - (pts[i] + ab * t)).norm();
        if (d + 0.25 < best_d) {
          best_d = d;
          best_arc = arc + t * len;
        }
        arc += len;
      }
      const double want = best_arc + 0.6;
      Vec2 target = pts.back();
      arc = 0.0;
      for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 ab = pts[i + 1] - pts[i];
        const double len = ab.norm();
        if (len < 1e-9) continue;
        if (want <= arc + len) {
          target = pts[i] + ab * ((want - arc) / len);
          break;
        }
        arc += len;
      }
      Vec2 dir = normalized_or(target - obj_xy, rotate(Vec2{1.0, 0.0}, a.root.yaw));
      const CarriedProbe payload{obj_xy, obj->footprint_radius};
      dir = walk_direction(state, cfg, root, dir, d_goal, keep, &payload);
      const double speed = clampd(2.2 * (d_goal - 0.4), 0.4, cfg.v_max);
      const Vec2 v_world = dir * speed;
      cmd.root_vel_cmd = rotate_inv(v_world, a.root.yaw);
      cmd.yaw_rate_cmd = face(a.root.yaw, std::atan2(dir.y, dir.x), 3.0, cfg.yaw_rate_max);
      return cmd;
    }

    // Precision placement: servo the carried object (hand midpoint) onto the
    // goal and align its yaw before releasing.
    const Vec2 err = goal.pose.xy() - obj_xy;
    const Vec2 v_world = clamp_norm(err * 2.0, 0.45);
    cmd.root_vel_cmd = rotate_inv(v_world, a.root.yaw);
    // The release heading fixes where the root ends up: it trails the payload
    // by the carry lead. Keep the goal-aligned heading only when that spot has
    // a clear step-back ray; a goal tucked into a room corner otherwise traps
    // the rig between the placed object and the walls, and the step-back can
    // never clear the release caps.
    const double lead = 0.62;
    std::vector<Keepout> rel_keep = keep;
    rel_keep.push_back({goal.pose.xy(), obj->footprint_radius + cfg.agent_radius + 0.06});
    const auto escapable = [&](double psi) {
      const Vec2 heading{std::cos(psi), std::sin(psi)};
      const Vec2 spot = goal.pose.xy() - heading * lead;
      if (bounds_inset(state.bounds, spot) < cfg.agent_radius + 0.03) return false;
      for (const double rot : {0.0, 0.6, -0.6}) {
        const Vec2 away = rotate(heading * -1.0, rot);
        const Vec2 out = spot + away * 0.6;
        // The step-back must end comfortably clear of the walls, not merely
        // squeeze along them, or the greedy retreat cannot reproduce it.
        if (bounds_inset(state.bounds, out) < cfg.agent_radius + 0.07) continue;
        if (path_clear(state, cfg, spot, out, rel_keep, nullptr)) return true;
      }
      return false;
    };
    double yaw_target = wrap_angle(goal.pose.yaw - a.carry_yaw_offset);
    if (!escapable(yaw_target)) {
      for (int k = 1; k < 24; ++k) {
        const double psi =
            yaw_target + (k % 2 ? 1.0 : -1.0) * ((k + 1) / 2) * (std::numbers::pi / 12.0);
        if (escapable(psi)) {
          yaw_target = wrap_angle(psi);
          break;
        }
      }
    }
    const double yaw_err = wrap_angle(yaw_target - a.root.yaw);
    cmd.yaw_rate_cmd = clampd(2.5 * yaw_err, -cfg.yaw_rate_max, cfg.yaw_rate_max);
    const bool settled = err.norm() < 0.12 && a.root_vel.norm() < 0.15 &&
                         std::abs(yaw_err) < 0.25 && std::abs(obj->pose.z - goal.pose.z) < 0.08;
    if (settled) {
      cmd.grasp = false;  // release; the bent posture and step-back follow
      cmd.root_vel_cmd = {0.0, 0.0};
      cmd.yaw_rate_cmd = 0.0;
    }
    return cmd;
  }

  if (placed) {
    // Step back past the release caps and idle, staying bent.
    cmd.lift = 0.15;
    cmd.hand_offset_left = {-0.1, 0.28, -0.35};
    cmd.hand_offset_right = {-0.1, -0.28, -0.35};
    const double d_r = (root - obj_xy).norm();
    const double target = rcfg.stage2_robot_cap + 0.35;
    if (d_r < target) {
      std::vector<Keepout> back_keep = keep;
      back_keep.push_back({obj_xy, obj->footprint_radius + cfg.agent_radius + 0.06});
      const Vec2 dir = retreat_direction(state, cfg, root, obj_xy, back_keep);
      // Keep the command under the bent speed cap so clamping cannot skew it.
      const double speed = a.standing ? 1.2 : 0.4;
      const Vec2 v_world = dir * speed;
      cmd.root_vel_cmd = rotate_inv(v_world, a.root.yaw);
      cmd.yaw_rate_cmd = face(a.root.yaw, std::atan2(dir.y, dir.x), 2.5, cfg.yaw_rate_max);
    }
    return cmd;
  }

  // Approach and grasp. Stand up first if starting bent.
  if (!a.standing) cmd.lift = 1.0;
  const double ring = cfg.agent_radius + obj->footprint_radius + 0.06;
  const Vec2 to_obj = obj_xy - root;
  const double d_r = to_obj.norm();

  if (d_r > ring + 0.25) {
    Vec2 dir = normalized_or(to_obj, rotate(Vec2{1.0, 0.0}, a.root.yaw));
    dir = walk_direction(state, cfg, root, dir, d_r - ring, keep, nullptr);
    const double speed = clampd(1.9 * (d_r - ring), 0.25, cfg.v_max);
    const Vec2 v_world = dir * speed;
    cmd.root_vel_cmd = rotate_inv(v_world, a.root.yaw);
    cmd.yaw_rate_cmd = face(a.root.yaw, std::atan2(dir.y, dir.x), 3.0, cfg.yaw_rate_max);
    return cmd;
  }

  // Fine positioning on the grasp ring, facing the object, hands to the
  // nearest upper cloud point.
  const Vec2 radial = normalized_or(to_obj, {1.0, 0.0});
  const Vec2 v_world = radial * clampd(2.0 * (d_r - ring), -0.5, 0.5);
  cmd.root_vel_cmd = rotate_inv(v_world, a.root.yaw);
  const double bearing = std::atan2(to_obj.y, to_obj.x);
  cmd.yaw_rate_cmd = clampd(3.5 * wrap_angle(bearing - a.root.yaw), -cfg.yaw_rate_max,
                            cfg.yaw_rate_max);

  const Vec3 torso{a.root.x, a.root.y, a.root.z};
  const Vec3 point = nearest_cloud_point(*obj, root);
  const Vec3 rel = clamp_norm(point - torso, cfg.reach_radius * 0.98);
  const Vec3 off = rotate_inv(rel, a.root.yaw);
  cmd.hand_offset_left = {off.x, off.y + 0.04, off.z};
  cmd.hand_offset_right = {off.x, off.y - 0.04, off.z};
  if (a.standing && hand_to_object_distance(state, *obj) < cfg.grasp_radius * 0.9) {
    cmd.grasp = true;
  }
  return cmd;
}

}  // namespace hvrs
