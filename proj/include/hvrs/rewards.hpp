#pragma once

#include <array>

#include "hvrs/config.hpp"
#include "hvrs/geometry.hpp"

namespace hvrs {

// Scalar context a reward evaluation needs. Produced by the simulator's
// distance pass; can also be built directly (tests, replay).
struct RewardContext {
  double d_robot2object = 0.0;  // horizontal torso-to-object-center distance
  double d_hand2object = 0.0;   // min over hands/cloud points, 3D
  double d_object2goal = 0.0;   // horizontal
  double d_object2guide = 0.0;  // horizontal, to the active guide vertex
  Vec2 dhat;                    // unit direction toward the current target
  double v_r_proj = 0.0;        // robot velocity projected on dhat
  double v_o_proj = 0.0;        // object velocity projected on dhat
  double z_o = 0.0;
  double z_init = 0.0;
  double z_target = 0.0;
  double delta_rot = 0.0;       // |wrap(yaw_o - yaw_g)|, in [0, pi]
  bool carrying_target = false;
};

struct RewardBreakdown {
  std::array<double, 8> terms{};  // r1..r8 in table order
  double task = 0.0;              // weighted sum
};

// The eight shaped terms and their weighted sum.
RewardBreakdown task_reward_terms(const RewardContext& ctx, const RewardConfig& cfg);

// Release/step-back objective: 0.5*r_a + 0.5*r_b with distance caps, masked
// to zero whenever the object is not placed within thresh_object2goal.
double stage2_reward(double d_robot2object, double d_hand2object, double d_object2goal,
                     const RewardConfig& cfg);

// lambda * -log(max(1 - D, eps)).
double style_reward(double discriminator_out, const RewardConfig& cfg);

// task + style.
double total_reward(double task_r, double style_r);

}  // namespace hvrs
