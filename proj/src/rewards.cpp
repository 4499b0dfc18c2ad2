#include "hvrs/rewards.hpp"

#include <algorithm>
#include <cmath>

namespace hvrs {

namespace {
inline double sq(double v) { return v * v; }
}

RewardBreakdown task_reward_terms(const RewardContext& ctx, const RewardConfig& cfg) {
  RewardBreakdown out;
  out.terms[0] = std::exp(-2.0 * sq(cfg.v_t - ctx.v_r_proj));
  out.terms[1] = std::exp(-0.5 * sq(ctx.d_robot2object));
  out.terms[2] = std::exp(-5.0 * ctx.d_hand2object);

  const double denom = ctx.z_target - ctx.z_init;
  if (denom <= 0.0) {
    // Degenerate target at or below the start height: binary on reaching it.
    out.terms[3] = (ctx.z_o >= ctx.z_target) ? 1.0 : 0.0;
  } else {
    const double raw = (std::min(ctx.z_o, ctx.z_target) - ctx.z_init) / denom;
    out.terms[3] = cfg.clamp_height_term ? clampd(raw, 0.0, 1.0) : raw;
  }

  out.terms[4] = std::exp(-2.0 * sq(cfg.v_o_target - ctx.v_o_proj));
  out.terms[5] = std::exp(-ctx.d_object2guide);
  out.terms[6] = std::exp(-5.0 * ctx.d_object2goal);
  out.terms[7] = std::exp(-2.0 * ctx.delta_rot);

  double task = 0.0;
  for (int i = 0; i < 8; ++i) task += cfg.alpha[i] * out.terms[i];
  out.task = task;
  return out;
}

double stage2_reward(double d_robot2object, double d_hand2object, double d_object2goal,
                     const RewardConfig& cfg) {
  if (d_object2goal >= cfg.thresh_object2goal) return 0.0;
  double ra = (d_robot2object > cfg.stage2_robot_cap) ? 1.0 : 1.0 - std::exp(-0.5 * d_robot2object);
  double rb = (d_hand2object > cfg.stage2_hand_cap) ? 1.0 : 1.0 - std::exp(-0.5 * d_hand2object);
  return 0.5 * ra + 0.5 * rb;
}

double style_reward(double discriminator_out, const RewardConfig& cfg) {
  return cfg.lambda_amp * -std::log(std::max(1.0 - discriminator_out, cfg.style_eps));
}

double total_reward(double task_r, double style_r) { return task_r + style_r; }

}  // namespace hvrs
