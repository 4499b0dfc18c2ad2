#pragma once

// Independent reference implementations used only by tests. Everything here
// is a direct, unoptimized transliteration of the governing formulas, written
// before the library code so the two cannot share mistakes.

#include <algorithm>
#include <cmath>
#include <vector>

#include "hvrs/rewards.hpp"

namespace ref {

struct Terms {
  double r[8];
  double task;
};

// Table of shaped terms, straight from the definitions:
//   r1 = exp(-2 (v_t - v_r at dhat)^2)
//   r2 = exp(-0.5 d_robot2object^2)
//   r3 = exp(-5 d_hand2object)
//   r4 = clamp((min(z_o, z_target) - z_init) / (z_target - z_init), 0, 1)
//   r5 = exp(-2 (v_o^target - v_o at dhat)^2)
//   r6 = exp(-d_object2guide)
//   r7 = exp(-5 d_object2goal)
//   r8 = exp(-2 delta_rot)
// weighted by alpha = (.1 .1 .1 .1 .2 .2 .1 .1).
inline Terms task_terms(const hvrs::RewardContext& c, const hvrs::RewardConfig& cfg) {
  Terms t{};
  t.r[0] = std::exp(-2.0 * (cfg.v_t - c.v_r_proj) * (cfg.v_t - c.v_r_proj));
  t.r[1] = std::exp(-0.5 * c.d_robot2object * c.d_robot2object);
  t.r[2] = std::exp(-5.0 * c.d_hand2object);
  if (c.z_target <= c.z_init) {
    t.r[3] = (c.z_o >= c.z_target) ? 1.0 : 0.0;
  } else {
    double raw = (std::min(c.z_o, c.z_target) - c.z_init) / (c.z_target - c.z_init);
    t.r[3] = cfg.clamp_height_term ? std::clamp(raw, 0.0, 1.0)
                                   : (std::min(c.z_o, c.z_target) - c.z_init) / (c.z_target - c.z_init);
  }
  t.r[4] = std::exp(-2.0 * (cfg.v_o_target - c.v_o_proj) * (cfg.v_o_target - c.v_o_proj));
  t.r[5] = std::exp(-1.0 * c.d_object2guide);
  t.r[6] = std::exp(-5.0 * c.d_object2goal);
  t.r[7] = std::exp(-2.0 * c.delta_rot);
  t.task = 0.0;
  for (int i = 0; i < 8; ++i) t.task += cfg.alpha[i] * t.r[i];
  return t;
}

// Release/step-back objective:
//   r_a = 1 - exp(-0.5 d_robot2object), forced to 1 once d > 1.0
//   r_b = 1 - exp(-0.5 d_hand2object),  forced to 1 once d > 0.5
//   both zeroed while d_object2goal >= thresh; reward = 0.5 r_a + 0.5 r_b
inline double stage2(double d_robot, double d_hand, double d_goal, const hvrs::RewardConfig& cfg) {
  double ra = 1.0 - std::exp(-0.5 * d_robot);
  if (d_robot > cfg.stage2_robot_cap) ra = 1.0;
  double rb = 1.0 - std::exp(-0.5 * d_hand);
  if (d_hand > cfg.stage2_hand_cap) rb = 1.0;
  if (d_goal >= cfg.thresh_object2goal) {
    ra = 0.0;
    rb = 0.0;
  }
  return 0.5 * ra + 0.5 * rb;
}

// r_style = lambda * -log(max(1 - D, eps)).
inline double style(double d_out, const hvrs::RewardConfig& cfg) {
  return cfg.lambda_amp * -std::log(std::max(1.0 - d_out, cfg.style_eps));
}

inline double total(double task, double style_r) { return task + style_r; }

// GAE by definition: A_t = sum_{l>=0} (gamma lam)^l delta_{t+l} within one
// episode segment, delta_t = r_t + gamma V(s_{t+1}) - V(s_t). `values` has one
// extra trailing entry: the bootstrap value (0 for terminal ends).
inline std::vector<double> gae(const std::vector<double>& rewards, const std::vector<double>& values,
                               double gamma, double lam) {
  const int n = static_cast<int>(rewards.size());
  std::vector<double> adv(n, 0.0);
  for (int t = 0; t < n; ++t) {
    double acc = 0.0, w = 1.0;
    for (int l = t; l < n; ++l) {
      double delta = rewards[l] + gamma * values[l + 1] - values[l];
      acc += w * delta;
      w *= gamma * lam;
    }
    adv[t] = acc;
  }
  return adv;
}

// Diagonal-Gaussian log density at z.
inline double gaussian_logpdf(const std::vector<double>& z, const std::vector<double>& mean,
                              const std::vector<double>& log_std) {
  const double log2pi = std::log(2.0 * 3.14159265358979323846);
  double lp = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    double s = std::exp(log_std[i]);
    double u = (z[i] - mean[i]) / s;
    lp += -0.5 * u * u - log_std[i] - 0.5 * log2pi;
  }
  return lp;
}

}  // namespace ref
