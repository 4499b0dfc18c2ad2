#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace hvrs {

// Full-scale reference setup this desk-scale configuration is shrunk from.
// Kept as provenance; nothing in the code paths reads these numbers.
struct FullScaleReference {
  int tasks_train = 350;
  int tasks_unseen = 66;
  int stage1_epochs = 28200;
  int stage2_epochs = 550;
  int stage3_epochs = 18550;
  int distill_epochs = 104000;
};

struct GridSpec {
  int cells = 32;      // C: grid is C x C x 3
  double extent = 8.0; // meters covered by the full grid (agent-centered)
};

struct SimConfig {
  double dt = 1.0 / 30.0;
  double v_max = 1.5;
  double yaw_rate_max = 2.0;
  double bent_speed_scale = 0.3; // v/yaw limit factor while standing == false
  double reach_radius = 0.9;
  double grasp_radius = 0.25;
  double carry_height = 0.6;
  double torso_height = 0.9;
  double agent_radius = 0.3;
  double hand_speed = 2.5;
  int standup_steps = 5;          // consecutive lift=1 no-grasp steps to stand
  double standup_lift_min = 0.99;
  double settle_decel = 3.0;      // m/s^2, horizontal decay of released objects
  double settle_z_speed = 1.2;    // m/s, vertical relaxation rate
  double guide_pass_radius = 0.5; // guide vertex counts as passed within this
  int feature_pcd_points = 8;     // downsampled cloud size in privileged features
  GridSpec grid;
};

struct RewardConfig {
  std::array<double, 8> alpha = {0.1, 0.1, 0.1, 0.1, 0.2, 0.2, 0.1, 0.1};
  double v_t = 1.5;          // target robot approach speed
  double v_o_target = 1.5;   // target object transport speed
  double stage2_robot_cap = 1.0;
  double stage2_hand_cap = 0.5;
  double thresh_object2goal = 0.5; // stage-2 mask: placement must hold
  double success_radius = 0.5;
  double lambda_amp = 0.5;
  double style_eps = 1e-4;   // clamp inside -log(1 - D)
  bool clamp_height_term = true;
};

struct AmpConfig {
  int hidden = 64;
  int hidden_layers = 2;
  double lr = 1e-3;
  double logit_clamp = 10.0;
  int batch = 128;
  int buffer_capacity = 20000;
  int ref_transitions = 6000;
  int updates_per_epoch = 2;
};

enum class RewardMode { kTaskAndStyle, kStage2 };

struct StageConfig {
  int epochs = 300;
  int envs = 16;
  int steps_per_env = 160;
  int episode_steps = 900; // per sub-task training budget
  int ppo_epochs = 4;
  int minibatch = 512;
  double lr = 3e-4;
  double gamma = 0.99;
  double lam = 0.95;
  double clip = 0.2;
  double vf_coef = 0.5;
  double ent_coef = 0.0;
  double max_grad_norm = 1.0;
  int hidden = 128;
  int hidden_layers = 2;
  double log_std_init = -0.7;
  RewardMode reward_mode = RewardMode::kTaskAndStyle;
};

struct StagesConfig {
  StageConfig stage1;
  StageConfig stage2;
  StageConfig stage3;
  StagesConfig() {
    stage2.epochs = 50;
    stage2.lr = 1e-4;
    stage2.steps_per_env = 96;
    stage2.episode_steps = 240;
    stage2.reward_mode = RewardMode::kStage2;
    stage3.epochs = 300;
  }
};

struct SwitchThresholds {
  double speed = 0.05;    // object speed must be below (m/s)
  double success = 0.5;   // first object within this of its goal (m)
  double distance = 1.0;  // robot at least this far from first object (m)
  int time_steps = 60;    // episode must be at least this old
};

struct DaggerConfig {
  int rounds = 6;
  int student_epochs = 3;
  int minibatch = 256;
  double lr = 1e-3;
  int dataset_cap = 60000;
  int student_hidden = 256;
  int student_layers = 2;
  int pool = 2; // average-pool factor applied to the occupancy grid
  double holdout_frac = 0.1;
  SwitchThresholds thresholds;
};

struct EvalConfig {
  int episode_cap = 1800;
};

struct TasksConfig {
  int n_train = 48;
  int n_unseen = 12;
};

struct Config {
  SimConfig sim;
  RewardConfig rewards;
  AmpConfig amp;
  StagesConfig stages;
  DaggerConfig dagger;
  EvalConfig eval;
  TasksConfig tasks;
  FullScaleReference full_scale_reference;
};

// Serializes the full config (used by --print-config).
std::string config_to_json(const Config& c);

// Strict parse: unknown keys or wrong types raise std::runtime_error naming
// the offending field. Missing keys keep their defaults.
Config config_from_json(const std::string& text);

// Loads path if non-empty, else $HVRS_CONFIG if set, else defaults.
Config load_config(const std::string& path);

}  // namespace hvrs
