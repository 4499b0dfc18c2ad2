#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hvrs/amp.hpp"
#include "hvrs/checkpoint.hpp"
#include "hvrs/config.hpp"
#include "hvrs/policy.hpp"
#include "hvrs/sim.hpp"

namespace hvrs {

// A fully built episode starting point. Stages differ only in how their
// start pools are constructed; rollout collection is shared.
struct EpisodeStart {
  SimState state;
  GoalSpec goal;
  std::string task_id;
};

struct Transition {
  std::vector<float> obs;
  std::vector<double> z;  // pre-squash sample
  std::vector<double> u;  // squashed action
  double log_prob = 0.0;
  double value = 0.0;
  double task_r = 0.0;    // task term sum (task mode) or stage-2 reward
  double style_r = 0.0;
  double total_r = 0.0;
  std::array<double, 8> terms{};
  bool seg_end = false;   // last transition of its episode segment
  double bootstrap = 0.0; // V(s') at segment end
  double adv = 0.0;
  double ret = 0.0;
  TransitionPair amp;
};

struct RolloutBatch {
  std::vector<Transition> steps;  // env-major, envs * steps_per_env entries
  int envs = 0;
  int steps_per_env = 0;
  int episodes_finished = 0;
  int successes = 0;  // episodes ending placed + released + stepped back
  double mean_task = 0.0;
  double mean_style = 0.0;
  double mean_total = 0.0;
  std::array<double, 8> term_means{};
};

RolloutBatch collect_rollouts(const GaussianPolicy& policy, const MlpParams& value,
                              const MlpParams& disc, const std::vector<EpisodeStart>& pool,
                              const StageConfig& scfg, const Config& cfg, uint64_t seed,
                              int epoch);

// Fills adv/ret in place: GAE within episode segments, bootstrapping every
// segment end with the recorded V(s').
void compute_gae(RolloutBatch& batch, double gamma, double lam);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clip_frac = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
};

// One full pass of clipped-surrogate minibatch updates over the batch
// (ppo_epochs x fixed sequential minibatches). Throws "training diverged"
// on non-finite losses.
UpdateStats update_policy(GaussianPolicy& policy, MlpParams& value, RolloutBatch& batch,
                          const StageConfig& scfg, AdamState& policy_opt, AdamVec& log_std_opt,
                          AdamState& value_opt);

// Everything a training stage needs to continue bit-exactly.
struct TrainerArtifacts {
  GaussianPolicy policy;
  MlpParams value;
  MlpParams disc;
  AdamState policy_opt;
  AdamVec log_std_opt;
  AdamState value_opt;
  int epoch = 0;
};

TensorMap artifacts_to_tensors(const TrainerArtifacts& a);
TrainerArtifacts artifacts_from_tensors(const TensorMap& t);
void save_artifacts(const std::string& path, const TrainerArtifacts& a);
TrainerArtifacts load_artifacts(const std::string& path);

TrainerArtifacts make_artifacts(int obs_dim, const StageConfig& scfg, const AmpConfig& amp,
                                uint64_t seed);

struct StageRunResult {
  TrainerArtifacts art;
  std::vector<std::string> log_lines;  // one JSON object per epoch
};

// Shared stage loop: rollouts, policy/value updates, then discriminator
// updates, logging one JSON line per epoch. Resumes from art.epoch. On
// divergence saves the last-good artifacts to save_path (when set) before
// rethrowing.
StageRunResult run_stage_core(TrainerArtifacts art, const std::vector<EpisodeStart>& pool,
                              const ReferenceBuffer& ref, const StageConfig& scfg,
                              const Config& cfg, uint64_t seed, std::ostream* log,
                              const std::string& save_path);

// Start pools.
std::vector<EpisodeStart> build_stage1_pool(const std::vector<SingleTask>& singles,
                                            const SimConfig& cfg);
// Near-placement initialization; variant 0 starts with the object released at
// the goal (agent bent beside it), variant 1 still carrying at the goal.
EpisodeStart build_stage2_start(const SingleTask& single, int variant, const SimConfig& cfg);
std::vector<EpisodeStart> build_stage2_pool(const std::vector<SingleTask>& singles,
                                            const SimConfig& cfg);

struct Stage3PoolStats {
  int tasks = 0;
  int reached = 0;  // model-1 runs where the switch rule fired
  int standing_false = 0;
};
// Rolls the frozen first teacher through sub-task 0 on every task and caches
// the state at the moment the switch rule fires. Throws "stage-3 precondition
// unmet" when more than half the tasks never reach a switch state.
std::vector<EpisodeStart> build_stage3_pool(const std::vector<TaskSpec>& tasks,
                                            const GaussianPolicy& teacher1, const Config& cfg,
                                            Stage3PoolStats* stats);

// Stage runners (thin wrappers over the pieces above).
StageRunResult run_stage1(const std::vector<SingleTask>& singles, const Config& cfg,
                          uint64_t seed, const TrainerArtifacts* resume, std::ostream* log,
                          const std::string& save_path);
StageRunResult run_stage2(const TrainerArtifacts& stage1, const std::vector<SingleTask>& singles,
                          const Config& cfg, uint64_t seed, std::ostream* log,
                          const std::string& save_path,
                          const TrainerArtifacts* resume = nullptr);
StageRunResult run_stage3(const TrainerArtifacts& teacher1_stage2,
                          const TrainerArtifacts& stage1_pretrain,
                          const std::vector<TaskSpec>& tasks, const Config& cfg, uint64_t seed,
                          std::ostream* log, const std::string& save_path,
                          const TrainerArtifacts* resume = nullptr);

}  // namespace hvrs
