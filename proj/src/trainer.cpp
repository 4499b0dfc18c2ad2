#include "hvrs/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "hvrs/oracle.hpp"
#include "hvrs/rewards.hpp"

namespace hvrs {

namespace {

using nlohmann::json;

bool episode_complete(const RewardContext& ctx, const SimState& state, const GoalSpec& goal,
                      const RewardConfig& rcfg) {
  return ctx.d_object2goal < goal.success_radius && state.agent.carrying.empty() &&
         ctx.d_robot2object >= rcfg.stage2_robot_cap && ctx.d_hand2object >= rcfg.stage2_hand_cap;
}

double value_of(const MlpParams& value, const std::vector<float>& obs, MlpWorkspace& ws) {
  std::vector<double> in(obs.begin(), obs.end());
  return mlp_forward(value, in, ws)[0];
}

}  // namespace

RolloutBatch collect_rollouts(const GaussianPolicy& policy, const MlpParams& value,
                              const MlpParams& disc, const std::vector<EpisodeStart>& pool,
                              const StageConfig& scfg, const Config& cfg, uint64_t seed,
                              int epoch) {
  if (pool.empty()) throw std::invalid_argument("trainer: empty start pool");
  const bool stage2_mode = scfg.reward_mode == RewardMode::kStage2;
  const bool use_style = cfg.rewards.lambda_amp != 0.0;

  RolloutBatch batch;
  batch.envs = scfg.envs;
  batch.steps_per_env = scfg.steps_per_env;
  batch.steps.reserve(static_cast<size_t>(scfg.envs) * scfg.steps_per_env);

  MlpWorkspace ws;
  for (int env = 0; env < scfg.envs; ++env) {
    Rng rng(seed, hash_combine(static_cast<uint64_t>(epoch), static_cast<uint64_t>(env)));
    size_t cursor = (static_cast<size_t>(epoch) * scfg.envs + env) % pool.size();
    SimState state = pool[cursor].state;
    GoalSpec goal = pool[cursor].goal;
    int ep_steps = 0;

    for (int t = 0; t < scfg.steps_per_env; ++t) {
      Transition tr;
      tr.obs = privileged_features(state, goal, cfg.sim);
      std::vector<double> obs_d(tr.obs.begin(), tr.obs.end());
      ActionSample sample = sample_action(policy, obs_d, rng);
      tr.z = sample.z;
      tr.u = sample.u;
      tr.log_prob = sample.log_prob;
      tr.value = mlp_forward(value, obs_d, ws)[0];

      const auto prev_amp = amp_state_features(state);
      const ActionCommand cmd = decode_action(sample.u, cfg.sim);
      step_mut(state, cmd, cfg.sim.dt, cfg.sim);
      ++ep_steps;

      const RewardContext ctx = distances(state, goal);
      if (stage2_mode) {
        tr.task_r = stage2_reward(ctx.d_robot2object, ctx.d_hand2object, ctx.d_object2goal,
                                  cfg.rewards);
      } else {
        const RewardBreakdown rb = task_reward_terms(ctx, cfg.rewards);
        tr.terms = rb.terms;
        tr.task_r = rb.task;
      }
      const auto next_amp = amp_state_features(state);
      for (int i = 0; i < kAmpStateDim; ++i) {
        tr.amp.x[i] = static_cast<float>(prev_amp[i]);
        tr.amp.x[kAmpStateDim + i] = static_cast<float>(next_amp[i]);
      }
      for (int i = 0; i < kActionDim; ++i) {
        tr.amp.x[2 * kAmpStateDim + i] = static_cast<float>(sample.u[i]);
      }
      if (use_style) {
        const double d_out = discriminator_forward(disc, tr.amp);
        tr.style_r = style_reward(d_out, cfg.rewards);
      } else {
        tr.style_r = 0.0;
      }
      tr.total_r = total_reward(tr.task_r, tr.style_r);

      const bool done = episode_complete(ctx, state, goal, cfg.rewards);
      const bool timeout = ep_steps >= scfg.episode_steps;
      const bool last = t + 1 == scfg.steps_per_env;
      if (done || timeout || last) {
        tr.seg_end = true;
        std::vector<float> next_obs = privileged_features(state, goal, cfg.sim);
        tr.bootstrap = value_of(value, next_obs, ws);
        if (done || timeout) {
          batch.episodes_finished += 1;
          if (ctx.d_object2goal < goal.success_radius && state.agent.carrying.empty()) {
            batch.successes += 1;
          }
          cursor = (cursor + scfg.envs) % pool.size();
          state = pool[cursor].state;
          goal = pool[cursor].goal;
          ep_steps = 0;
        }
      }
      batch.steps.push_back(std::move(tr));
    }
  }

  for (const Transition& tr : batch.steps) {
    batch.mean_task += tr.task_r;
    batch.mean_style += tr.style_r;
    batch.mean_total += tr.total_r;
    for (int i = 0; i < 8; ++i) batch.term_means[i] += tr.terms[i];
  }
  const double n = static_cast<double>(batch.steps.size());
  if (n > 0) {
    batch.mean_task /= n;
    batch.mean_style /= n;
    batch.mean_total /= n;
    for (auto& v : batch.term_means) v /= n;
  }
  return batch;
}

void compute_gae(RolloutBatch& batch, double gamma, double lam) {
  const int T = batch.steps_per_env;
  for (int env = 0; env < batch.envs; ++env) {
    double gae = 0.0;
    for (int t = T - 1; t >= 0; --t) {
      Transition& tr = batch.steps[static_cast<size_t>(env) * T + t];
      const double v_next =
          tr.seg_end ? tr.bootstrap : batch.steps[static_cast<size_t>(env) * T + t + 1].value;
      const double delta = tr.total_r + gamma * v_next - tr.value;
      gae = delta + gamma * lam * (tr.seg_end ? 0.0 : gae);
      tr.adv = gae;
      tr.ret = tr.adv + tr.value;
    }
  }
}

UpdateStats update_policy(GaussianPolicy& policy, MlpParams& value, RolloutBatch& batch,
                          const StageConfig& scfg, AdamState& policy_opt, AdamVec& log_std_opt,
                          AdamState& value_opt) {
  if (batch.steps.empty()) throw std::invalid_argument("trainer: empty batch");
  const size_t n = batch.steps.size();

  double mean = 0.0;
  for (const auto& tr : batch.steps) mean += tr.adv;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& tr : batch.steps) var += (tr.adv - mean) * (tr.adv - mean);
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  for (auto& tr : batch.steps) tr.adv = (tr.adv - mean) * inv_std;

  UpdateStats stats;
  int minibatches = 0;
  long clip_hits = 0;
  long samples_seen = 0;

  MlpGrads pg, vg;
  pg.match(policy.trunk);
  vg.match(value);
  std::vector<double> lsg(policy.log_std.size(), 0.0);
  MlpWorkspace pws, vws;
  std::vector<double> dmu, dls;

  for (int pe = 0; pe < scfg.ppo_epochs; ++pe) {
    for (size_t start = 0; start < n; start += static_cast<size_t>(scfg.minibatch)) {
      const size_t end = std::min(n, start + static_cast<size_t>(scfg.minibatch));
      const double m = static_cast<double>(end - start);
      pg.zero();
      vg.zero();
      std::fill(lsg.begin(), lsg.end(), 0.0);
      double pl = 0.0, vl = 0.0, kl = 0.0;

      for (size_t i = start; i < end; ++i) {
        Transition& tr = batch.steps[i];
        std::vector<double> obs_d(tr.obs.begin(), tr.obs.end());
        const std::vector<double>& mu = mlp_forward(policy.trunk, obs_d, pws);
        const double new_lp = squashed_log_prob(mu, policy.log_std, tr.z);
        const double log_ratio = clampd(new_lp - tr.log_prob, -20.0, 20.0);
        const double ratio = std::exp(log_ratio);
        const double a = tr.adv;
        const double unclipped = ratio * a;
        const double clipped = clampd(ratio, 1.0 - scfg.clip, 1.0 + scfg.clip) * a;
        pl += -std::min(unclipped, clipped) / m;
        kl += (tr.log_prob - new_lp) / m;
        if (ratio < 1.0 - scfg.clip || ratio > 1.0 + scfg.clip) ++clip_hits;
        ++samples_seen;

        const bool active = (a >= 0.0) ? (ratio <= 1.0 + scfg.clip) : (ratio >= 1.0 - scfg.clip);
        if (active) {
          squashed_log_prob_grad(mu, policy.log_std, tr.z, dmu, dls);
          const double coeff = -a * ratio / m;
          for (auto& g : dmu) g *= coeff;
          mlp_backward(policy.trunk, pws, dmu, pg);
          for (size_t k = 0; k < lsg.size(); ++k) lsg[k] += coeff * dls[k];
        }

        const double v = mlp_forward(value, obs_d, vws)[0];
        const double verr = v - tr.ret;
        vl += 0.5 * verr * verr / m;
        std::vector<double> dv{scfg.vf_coef * verr / m};
        mlp_backward(value, vws, dv, vg);
      }

      if (!std::isfinite(pl) || !std::isfinite(vl)) {
        throw std::runtime_error("training diverged: policy_loss=" + std::to_string(pl) +
                                 " value_loss=" + std::to_string(vl));
      }

      grad_clip_global(pg, &lsg, scfg.max_grad_norm);
      stats.grad_norm += grad_global_norm(pg, &lsg);
      grad_clip_global(vg, nullptr, scfg.max_grad_norm);

      adam_step(policy.trunk, pg, policy_opt, scfg.lr);
      adam_step_vec(policy.log_std, lsg, log_std_opt, scfg.lr);
      clamp_log_std(policy.log_std);
      adam_step(value, vg, value_opt, scfg.lr);

      stats.policy_loss += pl;
      stats.value_loss += vl;
      stats.approx_kl += kl;
      ++minibatches;
    }
  }

  if (minibatches > 0) {
    stats.policy_loss /= minibatches;
    stats.value_loss /= minibatches;
    stats.approx_kl /= minibatches;
    stats.grad_norm /= minibatches;
  }
  stats.clip_frac =
      samples_seen > 0 ? static_cast<double>(clip_hits) / static_cast<double>(samples_seen) : 0.0;
  if (!mlp_finite(policy.trunk) || !mlp_finite(value)) {
    throw std::runtime_error("training diverged: non-finite parameters");
  }
  return stats;
}

TensorMap artifacts_to_tensors(const TrainerArtifacts& a) {
  TensorMap t;
  pack_mlp(t, "policy.trunk", a.policy.trunk);
  pack_vecf(t, "policy.log_std", a.policy.log_std);
  pack_mlp(t, "value", a.value);
  pack_mlp(t, "disc", a.disc);
  pack_adam(t, "opt.policy", a.policy_opt);
  pack_adam_vec(t, "opt.log_std", a.log_std_opt);
  pack_adam(t, "opt.value", a.value_opt);
  pack_scalar(t, "meta.epoch", static_cast<double>(a.epoch));
  return t;
}

TrainerArtifacts artifacts_from_tensors(const TensorMap& t) {
  TrainerArtifacts a;
  a.policy.trunk = unpack_mlp(t, "policy.trunk");
  a.policy.log_std = unpack_vecf(t, "policy.log_std");
  a.value = unpack_mlp(t, "value");
  a.disc = unpack_mlp(t, "disc");
  a.policy_opt = unpack_adam(t, "opt.policy", a.policy.trunk);
  a.log_std_opt = unpack_adam_vec(t, "opt.log_std");
  a.value_opt = unpack_adam(t, "opt.value", a.value);
  a.epoch = static_cast<int>(unpack_scalar(t, "meta.epoch"));
  return a;
}

void save_artifacts(const std::string& path, const TrainerArtifacts& a) {
  save_checkpoint(path, artifacts_to_tensors(a));
}

TrainerArtifacts load_artifacts(const std::string& path) {
  return artifacts_from_tensors(load_checkpoint(path));
}

TrainerArtifacts make_artifacts(int obs_dim, const StageConfig& scfg, const AmpConfig& amp,
                                uint64_t seed) {
  TrainerArtifacts a;
  a.policy = make_policy(obs_dim, kActionDim, scfg.hidden, scfg.hidden_layers, scfg.log_std_init,
                         hash_combine(seed, 1));
  std::vector<int> vsizes;
  vsizes.push_back(obs_dim);
  for (int l = 0; l < scfg.hidden_layers; ++l) vsizes.push_back(scfg.hidden);
  vsizes.push_back(1);
  a.value = make_mlp(vsizes, hash_combine(seed, 2));
  a.disc = make_discriminator(amp, hash_combine(seed, 3));
  a.policy_opt.match(a.policy.trunk);
  a.value_opt.match(a.value);
  a.log_std_opt.m.assign(a.policy.log_std.size(), 0.0f);
  a.log_std_opt.v.assign(a.policy.log_std.size(), 0.0f);
  a.epoch = 0;
  return a;
}

StageRunResult run_stage_core(TrainerArtifacts art, const std::vector<EpisodeStart>& pool,
                              const ReferenceBuffer& ref, const StageConfig& scfg,
                              const Config& cfg, uint64_t seed, std::ostream* log,
                              const std::string& save_path) {
  StageRunResult result;
  TrainerArtifacts last_good = art;
  try {
    for (int epoch = art.epoch; epoch < scfg.epochs; ++epoch) {
      last_good = art;
      RolloutBatch batch = collect_rollouts(art.policy, art.value, art.disc, pool, scfg, cfg,
                                            seed, epoch);
      compute_gae(batch, scfg.gamma, scfg.lam);
      UpdateStats stats = update_policy(art.policy, art.value, batch, scfg, art.policy_opt,
                                        art.log_std_opt, art.value_opt);

      double disc_loss = 0.0;
      int disc_steps = 0;
      if (ref.size() > 0 && cfg.rewards.lambda_amp != 0.0) {
        for (int k = 0; k < cfg.amp.updates_per_epoch; ++k) {
          Rng arng(seed, hash_combine(0xA3D15Cull,
                                      hash_combine(static_cast<uint64_t>(epoch),
                                                   static_cast<uint64_t>(k))));
          std::vector<TransitionPair> ref_batch, pol_batch;
          ref_batch.reserve(cfg.amp.batch);
          pol_batch.reserve(cfg.amp.batch);
          for (int i = 0; i < cfg.amp.batch; ++i) ref_batch.push_back(ref.sample(arng));
          for (int i = 0; i < cfg.amp.batch; ++i) {
            const size_t idx = arng.next_below(static_cast<uint32_t>(batch.steps.size()));
            pol_batch.push_back(batch.steps[idx].amp);
          }
          disc_loss = train_discriminator_step(art.disc, ref_batch, pol_batch, cfg.amp.lr,
                                               cfg.amp.logit_clamp);
          ++disc_steps;
        }
      }

      art.epoch = epoch + 1;
      json line;
      line["epoch"] = epoch;
      line["mean_reward"] = batch.mean_total;
      line["task"] = batch.mean_task;
      line["style"] = batch.mean_style;
      line["terms"] = batch.term_means;
      line["policy_loss"] = stats.policy_loss;
      line["value_loss"] = stats.value_loss;
      line["clip_frac"] = stats.clip_frac;
      line["approx_kl"] = stats.approx_kl;
      line["episodes"] = batch.episodes_finished;
      line["successes"] = batch.successes;
      line["disc_loss"] = disc_steps > 0 ? disc_loss : 0.0;
      result.log_lines.push_back(line.dump());
      if (log) (*log) << result.log_lines.back() << "\n" << std::flush;

      if (!save_path.empty() && (epoch + 1) % 50 == 0) save_artifacts(save_path, art);
    }
  } catch (const std::exception&) {
    if (!save_path.empty()) save_artifacts(save_path, last_good);
    throw;
  }
  result.art = std::move(art);
  if (!save_path.empty()) save_artifacts(save_path, result.art);
  return result;
}

std::vector<EpisodeStart> build_stage1_pool(const std::vector<SingleTask>& singles,
                                            const SimConfig& cfg) {
  std::vector<EpisodeStart> pool;
  pool.reserve(singles.size());
  for (const SingleTask& s : singles) {
    EpisodeStart e;
    const uint64_t seed = hash_combine(hash_str(0x57A27u, s.task.id.c_str()),
                                       static_cast<uint64_t>(s.sub_task_index));
    e.state = reset(s.task, s.sub_task_index, seed, s.initial_agent, cfg);
    e.goal = s.task.sub_tasks[s.sub_task_index].goal;
    e.task_id = s.task.id;
    pool.push_back(std::move(e));
  }
  return pool;
}

EpisodeStart build_stage2_start(const SingleTask& single, int variant, const SimConfig& cfg) {
  const int idx = single.sub_task_index;
  const GoalSpec& goal = single.task.sub_tasks[idx].goal;
  const uint64_t seed = hash_combine(hash_str(0x57A6E2u, single.task.id.c_str()),
                                     hash_combine(static_cast<uint64_t>(idx),
                                                  static_cast<uint64_t>(variant)));
  EpisodeStart e;
  e.state = reset(single.task, idx, seed, std::nullopt, cfg);
  e.goal = goal;
  e.task_id = single.task.id;

  SimState& st = e.state;
  SceneObject* obj = find_object(st, goal.object_id);
  Rng rng(seed, 0x57A6E2u);

  // Object just inside the placement band.
  const double r_off = rng.uniform(0.0, 0.2);
  const double th = rng.uniform(-std::numbers::pi, std::numbers::pi);
  obj->pose.x = goal.pose.x + r_off * std::cos(th);
  obj->pose.y = goal.pose.y + r_off * std::sin(th);
  obj->pose.yaw = wrap_angle(goal.pose.yaw + rng.uniform(-0.2, 0.2));
  obj->vel = {0.0, 0.0, 0.0};

  // Agent adjacent, at the first collision-free bearing.
  const double base = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const bool carrying = variant % 2 == 1;
  const double stand_off = carrying ? 0.45 : 0.55;
  Vec2 root = obj->pose.xy();
  double yaw = 0.0;
  for (int k = 0; k < 12; ++k) {
    const double psi = wrap_angle(base + k * (std::numbers::pi / 6.0));
    const Vec2 cand = obj->pose.xy() - Vec2{std::cos(psi), std::sin(psi)} * stand_off;
    if (!st.bounds.contains(cand, 0.35)) continue;
    bool clear = true;
    for (const auto& ob : st.obstacles) {
      if ((cand - ob.center).norm() < ob.radius + 0.35) clear = false;
    }
    if (!clear) continue;
    root = cand;
    yaw = psi;
    break;
  }
  AgentState& a = st.agent;
  a.root.x = root.x;
  a.root.y = root.y;
  a.root.yaw = yaw;  // facing the object
  a.root_vel = {0.0, 0.0};

  const Vec2 side = rotate(Vec2{0.0, 0.16}, yaw);
  if (carrying) {
    a.standing = true;
    a.carrying = obj->id;
    a.carry_yaw_offset = wrap_angle(obj->pose.yaw - yaw);
    const double lift_goal = clampd((goal.pose.z - obj->z_init) / cfg.carry_height, 0.0, 1.0);
    obj->pose.z = obj->z_init + lift_goal * cfg.carry_height;
    a.hand_left = {obj->pose.x + side.x, obj->pose.y + side.y, cfg.torso_height - 0.15};
    a.hand_right = {obj->pose.x - side.x, obj->pose.y - side.y, cfg.torso_height - 0.15};
  } else {
    a.standing = false;  // just released
    a.stand_progress = 0;
    a.carrying.clear();
    obj->pose.z = goal.pose.z;
    const Vec2 fwd = rotate(Vec2{0.35, 0.0}, yaw);
    a.hand_left = {a.root.x + fwd.x + side.x, a.root.y + fwd.y + side.y, 0.5};
    a.hand_right = {a.root.x + fwd.x - side.x, a.root.y + fwd.y - side.y, 0.5};
  }
  // The transport is over; the guide polyline is behind the object.
  st.guide_progress[idx] = static_cast<int>(goal.guides.size());
  return e;
}

std::vector<EpisodeStart> build_stage2_pool(const std::vector<SingleTask>& singles,
                                            const SimConfig& cfg) {
  std::vector<EpisodeStart> pool;
  pool.reserve(singles.size() * 2);
  for (const SingleTask& s : singles) {
    pool.push_back(build_stage2_start(s, 0, cfg));
    pool.push_back(build_stage2_start(s, 1, cfg));
  }
  return pool;
}

std::vector<EpisodeStart> build_stage3_pool(const std::vector<TaskSpec>& tasks,
                                            const GaussianPolicy& teacher1, const Config& cfg,
                                            Stage3PoolStats* stats) {
  if (tasks.empty()) throw std::invalid_argument("trainer: empty task list");
  std::vector<EpisodeStart> pool;
  Stage3PoolStats local;
  local.tasks = static_cast<int>(tasks.size());
  const SwitchThresholds& th = cfg.dagger.thresholds;

  for (const TaskSpec& task : tasks) {
    const GoalSpec& goal0 = task.sub_tasks[0].goal;
    SimState state = reset(task, 0, hash_str(0x57A6E3u, task.id.c_str()), std::nullopt, cfg.sim);
    bool fired = false;
    for (int t = 0; t < cfg.eval.episode_cap && !fired; ++t) {
      std::vector<float> obs = privileged_features(state, goal0, cfg.sim);
      std::vector<double> obs_d(obs.begin(), obs.end());
      const std::vector<double> u = mean_action(teacher1, obs_d);
      step_mut(state, decode_action(u, cfg.sim), cfg.sim.dt, cfg.sim);

      const SceneObject* obj = find_object(state, goal0.object_id);
      const double s = obj ? obj->vel.norm() : 0.0;
      const double d = obj ? (obj->pose.xy() - goal0.pose.xy()).norm() : 1e9;
      const double r = obj ? (state.agent.root.xy() - obj->pose.xy()).norm() : 0.0;
      const int p = static_cast<int>(state.step_count);
      if (s < th.speed && d < th.success && r > th.distance && p > th.time_steps) fired = true;
    }
    if (!fired) continue;
    local.reached += 1;
    if (!state.agent.standing) local.standing_false += 1;
    state.active_goal = 1;
    EpisodeStart e;
    e.state = std::move(state);
    e.goal = task.sub_tasks[1].goal;
    e.task_id = task.id;
    pool.push_back(std::move(e));
  }
  if (stats) *stats = local;
  if (local.reached * 2 < local.tasks) {
    throw std::runtime_error("stage-3 precondition unmet: model 1 reached a switch state on " +
                             std::to_string(local.reached) + "/" + std::to_string(local.tasks) +
                             " tasks");
  }
  return pool;
}

StageRunResult run_stage1(const std::vector<SingleTask>& singles, const Config& cfg,
                          uint64_t seed, const TrainerArtifacts* resume, std::ostream* log,
                          const std::string& save_path) {
  if (singles.empty()) throw std::invalid_argument("trainer: empty single-task list");
  const int obs_dim = privileged_feature_dim(cfg.sim);
  TrainerArtifacts art =
      resume ? *resume : make_artifacts(obs_dim, cfg.stages.stage1, cfg.amp, hash_combine(seed, 0x1));
  std::vector<EpisodeStart> pool = build_stage1_pool(singles, cfg.sim);
  ReferenceBuffer ref = collect_reference(singles, cfg.amp.ref_transitions,
                                          hash_combine(seed, 0x2EFu), cfg.sim, cfg.rewards,
                                          cfg.stages.stage1.episode_steps);
  return run_stage_core(std::move(art), pool, ref, cfg.stages.stage1, cfg, seed, log, save_path);
}

StageRunResult run_stage2(const TrainerArtifacts& stage1, const std::vector<SingleTask>& singles,
                          const Config& cfg, uint64_t seed, std::ostream* log,
                          const std::string& save_path, const TrainerArtifacts* resume) {
  if (singles.empty()) throw std::invalid_argument("trainer: empty single-task list");
  TrainerArtifacts art = resume ? *resume : stage1;
  if (!resume) {
    art.epoch = 0;
    art.policy_opt.match(art.policy.trunk);
    art.value_opt.match(art.value);
    art.log_std_opt = AdamVec{};
    art.log_std_opt.m.assign(art.policy.log_std.size(), 0.0f);
    art.log_std_opt.v.assign(art.policy.log_std.size(), 0.0f);
  }

  StageConfig scfg = cfg.stages.stage2;
  scfg.reward_mode = RewardMode::kStage2;
  std::vector<EpisodeStart> pool = build_stage2_pool(singles, cfg.sim);
  ReferenceBuffer ref = collect_reference(singles, cfg.amp.ref_transitions,
                                          hash_combine(seed, 0x2EFu), cfg.sim, cfg.rewards,
                                          cfg.stages.stage1.episode_steps);
  return run_stage_core(std::move(art), pool, ref, scfg, cfg, seed, log, save_path);
}

StageRunResult run_stage3(const TrainerArtifacts& teacher1_stage2,
                          const TrainerArtifacts& stage1_pretrain,
                          const std::vector<TaskSpec>& tasks, const Config& cfg, uint64_t seed,
                          std::ostream* log, const std::string& save_path,
                          const TrainerArtifacts* resume) {
  Stage3PoolStats stats;
  std::vector<EpisodeStart> pool = build_stage3_pool(tasks, teacher1_stage2.policy, cfg, &stats);

  TrainerArtifacts art = resume ? *resume : stage1_pretrain;
  if (!resume) {
    art.epoch = 0;
    art.policy_opt.match(art.policy.trunk);
    art.value_opt.match(art.value);
    art.log_std_opt = AdamVec{};
    art.log_std_opt.m.assign(art.policy.log_std.size(), 0.0f);
    art.log_std_opt.v.assign(art.policy.log_std.size(), 0.0f);
  }

  std::vector<SingleTask> singles = split_pretraining(tasks);
  ReferenceBuffer ref = collect_reference(singles, cfg.amp.ref_transitions,
                                          hash_combine(seed, 0x2EFu), cfg.sim, cfg.rewards,
                                          cfg.stages.stage1.episode_steps);

  if (log) {
    json line;
    line["stage3_pool_tasks"] = stats.tasks;
    line["stage3_pool_reached"] = stats.reached;
    line["stage3_pool_bent"] = stats.standing_false;
    (*log) << line.dump() << "\n" << std::flush;
  }
  StageConfig scfg = cfg.stages.stage3;
  scfg.reward_mode = RewardMode::kTaskAndStyle;
  return run_stage_core(std::move(art), pool, ref, scfg, cfg, seed, log, save_path);
}

}  // namespace hvrs
