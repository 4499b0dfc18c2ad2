#include "hvrs/amp.hpp"

#include <cmath>
#include <stdexcept>

#include "hvrs/oracle.hpp"
#include "hvrs/policy.hpp"

namespace hvrs {

namespace {

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::array<double, kAmpStateDim> amp_state_features(const SimState& s) {
  const AgentState& a = s.agent;
  std::array<double, kAmpStateDim> f{};
  const Vec2 v = rotate_inv(a.root_vel, a.root.yaw);
  f[0] = v.x;
  f[1] = v.y;
  const Vec3 torso{a.root.x, a.root.y, a.root.z};
  const Vec3 l = rotate_inv(a.hand_left - torso, a.root.yaw);
  const Vec3 r = rotate_inv(a.hand_right - torso, a.root.yaw);
  f[2] = l.x;
  f[3] = l.y;
  f[4] = l.z;
  f[5] = r.x;
  f[6] = r.y;
  f[7] = r.z;
  f[8] = a.standing ? 1.0 : 0.0;
  f[9] = a.carrying.empty() ? 0.0 : 1.0;
  return f;
}

TransitionPair make_transition_pair(const SimState& prev, const SimState& next,
                                    const std::vector<double>& action_u) {
  if (static_cast<int>(action_u.size()) != kActionDim) {
    throw std::invalid_argument("amp: action vector size mismatch");
  }
  TransitionPair p;
  const auto s0 = amp_state_features(prev);
  const auto s1 = amp_state_features(next);
  for (int i = 0; i < kAmpStateDim; ++i) {
    p.x[i] = static_cast<float>(s0[i]);
    p.x[kAmpStateDim + i] = static_cast<float>(s1[i]);
  }
  for (int i = 0; i < kActionDim; ++i) {
    p.x[2 * kAmpStateDim + i] = static_cast<float>(action_u[i]);
  }
  return p;
}

MlpParams make_discriminator(const AmpConfig& cfg, uint64_t seed) {
  std::vector<int> sizes;
  sizes.push_back(kAmpPairDim);
  for (int l = 0; l < cfg.hidden_layers; ++l) sizes.push_back(cfg.hidden);
  sizes.push_back(1);
  return make_mlp(sizes, seed);
}

double discriminator_logit(const MlpParams& d, const TransitionPair& pair) {
  std::vector<double> in(pair.x.begin(), pair.x.end());
  return mlp_forward(d, in)[0];
}

double discriminator_forward(const MlpParams& d, const TransitionPair& pair) {
  double p = sigmoid(discriminator_logit(d, pair));
  // Keep strictly inside (0, 1) so downstream logs stay finite.
  const double eps = 1e-12;
  return clampd(p, eps, 1.0 - eps);
}

void ReferenceBuffer::add(const TransitionPair& p) {
  if (capacity == 0) return;
  if (items.size() < capacity) {
    items.push_back(p);
  } else {
    items[next] = p;
    next = (next + 1) % capacity;
  }
}

const TransitionPair& ReferenceBuffer::sample(Rng& rng) const {
  if (items.empty()) throw std::runtime_error("amp: reference buffer is empty");
  return items[rng.next_below(static_cast<uint32_t>(items.size()))];
}

double train_discriminator_step(MlpParams& d, const std::vector<TransitionPair>& ref_batch,
                                const std::vector<TransitionPair>& policy_batch, double lr,
                                double logit_clamp) {
  if (ref_batch.empty() || policy_batch.empty()) {
    throw std::invalid_argument("amp: empty discriminator batch");
  }
  MlpGrads g;
  g.match(d);
  MlpWorkspace ws;
  double loss = 0.0;

  auto accumulate = [&](const TransitionPair& pair, bool is_ref, double weight) {
    std::vector<double> in(pair.x.begin(), pair.x.end());
    const double logit = mlp_forward(d, in, ws)[0];
    const double lc = clampd(logit, -logit_clamp, logit_clamp);
    const bool clipped = logit != lc;
    if (is_ref) {
      loss += weight * softplus(-lc);
    } else {
      loss += weight * softplus(lc);
    }
    if (!clipped) {
      const double dl = is_ref ? (sigmoid(lc) - 1.0) : sigmoid(lc);
      std::vector<double> dout{weight * dl};
      mlp_backward(d, ws, dout, g);
    }
  };

  const double wr = 0.5 / static_cast<double>(ref_batch.size());
  const double wp = 0.5 / static_cast<double>(policy_batch.size());
  for (const auto& pair : ref_batch) accumulate(pair, true, wr);
  for (const auto& pair : policy_batch) accumulate(pair, false, wp);

  for (size_t l = 0; l < d.w.size(); ++l) {
    for (size_t i = 0; i < d.w[l].size(); ++i) {
      d.w[l][i] = static_cast<float>(static_cast<double>(d.w[l][i]) - lr * g.w[l][i]);
    }
    for (size_t i = 0; i < d.b[l].size(); ++i) {
      d.b[l][i] = static_cast<float>(static_cast<double>(d.b[l][i]) - lr * g.b[l][i]);
    }
  }
  return loss;
}

ReferenceBuffer collect_reference(const std::vector<SingleTask>& tasks, int n_transitions,
                                  uint64_t seed, const SimConfig& scfg, const RewardConfig& rcfg,
                                  int episode_cap) {
  ReferenceBuffer buf;
  buf.capacity = static_cast<size_t>(std::max(n_transitions, 0));
  if (buf.capacity == 0) return buf;  // sampling it reports the empty-buffer error
  if (tasks.empty()) throw std::runtime_error("no reference motion");

  bool any_success = false;
  for (int cycle = 0; cycle < 3 && buf.size() < buf.capacity; ++cycle) {
    for (size_t idx = 0; idx < tasks.size() && buf.size() < buf.capacity; ++idx) {
      const SingleTask& single = tasks[idx];
      const GoalSpec& goal = single.task.sub_tasks[single.sub_task_index].goal;
      const uint64_t ep_seed =
          hash_combine(seed, hash_combine(static_cast<uint64_t>(cycle), idx));
      SimState state = reset(single.task, single.sub_task_index, ep_seed, single.initial_agent,
                             scfg);
      std::vector<TransitionPair> pending;
      bool success = false;
      for (int t = 0; t < episode_cap; ++t) {
        const ActionCommand cmd = scripted_oracle(state, goal, scfg, rcfg);
        const std::vector<double> u = encode_action(cmd, scfg);
        const SimState prev = state;
        step_mut(state, cmd, scfg.dt, scfg);
        pending.push_back(make_transition_pair(prev, state, u));
        const RewardContext ctx = distances(state, goal);
        if (ctx.d_object2goal < goal.success_radius && state.agent.carrying.empty() &&
            ctx.d_robot2object >= rcfg.stage2_robot_cap &&
            ctx.d_hand2object >= rcfg.stage2_hand_cap) {
          success = true;
          break;
        }
      }
      if (success) {
        any_success = true;
        for (const auto& pair : pending) {
          if (buf.size() >= buf.capacity) break;
          buf.add(pair);
        }
      }
    }
    if (cycle == 0 && !any_success) throw std::runtime_error("no reference motion");
  }
  return buf;
}

}  // namespace hvrs
