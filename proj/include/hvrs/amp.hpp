#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hvrs/mlp.hpp"
#include "hvrs/rng.hpp"
#include "hvrs/sim.hpp"

namespace hvrs {

// Agent-centric motion features for one state:
//   0-1 root velocity (agent frame)
//   2-4 left hand - torso (agent frame)
//   5-7 right hand - torso (agent frame)
//   8   standing flag
//   9   carrying-anything flag
constexpr int kAmpStateDim = 10;
// Discriminator input: s_t, s_t+1, then the squashed action a_t.
constexpr int kAmpPairDim = 2 * kAmpStateDim + kActionDim;

std::array<double, kAmpStateDim> amp_state_features(const SimState& s);

struct TransitionPair {
  std::array<float, kAmpPairDim> x{};
};

TransitionPair make_transition_pair(const SimState& prev, const SimState& next,
                                    const std::vector<double>& action_u);

// kAmpPairDim -> hidden tanh stack -> 1 logit.
MlpParams make_discriminator(const AmpConfig& cfg, uint64_t seed);
double discriminator_logit(const MlpParams& d, const TransitionPair& pair);
// sigmoid(logit), strictly inside (0, 1).
double discriminator_forward(const MlpParams& d, const TransitionPair& pair);

struct ReferenceBuffer {
  std::vector<TransitionPair> items;
  size_t capacity = 0;
  size_t next = 0;  // ring write position once full

  void add(const TransitionPair& p);
  const TransitionPair& sample(Rng& rng) const;  // throws when empty
  size_t size() const { return items.size(); }
};

// One binary cross-entropy step (reference -> 1, policy -> 0) by plain
// gradient descent, logits clamped to +-logit_clamp. Returns the loss.
double train_discriminator_step(MlpParams& d, const std::vector<TransitionPair>& ref_batch,
                                const std::vector<TransitionPair>& policy_batch, double lr,
                                double logit_clamp);

// Rolls the scripted oracle over the single-task set and stores transitions
// from successful episodes until n_transitions are collected. Throws
// "no reference motion" if the oracle fails every task.
ReferenceBuffer collect_reference(const std::vector<SingleTask>& tasks, int n_transitions,
                                  uint64_t seed, const SimConfig& scfg, const RewardConfig& rcfg,
                                  int episode_cap);

}  // namespace hvrs
