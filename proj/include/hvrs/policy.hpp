#pragma once

#include <vector>

#include "hvrs/mlp.hpp"
#include "hvrs/rng.hpp"
#include "hvrs/sim.hpp"

namespace hvrs {

constexpr double kLogStdMin = -4.0;
constexpr double kLogStdMax = 1.0;

// Diagonal Gaussian over a pre-squash variable z; emitted actions are
// u = tanh(z) with the exact change-of-variables log-prob correction.
struct GaussianPolicy {
  MlpParams trunk;             // obs -> pre-squash mean
  std::vector<float> log_std;  // per action dim, clamped to [kLogStdMin, kLogStdMax]

  int obs_dim() const { return trunk.in_dim(); }
  int action_dim() const { return trunk.out_dim(); }
};

GaussianPolicy make_policy(int obs_dim, int action_dim, int hidden, int hidden_layers,
                           double log_std_init, uint64_t seed);

struct ActionSample {
  std::vector<double> z;  // pre-squash draw
  std::vector<double> u;  // tanh(z)
  double log_prob = 0.0;  // exact density of u
};

ActionSample sample_action(const GaussianPolicy& p, const std::vector<double>& obs, Rng& rng);
// tanh of the trunk mean (deterministic control).
std::vector<double> mean_action(const GaussianPolicy& p, const std::vector<double>& obs);

// log pi(u | mu, std) evaluated at a stored pre-squash z, including the
// -sum log(1 - tanh(z)^2) correction.
double squashed_log_prob(const std::vector<double>& mu, const std::vector<float>& log_std,
                         const std::vector<double>& z);
// Partials of squashed_log_prob at fixed z: d/dmu and d/dlog_std.
void squashed_log_prob_grad(const std::vector<double>& mu, const std::vector<float>& log_std,
                            const std::vector<double>& z, std::vector<double>& dmu,
                            std::vector<double>& dlog_std);

void clamp_log_std(std::vector<float>& log_std);

// Maps a squashed action vector u in [-1,1]^kActionDim to simulator units and
// back. decode(encode(cmd)) == cmd whenever cmd is within command ranges.
ActionCommand decode_action(const std::vector<double>& u, const SimConfig& cfg);
std::vector<double> encode_action(const ActionCommand& cmd, const SimConfig& cfg);

std::vector<double> to_double(const std::vector<float>& v);

}  // namespace hvrs
