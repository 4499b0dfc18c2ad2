#include "hvrs/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hvrs {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

// log(1 - tanh(z)^2), evaluated without cancellation for large |z|.
double log_one_minus_tanh_sq(double z) {
  return 2.0 * (std::numbers::ln2 - z - softplus(-2.0 * z));
}

}  // namespace

GaussianPolicy make_policy(int obs_dim, int action_dim, int hidden, int hidden_layers,
                           double log_std_init, uint64_t seed) {
  std::vector<int> sizes;
  sizes.push_back(obs_dim);
  for (int l = 0; l < hidden_layers; ++l) sizes.push_back(hidden);
  sizes.push_back(action_dim);
  GaussianPolicy p;
  p.trunk = make_mlp(sizes, seed);
  p.log_std.assign(action_dim, static_cast<float>(log_std_init));
  clamp_log_std(p.log_std);
  return p;
}

void clamp_log_std(std::vector<float>& log_std) {
  for (float& v : log_std) {
    if (v < kLogStdMin) v = static_cast<float>(kLogStdMin);
    if (v > kLogStdMax) v = static_cast<float>(kLogStdMax);
  }
}

double squashed_log_prob(const std::vector<double>& mu, const std::vector<float>& log_std,
                         const std::vector<double>& z) {
  if (mu.size() != z.size() || mu.size() != log_std.size()) {
    throw std::invalid_argument("policy: log_prob dimension mismatch");
  }
  double lp = 0.0;
  for (size_t i = 0; i < mu.size(); ++i) {
    double ls = static_cast<double>(log_std[i]);
    double sigma = std::exp(ls);
    double d = (z[i] - mu[i]) / sigma;
    lp += -0.5 * d * d - ls - 0.5 * kLog2Pi;
    lp -= log_one_minus_tanh_sq(z[i]);
  }
  return lp;
}

void squashed_log_prob_grad(const std::vector<double>& mu, const std::vector<float>& log_std,
                            const std::vector<double>& z, std::vector<double>& dmu,
                            std::vector<double>& dlog_std) {
  dmu.assign(mu.size(), 0.0);
  dlog_std.assign(mu.size(), 0.0);
  for (size_t i = 0; i < mu.size(); ++i) {
    double sigma = std::exp(static_cast<double>(log_std[i]));
    double d = (z[i] - mu[i]) / sigma;
    dmu[i] = d / sigma;
    dlog_std[i] = d * d - 1.0;
  }
}

ActionSample sample_action(const GaussianPolicy& p, const std::vector<double>& obs, Rng& rng) {
  std::vector<double> mu = mlp_forward(p.trunk, obs);
  ActionSample s;
  s.z.resize(mu.size());
  s.u.resize(mu.size());
  for (size_t i = 0; i < mu.size(); ++i) {
    double sigma = std::exp(static_cast<double>(p.log_std[i]));
    s.z[i] = mu[i] + sigma * rng.normal();
    s.u[i] = std::tanh(s.z[i]);
  }
  s.log_prob = squashed_log_prob(mu, p.log_std, s.z);
  return s;
}

std::vector<double> mean_action(const GaussianPolicy& p, const std::vector<double>& obs) {
  std::vector<double> mu = mlp_forward(p.trunk, obs);
  for (double& v : mu) v = std::tanh(v);
  return mu;
}

ActionCommand decode_action(const std::vector<double>& u, const SimConfig& cfg) {
  if (static_cast<int>(u.size()) != kActionDim) {
    throw std::invalid_argument("policy: action vector must have " + std::to_string(kActionDim) +
                                " entries");
  }
  ActionCommand cmd;
  cmd.root_vel_cmd = Vec2{u[0] * cfg.v_max, u[1] * cfg.v_max};
  cmd.yaw_rate_cmd = u[2] * cfg.yaw_rate_max;
  cmd.hand_offset_left = Vec3{u[3] * cfg.reach_radius, u[4] * cfg.reach_radius,
                              u[5] * cfg.reach_radius};
  cmd.hand_offset_right = Vec3{u[6] * cfg.reach_radius, u[7] * cfg.reach_radius,
                               u[8] * cfg.reach_radius};
  cmd.grasp = u[9] > 0.0;
  cmd.lift = clampd((u[10] + 1.0) * 0.5, 0.0, 1.0);
  return cmd;
}

std::vector<double> encode_action(const ActionCommand& cmd, const SimConfig& cfg) {
  auto unit = [](double v, double scale) { return clampd(v / scale, -1.0, 1.0); };
  std::vector<double> u(kActionDim, 0.0);
  u[0] = unit(cmd.root_vel_cmd.x, cfg.v_max);
  u[1] = unit(cmd.root_vel_cmd.y, cfg.v_max);
  u[2] = unit(cmd.yaw_rate_cmd, cfg.yaw_rate_max);
  u[3] = unit(cmd.hand_offset_left.x, cfg.reach_radius);
  u[4] = unit(cmd.hand_offset_left.y, cfg.reach_radius);
  u[5] = unit(cmd.hand_offset_left.z, cfg.reach_radius);
  u[6] = unit(cmd.hand_offset_right.x, cfg.reach_radius);
  u[7] = unit(cmd.hand_offset_right.y, cfg.reach_radius);
  u[8] = unit(cmd.hand_offset_right.z, cfg.reach_radius);
  u[9] = cmd.grasp ? 0.9 : -0.9;
  u[10] = clampd(2.0 * cmd.lift - 1.0, -1.0, 1.0);
  return u;
}

std::vector<double> to_double(const std::vector<float>& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
  return out;
}

}  // namespace hvrs
