#include "hvrs/mlp.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "hvrs/rng.hpp"

namespace hvrs {

MlpParams make_mlp(const std::vector<int>& sizes, uint64_t seed) {
  if (sizes.size() < 2) throw std::invalid_argument("mlp: need at least input and output sizes");
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("mlp: nonpositive layer size");
  }
  MlpParams p;
  p.sizes = sizes;
  int layers = static_cast<int>(sizes.size()) - 1;
  p.w.resize(layers);
  p.b.resize(layers);
  for (int l = 0; l < layers; ++l) {
    int fan_in = sizes[l];
    int fan_out = sizes[l + 1];
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Rng rng(seed, hash_combine(0x6d6c7031u, static_cast<uint64_t>(l)));
    p.w[l].resize(static_cast<size_t>(fan_in) * fan_out);
    for (auto& v : p.w[l]) v = static_cast<float>(rng.uniform(-limit, limit));
    p.b[l].assign(fan_out, 0.0f);
  }
  return p;
}

bool mlp_finite(const MlpParams& p) {
  for (const auto& layer : p.w) {
    for (float v : layer) {
      if (!std::isfinite(v)) return false;
    }
  }
  for (const auto& layer : p.b) {
    for (float v : layer) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

uint64_t mlp_hash(const MlpParams& p) {
  uint64_t h = 1469598103934665603ull;
  auto mix_bytes = [&h](const void* data, size_t n) {
    const unsigned char* bytes = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (int s : p.sizes) mix_bytes(&s, sizeof(s));
  for (const auto& layer : p.w) mix_bytes(layer.data(), layer.size() * sizeof(float));
  for (const auto& layer : p.b) mix_bytes(layer.data(), layer.size() * sizeof(float));
  return h;
}

const std::vector<double>& mlp_forward(const MlpParams& p, const std::vector<double>& input,
                                       MlpWorkspace& ws) {
  int layers = p.layers();
  if (static_cast<int>(input.size()) != p.in_dim()) {
    throw std::invalid_argument("mlp: input size " + std::to_string(input.size()) +
                                " does not match first layer " + std::to_string(p.in_dim()));
  }
  ws.acts.resize(layers + 1);
  ws.acts[0] = input;
  for (int l = 0; l < layers; ++l) {
    int in = p.sizes[l];
    int out = p.sizes[l + 1];
    const std::vector<double>& a = ws.acts[l];
    std::vector<double>& y = ws.acts[l + 1];
    y.assign(out, 0.0);
    const float* wl = p.w[l].data();
    for (int i = 0; i < out; ++i) {
      double acc = static_cast<double>(p.b[l][i]);
      const float* row = wl + static_cast<size_t>(i) * in;
      for (int j = 0; j < in; ++j) acc += static_cast<double>(row[j]) * a[j];
      y[i] = (l + 1 < layers) ? std::tanh(acc) : acc;
    }
  }
  return ws.acts.back();
}

std::vector<double> mlp_forward(const MlpParams& p, const std::vector<double>& input) {
  MlpWorkspace ws;
  return mlp_forward(p, input, ws);
}

void MlpGrads::match(const MlpParams& p) {
  w.resize(p.w.size());
  b.resize(p.b.size());
  for (size_t l = 0; l < p.w.size(); ++l) {
    w[l].assign(p.w[l].size(), 0.0);
    b[l].assign(p.b[l].size(), 0.0);
  }
}

void MlpGrads::zero() {
  for (auto& layer : w) std::fill(layer.begin(), layer.end(), 0.0);
  for (auto& layer : b) std::fill(layer.begin(), layer.end(), 0.0);
}

double MlpGrads::sq_norm() const {
  double s = 0.0;
  for (const auto& layer : w) {
    for (double v : layer) s += v * v;
  }
  for (const auto& layer : b) {
    for (double v : layer) s += v * v;
  }
  return s;
}

void MlpGrads::scale(double s) {
  for (auto& layer : w) {
    for (double& v : layer) v *= s;
  }
  for (auto& layer : b) {
    for (double& v : layer) v *= s;
  }
}

std::vector<double> mlp_backward(const MlpParams& p, const MlpWorkspace& ws,
                                 const std::vector<double>& dout, MlpGrads& g) {
  int layers = p.layers();
  if (static_cast<int>(ws.acts.size()) != layers + 1) {
    throw std::invalid_argument("mlp: workspace does not match a forward pass");
  }
  if (static_cast<int>(dout.size()) != p.out_dim()) {
    throw std::invalid_argument("mlp: dout size mismatch");
  }
  if (g.w.size() != p.w.size()) g.match(p);

  std::vector<double> delta = dout;
  for (int l = layers - 1; l >= 0; --l) {
    int in = p.sizes[l];
    int out = p.sizes[l + 1];
    const std::vector<double>& a = ws.acts[l];
    const float* wl = p.w[l].data();
    double* gw = g.w[l].data();
    for (int i = 0; i < out; ++i) {
      double d = delta[i];
      g.b[l][i] += d;
      double* grow = gw + static_cast<size_t>(i) * in;
      for (int j = 0; j < in; ++j) grow[j] += d * a[j];
    }
    std::vector<double> prev(in, 0.0);
    for (int i = 0; i < out; ++i) {
      double d = delta[i];
      const float* row = wl + static_cast<size_t>(i) * in;
      for (int j = 0; j < in; ++j) prev[j] += static_cast<double>(row[j]) * d;
    }
    if (l > 0) {
      // acts[l] = tanh(pre), so dtanh = 1 - acts[l]^2.
      for (int j = 0; j < in; ++j) prev[j] *= 1.0 - a[j] * a[j];
    }
    delta = std::move(prev);
  }
  return delta;
}

void AdamState::match(const MlpParams& p) {
  mw.resize(p.w.size());
  vw.resize(p.w.size());
  mb.resize(p.b.size());
  vb.resize(p.b.size());
  for (size_t l = 0; l < p.w.size(); ++l) {
    mw[l].assign(p.w[l].size(), 0.0f);
    vw[l].assign(p.w[l].size(), 0.0f);
    mb[l].assign(p.b[l].size(), 0.0f);
    vb[l].assign(p.b[l].size(), 0.0f);
  }
  t = 0;
}

namespace {

void adam_update(float* param, const double* grad, float* m, float* v, size_t n, double lr,
                 double beta1, double beta2, double eps, double bc1, double bc2) {
  for (size_t i = 0; i < n; ++i) {
    double gi = grad[i];
    double mi = beta1 * static_cast<double>(m[i]) + (1.0 - beta1) * gi;
    double vi = beta2 * static_cast<double>(v[i]) + (1.0 - beta2) * gi * gi;
    m[i] = static_cast<float>(mi);
    v[i] = static_cast<float>(vi);
    double mhat = mi / bc1;
    double vhat = vi / bc2;
    param[i] = static_cast<float>(static_cast<double>(param[i]) -
                                  lr * mhat / (std::sqrt(vhat) + eps));
  }
}

}  // namespace

void adam_step(MlpParams& p, const MlpGrads& g, AdamState& s, double lr, double beta1,
               double beta2, double eps) {
  if (s.mw.size() != p.w.size()) s.match(p);
  s.t += 1;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(s.t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(s.t));
  for (size_t l = 0; l < p.w.size(); ++l) {
    adam_update(p.w[l].data(), g.w[l].data(), s.mw[l].data(), s.vw[l].data(), p.w[l].size(), lr,
                beta1, beta2, eps, bc1, bc2);
    adam_update(p.b[l].data(), g.b[l].data(), s.mb[l].data(), s.vb[l].data(), p.b[l].size(), lr,
                beta1, beta2, eps, bc1, bc2);
  }
}

void adam_step_vec(std::vector<float>& param, const std::vector<double>& grad, AdamVec& s,
                   double lr, double beta1, double beta2, double eps) {
  if (s.m.size() != param.size()) {
    s.m.assign(param.size(), 0.0f);
    s.v.assign(param.size(), 0.0f);
    s.t = 0;
  }
  s.t += 1;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(s.t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(s.t));
  adam_update(param.data(), grad.data(), s.m.data(), s.v.data(), param.size(), lr, beta1, beta2,
              eps, bc1, bc2);
}

double grad_global_norm(const MlpGrads& g, const std::vector<double>* extra) {
  double s = g.sq_norm();
  if (extra) {
    for (double v : *extra) s += v * v;
  }
  return std::sqrt(s);
}

void grad_clip_global(MlpGrads& g, std::vector<double>* extra, double max_norm) {
  double norm = grad_global_norm(g, extra);
  if (norm <= max_norm || norm == 0.0) return;
  double s = max_norm / norm;
  g.scale(s);
  if (extra) {
    for (double& v : *extra) v *= s;
  }
}

}  // namespace hvrs
