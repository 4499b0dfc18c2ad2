#pragma once

#include <cstdint>
#include <vector>

namespace hvrs {

// Fully connected stack: tanh on every hidden layer, linear output.
// Parameters are stored as 32-bit floats; every forward/backward/optimizer
// computation runs in double with one rounding back to float per value, so
// analytic gradients survive 1e-4 finite-difference checks.
struct MlpParams {
  std::vector<int> sizes;             // [in, hidden..., out]
  std::vector<std::vector<float>> w;  // w[l]: sizes[l+1] x sizes[l], row-major
  std::vector<std::vector<float>> b;  // b[l]: sizes[l+1]

  int layers() const { return static_cast<int>(w.size()); }
  int in_dim() const { return sizes.front(); }
  int out_dim() const { return sizes.back(); }
};

// Xavier-uniform weights, zero biases, deterministic in seed.
MlpParams make_mlp(const std::vector<int>& sizes, uint64_t seed);

bool mlp_finite(const MlpParams& p);
// FNV-style content hash, used by stage-isolation checks.
uint64_t mlp_hash(const MlpParams& p);

struct MlpWorkspace {
  // acts[0] is the input, acts[l+1] the (activated) output of layer l.
  std::vector<std::vector<double>> acts;
};

// Returns a reference to ws.acts.back(). Throws on input size mismatch.
const std::vector<double>& mlp_forward(const MlpParams& p, const std::vector<double>& input,
                                       MlpWorkspace& ws);
// Convenience: allocate a private workspace.
std::vector<double> mlp_forward(const MlpParams& p, const std::vector<double>& input);

struct MlpGrads {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  void match(const MlpParams& p);  // allocate to p's shapes, zeroed
  void zero();
  double sq_norm() const;
  void scale(double s);
};

// Backpropagates dL/doutput through the pass recorded in ws, accumulating
// parameter gradients into g. Returns dL/dinput.
std::vector<double> mlp_backward(const MlpParams& p, const MlpWorkspace& ws,
                                 const std::vector<double>& dout, MlpGrads& g);

struct AdamState {
  std::vector<std::vector<float>> mw, vw, mb, vb;
  int64_t t = 0;

  void match(const MlpParams& p);
};

void adam_step(MlpParams& p, const MlpGrads& g, AdamState& s, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

// Adam for a bare float parameter vector (the policy's log_std head).
struct AdamVec {
  std::vector<float> m, v;
  int64_t t = 0;
};

void adam_step_vec(std::vector<float>& param, const std::vector<double>& grad, AdamVec& s,
                   double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Global L2 norm over an MlpGrads plus an optional extra flat gradient.
double grad_global_norm(const MlpGrads& g, const std::vector<double>* extra);
// In-place clip of (g, extra) to max_norm; no-op when already within.
void grad_clip_global(MlpGrads& g, std::vector<double>* extra, double max_norm);

}  // namespace hvrs
