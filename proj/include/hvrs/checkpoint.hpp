#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hvrs/mlp.hpp"

namespace hvrs {

struct Tensor {
  std::vector<uint32_t> dims;
  std::vector<float> data;  // row-major
};

// Sorted by name, so serialization order (and the output bytes) are unique.
using TensorMap = std::map<std::string, Tensor>;

// Binary layout: magic "HVRS", version u32 = 1, entry count u32, then per
// entry: name length u16, UTF-8 name, rank u8, dims u32 each, raw 32-bit
// little-endian floats. Write is atomic (temp file + rename).
void save_checkpoint(const std::string& path, const TensorMap& tensors);

// Strict reader: bad magic, unsupported version, truncation, or trailing
// bytes raise std::runtime_error naming the byte offset.
TensorMap load_checkpoint(const std::string& path);

TensorMap load_checkpoint_bytes(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> checkpoint_bytes(const TensorMap& tensors);

// Named-tensor helpers for the training artifacts.
void pack_mlp(TensorMap& t, const std::string& prefix, const MlpParams& p);
MlpParams unpack_mlp(const TensorMap& t, const std::string& prefix);
bool has_mlp(const TensorMap& t, const std::string& prefix);

void pack_vecf(TensorMap& t, const std::string& name, const std::vector<float>& v);
std::vector<float> unpack_vecf(const TensorMap& t, const std::string& name);

void pack_scalar(TensorMap& t, const std::string& name, double v);
double unpack_scalar(const TensorMap& t, const std::string& name);
bool has_tensor(const TensorMap& t, const std::string& name);

void pack_adam(TensorMap& t, const std::string& prefix, const AdamState& s);
AdamState unpack_adam(const TensorMap& t, const std::string& prefix, const MlpParams& shapes);
void pack_adam_vec(TensorMap& t, const std::string& prefix, const AdamVec& s);
AdamVec unpack_adam_vec(const TensorMap& t, const std::string& prefix);

}  // namespace hvrs
