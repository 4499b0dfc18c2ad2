#include "hvrs/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace hvrs {

namespace {

constexpr char kMagic[4] = {'H', 'V', 'R', 'S'};
constexpr uint32_t kVersion = 1;

void put_bytes(std::vector<unsigned char>& out, const void* src, size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(src);
  out.insert(out.end(), p, p + n);
}

template <typename T>
void put(std::vector<unsigned char>& out, T v) {
  put_bytes(out, &v, sizeof(T));
}

[[noreturn]] void fail_at(size_t offset, const std::string& what) {
  throw std::runtime_error("checkpoint: " + what + " at byte " + std::to_string(offset));
}

struct Reader {
  const std::vector<unsigned char>& bytes;
  size_t pos = 0;

  void need(size_t n, const char* what) {
    if (pos + n > bytes.size()) fail_at(pos, std::string("truncated reading ") + what);
  }
  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
};

}  // namespace

std::vector<unsigned char> checkpoint_bytes(const TensorMap& tensors) {
  std::vector<unsigned char> out;
  put_bytes(out, kMagic, 4);
  put<uint32_t>(out, kVersion);
  put<uint32_t>(out, static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    if (name.size() > 0xffff) throw std::runtime_error("checkpoint: tensor name too long");
    put<uint16_t>(out, static_cast<uint16_t>(name.size()));
    put_bytes(out, name.data(), name.size());
    if (tensor.dims.size() > 0xff) throw std::runtime_error("checkpoint: rank too large");
    put<uint8_t>(out, static_cast<uint8_t>(tensor.dims.size()));
    uint64_t count = 1;
    for (uint32_t d : tensor.dims) {
      put<uint32_t>(out, d);
      count *= d;
    }
    if (count != tensor.data.size()) {
      throw std::runtime_error("checkpoint: tensor '" + name + "' dims do not match data size");
    }
    put_bytes(out, tensor.data.data(), tensor.data.size() * sizeof(float));
  }
  return out;
}

TensorMap load_checkpoint_bytes(const std::vector<unsigned char>& bytes) {
  Reader r{bytes};
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) fail_at(0, "bad magic");
  r.pos = 4;
  uint32_t version = r.get<uint32_t>("version");
  if (version != kVersion) {
    fail_at(4, "unsupported version " + std::to_string(version));
  }
  uint32_t count = r.get<uint32_t>("entry count");
  TensorMap out;
  for (uint32_t e = 0; e < count; ++e) {
    uint16_t name_len = r.get<uint16_t>("name length");
    r.need(name_len, "name");
    std::string name(reinterpret_cast<const char*>(bytes.data() + r.pos), name_len);
    r.pos += name_len;
    uint8_t rank = r.get<uint8_t>("rank");
    Tensor t;
    uint64_t n = 1;
    for (uint8_t d = 0; d < rank; ++d) {
      uint32_t dim = r.get<uint32_t>("dim");
      t.dims.push_back(dim);
      n *= dim;
      if (n > (1ull << 32)) fail_at(r.pos, "tensor '" + name + "' too large");
    }
    r.need(n * sizeof(float), "tensor data");
    t.data.resize(n);
    std::memcpy(t.data.data(), bytes.data() + r.pos, n * sizeof(float));
    r.pos += n * sizeof(float);
    if (!out.emplace(std::move(name), std::move(t)).second) {
      fail_at(r.pos, "duplicate tensor name");
    }
  }
  if (r.pos != bytes.size()) {
    fail_at(r.pos, "trailing " + std::to_string(bytes.size() - r.pos) + " bytes");
  }
  return out;
}

void save_checkpoint(const std::string& path, const TensorMap& tensors) {
  std::vector<unsigned char> bytes = checkpoint_bytes(tensors);
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("checkpoint: cannot open " + tmp + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("checkpoint: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("checkpoint: rename to " + path + " failed");
  }
}

TensorMap load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  return load_checkpoint_bytes(bytes);
}

namespace {

const Tensor& require(const TensorMap& t, const std::string& name) {
  auto it = t.find(name);
  if (it == t.end()) throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
  return it->second;
}

}  // namespace

bool has_tensor(const TensorMap& t, const std::string& name) { return t.count(name) > 0; }

void pack_mlp(TensorMap& t, const std::string& prefix, const MlpParams& p) {
  Tensor sizes;
  sizes.dims = {static_cast<uint32_t>(p.sizes.size())};
  for (int s : p.sizes) sizes.data.push_back(static_cast<float>(s));
  t[prefix + ".sizes"] = std::move(sizes);
  for (int l = 0; l < p.layers(); ++l) {
    Tensor w;
    w.dims = {static_cast<uint32_t>(p.sizes[l + 1]), static_cast<uint32_t>(p.sizes[l])};
    w.data = p.w[l];
    t[prefix + ".w" + std::to_string(l)] = std::move(w);
    Tensor b;
    b.dims = {static_cast<uint32_t>(p.sizes[l + 1])};
    b.data = p.b[l];
    t[prefix + ".b" + std::to_string(l)] = std::move(b);
  }
}

bool has_mlp(const TensorMap& t, const std::string& prefix) {
  return has_tensor(t, prefix + ".sizes");
}

MlpParams unpack_mlp(const TensorMap& t, const std::string& prefix) {
  const Tensor& sizes = require(t, prefix + ".sizes");
  MlpParams p;
  for (float v : sizes.data) p.sizes.push_back(static_cast<int>(v));
  if (p.sizes.size() < 2) throw std::runtime_error("checkpoint: '" + prefix + "' has bad sizes");
  int layers = static_cast<int>(p.sizes.size()) - 1;
  p.w.resize(layers);
  p.b.resize(layers);
  for (int l = 0; l < layers; ++l) {
    const Tensor& w = require(t, prefix + ".w" + std::to_string(l));
    const Tensor& b = require(t, prefix + ".b" + std::to_string(l));
    size_t want_w = static_cast<size_t>(p.sizes[l]) * p.sizes[l + 1];
    if (w.data.size() != want_w || b.data.size() != static_cast<size_t>(p.sizes[l + 1])) {
      throw std::runtime_error("checkpoint: '" + prefix + "' layer " + std::to_string(l) +
                               " has inconsistent shape");
    }
    p.w[l] = w.data;
    p.b[l] = b.data;
  }
  if (!mlp_finite(p)) {
    throw std::runtime_error("checkpoint: '" + prefix + "' contains non-finite values");
  }
  return p;
}

void pack_vecf(TensorMap& t, const std::string& name, const std::vector<float>& v) {
  Tensor tensor;
  tensor.dims = {static_cast<uint32_t>(v.size())};
  tensor.data = v;
  t[name] = std::move(tensor);
}

std::vector<float> unpack_vecf(const TensorMap& t, const std::string& name) {
  return require(t, name).data;
}

void pack_scalar(TensorMap& t, const std::string& name, double v) {
  Tensor tensor;
  tensor.dims = {1};
  tensor.data = {static_cast<float>(v)};
  t[name] = std::move(tensor);
}

double unpack_scalar(const TensorMap& t, const std::string& name) {
  const Tensor& tensor = require(t, name);
  if (tensor.data.size() != 1) {
    throw std::runtime_error("checkpoint: '" + name + "' is not a scalar");
  }
  return static_cast<double>(tensor.data[0]);
}

void pack_adam(TensorMap& t, const std::string& prefix, const AdamState& s) {
  for (size_t l = 0; l < s.mw.size(); ++l) {
    pack_vecf(t, prefix + ".mw" + std::to_string(l), s.mw[l]);
    pack_vecf(t, prefix + ".vw" + std::to_string(l), s.vw[l]);
    pack_vecf(t, prefix + ".mb" + std::to_string(l), s.mb[l]);
    pack_vecf(t, prefix + ".vb" + std::to_string(l), s.vb[l]);
  }
  pack_scalar(t, prefix + ".t", static_cast<double>(s.t));
}

AdamState unpack_adam(const TensorMap& t, const std::string& prefix, const MlpParams& shapes) {
  AdamState s;
  s.match(shapes);
  for (size_t l = 0; l < s.mw.size(); ++l) {
    s.mw[l] = unpack_vecf(t, prefix + ".mw" + std::to_string(l));
    s.vw[l] = unpack_vecf(t, prefix + ".vw" + std::to_string(l));
    s.mb[l] = unpack_vecf(t, prefix + ".mb" + std::to_string(l));
    s.vb[l] = unpack_vecf(t, prefix + ".vb" + std::to_string(l));
    if (s.mw[l].size() != shapes.w[l].size() || s.mb[l].size() != shapes.b[l].size()) {
      throw std::runtime_error("checkpoint: '" + prefix + "' optimizer shape mismatch");
    }
  }
  s.t = static_cast<int64_t>(unpack_scalar(t, prefix + ".t"));
  return s;
}

void pack_adam_vec(TensorMap& t, const std::string& prefix, const AdamVec& s) {
  pack_vecf(t, prefix + ".m", s.m);
  pack_vecf(t, prefix + ".v", s.v);
  pack_scalar(t, prefix + ".t", static_cast<double>(s.t));
}

AdamVec unpack_adam_vec(const TensorMap& t, const std::string& prefix) {
  AdamVec s;
  s.m = unpack_vecf(t, prefix + ".m");
  s.v = unpack_vecf(t, prefix + ".v");
  s.t = static_cast<int64_t>(unpack_scalar(t, prefix + ".t"));
  return s;
}

}  // namespace hvrs
