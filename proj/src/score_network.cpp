#include "n2s3/score_network.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "n2s3/errors.hpp"
#include "n2s3/rng.hpp"

namespace n2s3 {

namespace {

inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double logistic(double z) {
  return z > 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

Activation activation_from_string(const std::string& name) {
  if (name == "softplus") return Activation::softplus;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + name + "' (expected softplus or tanh)");
}

std::string to_string(Activation a) {
  return a == Activation::softplus ? "softplus" : "tanh";
}

std::vector<int> Architecture::layer_dims() const {
  std::vector<int> dims;
  dims.reserve(hidden.size() + 2);
  dims.push_back(input_dim());
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(3);
  return dims;
}

std::int64_t Architecture::param_count() const {
  const auto dims = layer_dims();
  std::int64_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    n += std::int64_t(dims[l + 1]) * (dims[l] + 1);
  }
  return n;
}

void Architecture::validate() const {
  if (k_patch < 1) throw ConfigError("k_patch must be >= 1");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden layer widths must be >= 1");
  }
}

PatchFeatures extract_patch(const PointCloud& pc, const KnnIndex& idx, int i,
                            int k_patch) {
  const Vec3& q = pc[std::size_t(i)];
  std::vector<std::pair<double, int>> nbrs;
  nbrs.reserve(std::size_t(k_patch));
  idx.knn_squared_into(q, k_patch, nbrs);
  PatchFeatures patch;
  patch.offsets.reserve(nbrs.size());
  for (const auto& [d2, j] : nbrs) {
    (void)d2;
    patch.offsets.push_back(pc[std::size_t(j)] - q);
  }
  return patch;
}

ScoreNetwork::ScoreNetwork(Architecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  dims_ = arch_.layer_dims();
  std::int64_t off = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    w_off_.push_back(off);
    off += std::int64_t(dims_[l + 1]) * dims_[l];
    b_off_.push_back(off);
    off += dims_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(off);
}

ScoreNetwork ScoreNetwork::init_params(const Architecture& arch, std::uint64_t seed) {
  ScoreNetwork net(arch);
  Rng rng(seed);
  const auto& dims = net.dims_;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = 1.0 / std::sqrt(double(dims[l]));
    const std::int64_t count = std::int64_t(dims[l + 1]) * dims[l];
    for (std::int64_t i = 0; i < count; ++i) {
      net.params_[net.w_off_[l] + i] = bound * (2.0 * rng.uniform01() - 1.0);
    }
    // biases stay zero
  }
  return net;
}

ScoreNetwork::Workspace ScoreNetwork::make_workspace() const {
  Workspace ws;
  const std::size_t layers = dims_.size() - 1;
  ws.act.resize(layers + 1);
  ws.pre.resize(layers);
  ws.delta.resize(layers);
  for (std::size_t l = 0; l <= layers; ++l) ws.act[l].resize(dims_[l]);
  for (std::size_t l = 0; l < layers; ++l) {
    ws.pre[l].resize(dims_[l + 1]);
    ws.delta[l].resize(dims_[l + 1]);
  }
  return ws;
}

void ScoreNetwork::flatten_input(const PatchFeatures& patch, Eigen::VectorXd& x0) const {
  if (int(patch.offsets.size()) != arch_.k_patch) {
    throw ArchMismatch("patch has " + std::to_string(patch.offsets.size()) +
                       " offsets, architecture expects " + std::to_string(arch_.k_patch));
  }
  for (int j = 0; j < arch_.k_patch; ++j) {
    const Vec3& o = patch.offsets[std::size_t(j)];
    if (!o.allFinite()) throw Error("patch contains a non-finite offset");
    x0[3 * j] = o.x();
    x0[3 * j + 1] = o.y();
    x0[3 * j + 2] = o.z();
  }
}

Vec3 ScoreNetwork::forward(const PatchFeatures& patch) const {
  Workspace ws = make_workspace();
  return forward(patch, ws);
}

Vec3 ScoreNetwork::forward(const PatchFeatures& patch, Workspace& ws) const {
  flatten_input(patch, ws.act[0]);
  const std::size_t layers = dims_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::Map<const Eigen::MatrixXd> W(params_.data() + w_off_[l],
                                              dims_[l + 1], dims_[l]);
    const Eigen::Map<const Eigen::VectorXd> b(params_.data() + b_off_[l], dims_[l + 1]);
    ws.pre[l].noalias() = W * ws.act[l];
    ws.pre[l] += b;
    if (l + 1 == layers) {
      ws.act[l + 1] = ws.pre[l];  // linear head
    } else if (arch_.activation == Activation::softplus) {
      for (int i = 0; i < ws.pre[l].size(); ++i) ws.act[l + 1][i] = softplus(ws.pre[l][i]);
    } else {
      for (int i = 0; i < ws.pre[l].size(); ++i) ws.act[l + 1][i] = std::tanh(ws.pre[l][i]);
    }
  }
  const Vec3 out = ws.act[layers].head<3>();
  if (!out.allFinite()) throw Error("network produced a non-finite score");
  return out;
}

std::vector<Vec3> ScoreNetwork::forward_batch(std::span<const PatchFeatures> patches) const {
  Workspace ws = make_workspace();
  std::vector<Vec3> out;
  out.reserve(patches.size());
  for (const PatchFeatures& p : patches) out.push_back(forward(p, ws));
  return out;
}

void ScoreNetwork::accumulate_gradient(const PatchFeatures& patch, const Vec3& upstream,
                                       Eigen::VectorXd& grad, Workspace& ws) const {
  if (grad.size() != params_.size()) {
    throw LengthMismatch("gradient accumulator size does not match parameter count");
  }
  forward(patch, ws);
  const std::size_t layers = dims_.size() - 1;

  ws.delta[layers - 1] = upstream;
  for (std::size_t l = layers; l-- > 0;) {
    // parameter gradient for layer l
    Eigen::Map<Eigen::MatrixXd> dW(grad.data() + w_off_[l], dims_[l + 1], dims_[l]);
    Eigen::Map<Eigen::VectorXd> db(grad.data() + b_off_[l], dims_[l + 1]);
    dW.noalias() += ws.delta[l] * ws.act[l].transpose();
    db += ws.delta[l];
    if (l == 0) break;

    // propagate through W_l and the previous activation
    const Eigen::Map<const Eigen::MatrixXd> W(params_.data() + w_off_[l],
                                              dims_[l + 1], dims_[l]);
    ws.delta[l - 1].noalias() = W.transpose() * ws.delta[l];
    if (arch_.activation == Activation::softplus) {
      for (int i = 0; i < ws.delta[l - 1].size(); ++i) {
        ws.delta[l - 1][i] *= logistic(ws.pre[l - 1][i]);
      }
    } else {
      for (int i = 0; i < ws.delta[l - 1].size(); ++i) {
        const double a = ws.act[l][i];
        ws.delta[l - 1][i] *= 1.0 - a * a;
      }
    }
  }
}

Eigen::VectorXd ScoreNetwork::backward(const PatchFeatures& patch, const Vec3& upstream) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  Workspace ws = make_workspace();
  accumulate_gradient(patch, upstream, grad, ws);
  return grad;
}

void ScoreNetwork::scale_output_layer(double factor) {
  const std::size_t last = dims_.size() - 2;
  const std::int64_t count = std::int64_t(dims_[last + 1]) * (dims_[last] + 1);
  params_.segment(w_off_[last], count) *= factor;
}

// ---------------------------------------------------------------------------
// Parameter file serialization

namespace {

constexpr char kMagic[4] = {'N', '2', 'S', '3'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
  Reader(const std::string& data, const std::string& path) : data_(data), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(data_[pos_ + std::size_t(i)])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(data_[pos_ + std::size_t(i)])) << (8 * i);
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size()) throw ParseError("truncated parameter file: " + path_);
  }
  const std::string& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_params(const ScoreNetwork& net, const std::string& path) {
  const Architecture& arch = net.arch();
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, std::uint32_t(arch.k_patch));
  put_u32(buf, std::uint32_t(arch.activation));
  const auto dims = arch.layer_dims();
  put_u32(buf, std::uint32_t(dims.size() - 1));  // weight layer count
  for (std::size_t l = 1; l < dims.size(); ++l) put_u32(buf, std::uint32_t(dims[l]));
  put_u64(buf, std::uint64_t(net.param_count()));
  for (std::int64_t i = 0; i < net.param_count(); ++i) put_f64(buf, net.params()[i]);

  const auto crc = std::uint32_t(
      ::crc32(0, reinterpret_cast<const Bytef*>(buf.data()), uInt(buf.size())));
  put_u32(buf, crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(buf.data(), std::streamsize(buf.size()));
  if (!out) throw IoError("failed writing " + path);
}

ScoreNetwork load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path);
  if (data.size() < 4 + 4 + 4) throw ParseError("truncated parameter file: " + path);

  if (std::memcmp(data.data(), kMagic, 4) != 0) {
    throw VersionMismatch("bad magic in " + path + " (not a parameter file)");
  }
  // CRC covers everything before the trailing checksum word.
  const std::size_t body = data.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= std::uint32_t(std::uint8_t(data[body + std::size_t(i)])) << (8 * i);
  const auto computed = std::uint32_t(
      ::crc32(0, reinterpret_cast<const Bytef*>(data.data()), uInt(body)));
  if (stored != computed) throw ChecksumMismatch("CRC mismatch in " + path);

  Reader r(data, path);
  r.u32();  // magic, already checked
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw VersionMismatch("unsupported parameter file version " + std::to_string(version));
  }

  Architecture arch;
  arch.k_patch = int(r.u32());
  const std::uint32_t act = r.u32();
  if (act > 1) throw ParseError("unknown activation tag in " + path);
  arch.activation = Activation(act);
  const std::uint32_t layers = r.u32();
  if (layers < 1) throw ParseError("parameter file declares no layers: " + path);
  std::vector<int> out_dims(layers);
  for (auto& d : out_dims) d = int(r.u32());
  if (out_dims.back() != 3) throw ParseError("final layer width must be 3: " + path);
  arch.hidden.assign(out_dims.begin(), out_dims.end() - 1);
  arch.validate();

  const std::uint64_t declared = r.u64();
  if (declared != std::uint64_t(arch.param_count())) {
    throw ParseError("header-declared parameter count " + std::to_string(declared) +
                     " does not match architecture (" +
                     std::to_string(arch.param_count()) + "): " + path);
  }
  if (r.remaining() != declared * 8 + 4) {
    throw ParseError("payload length does not match declared parameter count: " + path);
  }

  ScoreNetwork net(arch);
  for (std::uint64_t i = 0; i < declared; ++i) net.params()[Eigen::Index(i)] = r.f64();
  return net;
}

}  // namespace n2s3
