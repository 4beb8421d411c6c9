#include <zlib.h>

#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "n2s3/errors.hpp"
#include "n2s3/rng.hpp"
#include "n2s3/score_network.hpp"
#include "n2s3/trainer.hpp"
#include "oracles.hpp"

using namespace n2s3;

namespace {

PointCloud random_cloud(int n, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud pc;
  for (int i = 0; i < n; ++i) {
    pc.points.emplace_back(rng.normal(), rng.normal(), rng.normal());
  }
  return pc;
}

PatchFeatures random_patch(int k, std::uint64_t seed) {
  Rng rng(seed);
  PatchFeatures p;
  p.offsets.assign(std::size_t(k), Vec3::Zero());
  for (int j = 1; j < k; ++j) {
    p.offsets[std::size_t(j)] = 0.2 * Vec3(rng.normal(), rng.normal(), rng.normal());
  }
  return p;
}

std::string temp_path(const char* name) {
  return std::string("/tmp/n2s3_test_") + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void dump(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(data.data(), std::streamsize(data.size()));
}

void refresh_crc(std::string& data) {
  const std::size_t body = data.size() - 4;
  const auto crc = std::uint32_t(
      ::crc32(0, reinterpret_cast<const Bytef*>(data.data()), uInt(body)));
  for (int i = 0; i < 4; ++i) data[body + std::size_t(i)] = char((crc >> (8 * i)) & 0xff);
}

}  // namespace

TEST_CASE("extract_patch: two-point cloud") {
  PointCloud pc({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  KnnIndex idx(pc);
  const PatchFeatures patch = extract_patch(pc, idx, 0, 2);
  REQUIRE(patch.offsets.size() == 2);
  CHECK(patch.offsets[0] == Vec3(0, 0, 0));
  CHECK(patch.offsets[1] == Vec3(1, 0, 0));
}

TEST_CASE("extract_patch: translation cancels exactly") {
  // dyadic coordinates and a dyadic shift keep every addition exact, so the
  // cancellation invariant can be asserted bit for bit
  PointCloud pc = random_cloud(50, 1);
  for (Vec3& p : pc.points) {
    for (int c = 0; c < 3; ++c) p[c] = std::round(p[c] * 1048576.0) / 1048576.0;
  }
  const Vec3 t(12.25, -3.5, 0.125);
  PointCloud moved;
  for (const Vec3& p : pc.points) moved.points.push_back(p + t);
  KnnIndex idx(pc), midx(moved);
  for (int i = 0; i < 50; i += 7) {
    const PatchFeatures a = extract_patch(pc, idx, i, 8);
    const PatchFeatures b = extract_patch(moved, midx, i, 8);
    for (std::size_t j = 0; j < a.offsets.size(); ++j) {
      CHECK(a.offsets[j] == b.offsets[j]);
    }
  }
}

TEST_CASE("extract_patch matches brute-force neighbors") {
  const PointCloud pc = random_cloud(300, 9);
  KnnIndex idx(pc);
  for (int i = 0; i < 300; i += 31) {
    const PatchFeatures patch = extract_patch(pc, idx, i, 12);
    const auto slow = oracle::brute_knn_squared(pc, pc[std::size_t(i)], 12);
    CHECK(patch.offsets[0] == Vec3(0, 0, 0));  // self is its own nearest neighbor
    for (std::size_t j = 0; j < patch.offsets.size(); ++j) {
      const Vec3 expect = pc[std::size_t(slow[j].second)] - pc[std::size_t(i)];
      CHECK(patch.offsets[j] == expect);
    }
  }
}

TEST_CASE("init_params: deterministic, biases zero, fan-in bound") {
  Architecture arch;
  arch.k_patch = 8;
  arch.hidden = {16, 8};
  const ScoreNetwork a = ScoreNetwork::init_params(arch, 77);
  const ScoreNetwork b = ScoreNetwork::init_params(arch, 77);
  CHECK(a.params() == b.params());
  const ScoreNetwork c = ScoreNetwork::init_params(arch, 78);
  CHECK(a.params() != c.params());

  // weights bounded by 1/sqrt(fan_in) of the widest-input layer
  CHECK(a.params().cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(8.0));
}

TEST_CASE("param_count follows the layer arithmetic") {
  Architecture linear;
  linear.k_patch = 32;
  linear.hidden = {};
  CHECK(linear.param_count() == 3 * 32 * 3 + 3);

  Architecture small;
  small.k_patch = 2;
  small.hidden = {};
  CHECK(small.param_count() == 6 * 3 + 3);

  Architecture deflt;
  CHECK(deflt.param_count() ==
        96 * 128 + 128 + 128 * 128 + 128 + 128 * 64 + 64 + 64 * 3 + 3);
  CHECK(ScoreNetwork(deflt).param_count() == deflt.param_count());
}

TEST_CASE("forward: zero parameters give the zero score") {
  Architecture arch;
  arch.k_patch = 4;
  arch.hidden = {6};
  for (auto act : {Activation::softplus, Activation::tanh}) {
    arch.activation = act;
    const ScoreNetwork net(arch);
    CHECK(net.forward(random_patch(4, 3)) == Vec3(0, 0, 0));
  }
}

TEST_CASE("forward matches an independent hand evaluation") {
  Architecture arch;
  arch.k_patch = 3;
  arch.hidden = {4};
  for (auto act : {Activation::softplus, Activation::tanh}) {
    arch.activation = act;
    ScoreNetwork net = ScoreNetwork::init_params(arch, 5);
    const PatchFeatures patch = random_patch(3, 8);

    std::vector<double> flat(net.params().data(),
                             net.params().data() + net.param_count());
    const Vec3 expect = oracle::hand_mlp_forward(arch, flat, patch.offsets);
    const Vec3 got = net.forward(patch);
    CHECK((got - expect).norm() <= 1e-14 * std::max(1.0, expect.norm()));
  }
}

TEST_CASE("forward is deterministic and batch equals the per-point loop") {
  Architecture arch;
  arch.k_patch = 6;
  ScoreNetwork net = ScoreNetwork::init_params(arch, 21);
  std::vector<PatchFeatures> patches;
  for (int i = 0; i < 16; ++i) patches.push_back(random_patch(6, 100 + std::uint64_t(i)));

  const auto batch = net.forward_batch(patches);
  REQUIRE(batch.size() == patches.size());
  for (std::size_t i = 0; i < patches.size(); ++i) {
    CHECK(batch[i] == net.forward(patches[i]));
  }
  const auto single = net.forward_batch(std::span(patches.data(), 1));
  CHECK(single[0] == net.forward(patches[0]));
}

TEST_CASE("forward rejects a patch of the wrong size") {
  Architecture arch;
  arch.k_patch = 5;
  const ScoreNetwork net(arch);
  CHECK_THROWS_AS(net.forward(random_patch(4, 2)), ArchMismatch);
}

TEST_CASE("backward: zero upstream gradient gives a zero gradient") {
  Architecture arch;
  arch.k_patch = 4;
  ScoreNetwork net = ScoreNetwork::init_params(arch, 3);
  const Eigen::VectorXd g = net.backward(random_patch(4, 4), Vec3::Zero());
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward on a linear network is the exact outer product") {
  Architecture arch;
  arch.k_patch = 3;
  arch.hidden = {};
  ScoreNetwork net = ScoreNetwork::init_params(arch, 6);
  const PatchFeatures patch = random_patch(3, 7);
  const Vec3 upstream(0.5, -1.25, 2.0);
  const Eigen::VectorXd g = net.backward(patch, upstream);

  // flat layout: W (3x9 column-major), then bias
  std::vector<double> input;
  for (const Vec3& o : patch.offsets) {
    input.push_back(o.x());
    input.push_back(o.y());
    input.push_back(o.z());
  }
  for (int m = 0; m < 9; ++m) {
    for (int j = 0; j < 3; ++j) {
      CHECK(g[m * 3 + j] == upstream[j] * input[std::size_t(m)]);
    }
  }
  for (int j = 0; j < 3; ++j) CHECK(g[27 + j] == upstream[j]);
}

TEST_CASE("backward matches central finite differences on a small net") {
  Architecture arch;
  arch.k_patch = 3;
  arch.hidden = {5, 4};
  for (auto act : {Activation::softplus, Activation::tanh}) {
    arch.activation = act;
    ScoreNetwork net = ScoreNetwork::init_params(arch, 11);
    const PatchFeatures patch = random_patch(3, 12);
    const Vec3 upstream(0.7, -0.3, 1.1);
    const Eigen::VectorXd analytic = net.backward(patch, upstream);

    ScoreNetwork probe = net;
    std::vector<std::pair<std::int64_t, double>> fd;
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < net.param_count(); ++i) {
      const double saved = probe.params()[i];
      probe.params()[i] = saved + h;
      const double up = upstream.dot(probe.forward(patch));
      probe.params()[i] = saved - h;
      const double down = upstream.dot(probe.forward(patch));
      probe.params()[i] = saved;
      fd.emplace_back(i, (up - down) / (2.0 * h));
    }
    CHECK(max_relative_gradient_error(analytic, fd) <= 1e-6);
  }
}

TEST_CASE("save/load round trip is bit identical") {
  Architecture arch;
  arch.k_patch = 5;
  arch.hidden = {7, 3};
  arch.activation = Activation::tanh;
  ScoreNetwork net = ScoreNetwork::init_params(arch, 31);
  const std::string path = temp_path("roundtrip.n2s3");
  save_params(net, path);
  const ScoreNetwork loaded = load_params(path);
  CHECK(loaded.arch() == arch);
  CHECK(loaded.params() == net.params());
  std::remove(path.c_str());
}

TEST_CASE("load_params: corrupted magic raises VersionMismatch") {
  Architecture arch;
  arch.k_patch = 2;
  const std::string path = temp_path("magic.n2s3");
  save_params(ScoreNetwork::init_params(arch, 1), path);
  std::string data = slurp(path);
  data[0] = 'X';
  refresh_crc(data);  // keep the checksum valid so the magic check is what fires
  dump(path, data);
  CHECK_THROWS_AS(load_params(path), VersionMismatch);
  std::remove(path.c_str());
}

TEST_CASE("load_params: flipped payload byte raises ChecksumMismatch") {
  Architecture arch;
  arch.k_patch = 2;
  const std::string path = temp_path("crc.n2s3");
  save_params(ScoreNetwork::init_params(arch, 1), path);
  std::string data = slurp(path);
  data[data.size() / 2] = char(data[data.size() / 2] ^ 0x40);
  dump(path, data);
  CHECK_THROWS_AS(load_params(path), ChecksumMismatch);
  std::remove(path.c_str());
}

TEST_CASE("load_params: declared count must match the architecture and payload") {
  Architecture arch;
  arch.k_patch = 2;
  arch.hidden = {4};
  const std::string path = temp_path("count.n2s3");
  save_params(ScoreNetwork::init_params(arch, 1), path);
  std::string data = slurp(path);
  // u64 count sits after magic(4) version(4) k_patch(4) act(4) layers(4) dims(4*2)
  const std::size_t count_off = 4 + 4 + 4 + 4 + 4 + 4 * 2;
  data[count_off] = char(data[count_off] + 1);
  refresh_crc(data);
  dump(path, data);
  CHECK_THROWS_AS(load_params(path), ParseError);

  // truncation is caught before any parsing by the checksum
  std::string trunc = slurp(path).substr(0, 20);
  dump(path, trunc);
  CHECK_THROWS(load_params(path));
  std::remove(path.c_str());
}
