#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "n2s3/kdtree.hpp"
#include "n2s3/point_cloud.hpp"

namespace n2s3 {

enum class Activation : std::uint32_t { softplus = 0, tanh = 1 };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

/// Shape of the score estimator: a pointwise MLP over a flattened patch of
/// k_patch centered neighbor offsets, with a linear 3-output head.
struct Architecture {
  int k_patch = 32;
  std::vector<int> hidden = {128, 128, 64};
  Activation activation = Activation::softplus;

  int input_dim() const { return 3 * k_patch; }
  /// Dimensions of every layer boundary: {input, hidden..., 3}.
  std::vector<int> layer_dims() const;
  std::int64_t param_count() const;
  void validate() const;

  bool operator==(const Architecture&) const = default;
};

/// Centered neighborhood of one query point: the k_patch nearest neighbors
/// (the query itself included) minus the query position, ordered by
/// ascending (distance, index). Row 0 is zero whenever the query is a cloud
/// point, since every point is its own nearest neighbor.
struct PatchFeatures {
  std::vector<Vec3> offsets;
};

/// Neighborhood of cloud point i, ready for the network. Throws InvalidK if
/// k_patch exceeds the cloud size.
PatchFeatures extract_patch(const PointCloud& pc, const KnnIndex& idx, int i,
                            int k_patch);

/// Score estimator S(y): maps a centered patch to a 3-vector estimate of the
/// gradient of the log-density at the query point. Parameters live in one
/// flat vector (column-major weight matrix, then bias, per layer), so the
/// optimizer and the serializer both see plain contiguous storage.
class ScoreNetwork {
public:
  explicit ScoreNetwork(Architecture arch);  // all parameters zero

  /// Deterministic initialization: weights uniform in
  /// [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  static ScoreNetwork init_params(const Architecture& arch, std::uint64_t seed);

  const Architecture& arch() const { return arch_; }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  std::int64_t param_count() const { return params_.size(); }

  /// Scratch buffers for one forward/backward pass; reusable across calls.
  struct Workspace {
    std::vector<Eigen::VectorXd> pre;   // pre-activations per layer
    std::vector<Eigen::VectorXd> act;   // act[0] is the flattened input
    std::vector<Eigen::VectorXd> delta;
  };
  Workspace make_workspace() const;

  Vec3 forward(const PatchFeatures& patch) const;
  Vec3 forward(const PatchFeatures& patch, Workspace& ws) const;

  /// Elementwise equal to calling forward per patch.
  std::vector<Vec3> forward_batch(std::span<const PatchFeatures> patches) const;

  /// Gradient of (upstream . forward(patch)) with respect to the parameters.
  Eigen::VectorXd backward(const PatchFeatures& patch, const Vec3& upstream) const;

  /// Adds the same gradient into an accumulator; the trainer's hot path.
  void accumulate_gradient(const PatchFeatures& patch, const Vec3& upstream,
                           Eigen::VectorXd& grad, Workspace& ws) const;

  /// Scales the final linear layer (weights and bias) by a constant factor;
  /// the output scales exactly by the same factor.
  void scale_output_layer(double factor);

private:
  void flatten_input(const PatchFeatures& patch, Eigen::VectorXd& x0) const;

  Architecture arch_;
  std::vector<int> dims_;
  std::vector<std::int64_t> w_off_;  // offset of W_l in params_
  std::vector<std::int64_t> b_off_;  // offset of b_l in params_
  Eigen::VectorXd params_;
};

/// Binary parameter file: magic "N2S3", version u32, architecture descriptor,
/// little-endian doubles, trailing CRC32 over everything before it.
void save_params(const ScoreNetwork& net, const std::string& path);
ScoreNetwork load_params(const std::string& path);

}  // namespace n2s3
