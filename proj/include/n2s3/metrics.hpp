#pragma once

#include <cstdint>
#include <vector>

#include "n2s3/point_cloud.hpp"
#include "n2s3/surfaces.hpp"

namespace n2s3 {

/// Parameters of the total-variation metric. Weighting is either the
/// constant 1 or a Gaussian kernel of the squared neighbor distance.
struct TvParams {
  enum class Weighting { constant_one, gaussian };
  int k_neighbors = 8;
  double epsilon = 1e-6;
  Weighting weighting = Weighting::constant_one;
  double kernel_sigma = 0.05;  // only read for gaussian weighting

  void validate() const;
};

/// Total variation of a point cloud: sum over points of the Charbonnier
/// lengths sqrt(|p_i - p_j|^2 + eps^2) to each of the k nearest neighbors
/// of p_i, the point itself excluded. Lower is smoother.
double tv_pc(const PointCloud& pc, const TvParams& params);

/// Two-sided mean squared nearest-neighbor discrepancy:
/// (1/|A|) sum_a min_b |a-b|^2 + (1/|B|) sum_b min_a |a-b|^2.
double chamfer_distance(const PointCloud& a, const PointCloud& b);

/// Mean unsigned distance from each point to an analytic surface.
double point_to_surface(const PointCloud& pc, const AnalyticSurface& surf);

/// Returns the cloud reordered as out[i] = pc[perm[i]] together with the
/// permutation used (a uniformly random one derived from the seed).
std::pair<PointCloud, std::vector<int>> shuffle_cloud(const PointCloud& pc,
                                                      std::uint64_t seed);

/// Applies out[i] = pc[perm[i]].
PointCloud apply_permutation(const PointCloud& pc, const std::vector<int>& perm);

/// Uniform scale plus translation: p -> scale * p + translation.
PointCloud transform_cloud(const PointCloud& pc, double scale, const Vec3& translation);

}  // namespace n2s3
