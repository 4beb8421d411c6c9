#pragma once

#include <Eigen/Dense>
#include <vector>

namespace n2s3 {

using Vec3 = Eigen::Vector3d;

/// An ordered set of 3D points. Order only matters as an index space;
/// every metric defined on clouds is permutation invariant.
struct PointCloud {
  std::vector<Vec3> points;

  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> pts) : points(std::move(pts)) {}
  PointCloud(std::initializer_list<Vec3> pts) : points(pts) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  Vec3& operator[](std::size_t i) { return points[i]; }
  const Vec3& operator[](std::size_t i) const { return points[i]; }
};

/// Similarity transform taking a normalized cloud back to its source frame:
/// p_original = p_normalized * scale + centroid.
struct NormalizationTransform {
  Vec3 centroid = Vec3::Zero();
  double scale = 1.0;
};

/// Throws Error if the cloud is empty or contains a non-finite coordinate.
void validate_cloud(const PointCloud& pc);

/// Centers the cloud on its centroid and scales it so the farthest point
/// lies on the unit sphere. Throws DegenerateCloud when all points coincide.
std::pair<PointCloud, NormalizationTransform> normalize_unit_sphere(
    const PointCloud& pc);

/// Exact inverse of normalize_unit_sphere for the returned transform.
PointCloud denormalize(const PointCloud& pc, const NormalizationTransform& t);

/// Maximum distance from the centroid to any point.
double bounding_sphere_radius(const PointCloud& pc);

Vec3 centroid(const PointCloud& pc);

}  // namespace n2s3
