#include "n2s3/point_cloud.hpp"

#include <cmath>

#include "n2s3/errors.hpp"

namespace n2s3 {

void validate_cloud(const PointCloud& pc) {
  if (pc.empty()) throw Error("point cloud is empty");
  for (const Vec3& p : pc.points) {
    if (!p.allFinite()) throw Error("point cloud contains a non-finite coordinate");
  }
}

Vec3 centroid(const PointCloud& pc) {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : pc.points) sum += p;
  return sum / double(pc.size());
}

double bounding_sphere_radius(const PointCloud& pc) {
  validate_cloud(pc);
  const Vec3 c = centroid(pc);
  double max_sq = 0.0;
  for (const Vec3& p : pc.points) max_sq = std::max(max_sq, (p - c).squaredNorm());
  return std::sqrt(max_sq);
}

std::pair<PointCloud, NormalizationTransform> normalize_unit_sphere(
    const PointCloud& pc) {
  validate_cloud(pc);
  const Vec3 c = centroid(pc);

  PointCloud centered;
  centered.points.reserve(pc.size());
  double max_sq = 0.0;
  for (const Vec3& p : pc.points) {
    centered.points.push_back(p - c);
    max_sq = std::max(max_sq, centered.points.back().squaredNorm());
  }
  const double radius = std::sqrt(max_sq);
  if (radius == 0.0) throw DegenerateCloud("all points coincide; cannot scale to the unit sphere");

  for (Vec3& p : centered.points) p /= radius;
  return {std::move(centered), NormalizationTransform{c, radius}};
}

PointCloud denormalize(const PointCloud& pc, const NormalizationTransform& t) {
  if (!(t.scale > 0.0)) throw Error("normalization transform has non-positive scale");
  PointCloud out;
  out.points.reserve(pc.size());
  for (const Vec3& p : pc.points) out.points.push_back(p * t.scale + t.centroid);
  return out;
}

}  // namespace n2s3
