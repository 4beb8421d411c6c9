#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "n2s3/point_cloud.hpp"

namespace n2s3 {

struct NormalizationTransform;

/// Infinite plane {p : n.p = offset}; the normal is stored unit length.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// Torus with symmetry axis +z through the center.
struct Torus {
  Vec3 center = Vec3::Zero();
  double major_radius = 1.0;
  double minor_radius = 0.25;
};

/// Axis-aligned box; the surface is its boundary, so interior points have a
/// positive distance too.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
};

using AnalyticSurface = std::variant<Plane, Sphere, Torus, Box>;

/// Exact unsigned distance from a point to the surface.
double surface_distance(const AnalyticSurface& surf, const Vec3& p);

/// Area-uniform sample of n points. Planes are sampled on a square patch of
/// the given half extent around the point of the plane closest to the
/// origin; the other surfaces ignore the extent.
PointCloud sample_surface(const AnalyticSurface& surf, int n, std::uint64_t seed,
                          double plane_half_extent = 1.0);

/// Image of the surface under p -> (p - centroid) / scale, i.e. the surface
/// expressed in the normalized frame of a cloud.
AnalyticSurface transform_surface(const AnalyticSurface& surf,
                                  const NormalizationTransform& t);

/// Compact text form: "plane:nx,ny,nz,offset", "sphere:cx,cy,cz,r",
/// "torus:cx,cy,cz,R,r", "box:cx,cy,cz,hx,hy,hz".
AnalyticSurface parse_surface_spec(const std::string& spec);
std::string format_surface_spec(const AnalyticSurface& surf);

}  // namespace n2s3
