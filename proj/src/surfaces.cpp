#include "n2s3/surfaces.hpp"

#include <cmath>
#include <numbers>

#include "n2s3/errors.hpp"
#include "n2s3/num_text.hpp"
#include "n2s3/point_cloud.hpp"
#include "n2s3/rng.hpp"

namespace n2s3 {

namespace {

Vec3 gaussian3(Rng& rng) { return Vec3(rng.normal(), rng.normal(), rng.normal()); }

// Deterministic orthonormal basis (u, v) of the plane with unit normal n.
std::pair<Vec3, Vec3> plane_basis(const Vec3& n) {
  Vec3 e = Vec3::UnitX();
  if (std::abs(n.x()) > std::abs(n.y())) e = Vec3::UnitY();
  if (std::abs(n.z()) < std::min(std::abs(n.x()), std::abs(n.y()))) e = Vec3::UnitZ();
  const Vec3 u = n.cross(e).normalized();
  const Vec3 v = n.cross(u);
  return {u, v};
}

std::vector<double> parse_params(const std::string& body, std::size_t expect,
                                 const std::string& spec) {
  std::vector<double> vals;
  std::size_t start = 0;
  while (start <= body.size()) {
    const std::size_t comma = body.find(',', start);
    const std::string_view token =
        std::string_view(body).substr(start, comma == std::string::npos
                                                 ? std::string::npos
                                                 : comma - start);
    vals.push_back(parse_double(token));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (vals.size() != expect) {
    throw ParseError("surface spec '" + spec + "' needs " + std::to_string(expect) +
                     " parameters, got " + std::to_string(vals.size()));
  }
  return vals;
}

}  // namespace

double surface_distance(const AnalyticSurface& surf, const Vec3& p) {
  return std::visit(
      [&p](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Plane>) {
          return std::abs(s.normal.dot(p) - s.offset);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return std::abs((p - s.center).norm() - s.radius);
        } else if constexpr (std::is_same_v<T, Torus>) {
          const Vec3 d = p - s.center;
          const double rho = std::hypot(d.x(), d.y());
          return std::abs(std::hypot(rho - s.major_radius, d.z()) - s.minor_radius);
        } else {
          const Vec3 q = (p - s.center).cwiseAbs() - s.half_extents;
          const double outside = q.cwiseMax(0.0).norm();
          const double inside = std::min(q.maxCoeff(), 0.0);
          return std::abs(outside + inside);
        }
      },
      surf);
}

PointCloud sample_surface(const AnalyticSurface& surf, int n, std::uint64_t seed,
                          double plane_half_extent) {
  if (n < 1) throw Error("sample_surface: need n >= 1");
  Rng rng(seed);
  PointCloud pc;
  pc.points.reserve(std::size_t(n));

  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Plane>) {
          if (!(plane_half_extent > 0.0)) throw Error("plane patch extent must be > 0");
          const auto [u, v] = plane_basis(s.normal);
          const Vec3 origin = s.offset * s.normal;
          for (int i = 0; i < n; ++i) {
            const double a = plane_half_extent * (2.0 * rng.uniform01() - 1.0);
            const double b = plane_half_extent * (2.0 * rng.uniform01() - 1.0);
            pc.points.push_back(origin + a * u + b * v);
          }
        } else if constexpr (std::is_same_v<T, Sphere>) {
          for (int i = 0; i < n; ++i) {
            Vec3 dir = gaussian3(rng);
            while (dir.norm() < 1e-12) dir = gaussian3(rng);
            pc.points.push_back(s.center + s.radius * dir.normalized());
          }
        } else if constexpr (std::is_same_v<T, Torus>) {
          const double R = s.major_radius;
          const double r = s.minor_radius;
          for (int i = 0; i < n; ++i) {
            const double u = 2.0 * std::numbers::pi * rng.uniform01();
            // Area element scales with R + r cos v: rejection on v.
            double v = 0.0;
            for (;;) {
              v = 2.0 * std::numbers::pi * rng.uniform01();
              if (rng.uniform01() * (R + r) <= R + r * std::cos(v)) break;
            }
            const double ring = R + r * std::cos(v);
            pc.points.push_back(s.center + Vec3(ring * std::cos(u), ring * std::sin(u),
                                                r * std::sin(v)));
          }
        } else {
          const Vec3& h = s.half_extents;
          const double areas[3] = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
          const double total = areas[0] + areas[1] + areas[2];
          for (int i = 0; i < n; ++i) {
            const double pick = rng.uniform01() * total;
            const int axis = pick < areas[0] ? 0 : (pick < areas[0] + areas[1] ? 1 : 2);
            const double side = rng.uniform01() < 0.5 ? -1.0 : 1.0;
            Vec3 p;
            p[axis] = side * h[axis];
            const int a1 = (axis + 1) % 3;
            const int a2 = (axis + 2) % 3;
            p[a1] = h[a1] * (2.0 * rng.uniform01() - 1.0);
            p[a2] = h[a2] * (2.0 * rng.uniform01() - 1.0);
            pc.points.push_back(s.center + p);
          }
        }
      },
      surf);
  return pc;
}

AnalyticSurface transform_surface(const AnalyticSurface& surf,
                                  const NormalizationTransform& t) {
  const double inv = 1.0 / t.scale;
  return std::visit(
      [&](const auto& s) -> AnalyticSurface {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Plane>) {
          return Plane{s.normal, (s.offset - s.normal.dot(t.centroid)) * inv};
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return Sphere{(s.center - t.centroid) * inv, s.radius * inv};
        } else if constexpr (std::is_same_v<T, Torus>) {
          return Torus{(s.center - t.centroid) * inv, s.major_radius * inv,
                       s.minor_radius * inv};
        } else {
          return Box{(s.center - t.centroid) * inv, s.half_extents * inv};
        }
      },
      surf);
}

AnalyticSurface parse_surface_spec(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  if (colon == std::string::npos) {
    throw ParseError("surface spec '" + spec + "' lacks ':<params>'");
  }
  const std::string kind = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);

  if (kind == "plane") {
    const auto v = parse_params(body, 4, spec);
    Vec3 n(v[0], v[1], v[2]);
    if (n.norm() < 1e-12) throw ParseError("plane normal must be nonzero: " + spec);
    // offset is given for the unnormalized normal; rescale both together
    const double len = n.norm();
    return Plane{n / len, v[3] / len};
  }
  if (kind == "sphere") {
    const auto v = parse_params(body, 4, spec);
    if (!(v[3] > 0.0)) throw ParseError("sphere radius must be > 0: " + spec);
    return Sphere{Vec3(v[0], v[1], v[2]), v[3]};
  }
  if (kind == "torus") {
    const auto v = parse_params(body, 5, spec);
    if (!(v[3] > 0.0) || !(v[4] > 0.0)) {
      throw ParseError("torus radii must be > 0: " + spec);
    }
    return Torus{Vec3(v[0], v[1], v[2]), v[3], v[4]};
  }
  if (kind == "box") {
    const auto v = parse_params(body, 6, spec);
    if (!(v[3] > 0.0) || !(v[4] > 0.0) || !(v[5] > 0.0)) {
      throw ParseError("box half-extents must be > 0: " + spec);
    }
    return Box{Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])};
  }
  throw ParseError("unknown surface kind '" + kind + "'");
}

std::string format_surface_spec(const AnalyticSurface& surf) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Plane>) {
          return "plane:" + to_text(s.normal.x()) + "," + to_text(s.normal.y()) + "," +
                 to_text(s.normal.z()) + "," + to_text(s.offset);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return "sphere:" + to_text(s.center.x()) + "," + to_text(s.center.y()) + "," +
                 to_text(s.center.z()) + "," + to_text(s.radius);
        } else if constexpr (std::is_same_v<T, Torus>) {
          return "torus:" + to_text(s.center.x()) + "," + to_text(s.center.y()) + "," +
                 to_text(s.center.z()) + "," + to_text(s.major_radius) + "," +
                 to_text(s.minor_radius);
        } else {
          return "box:" + to_text(s.center.x()) + "," + to_text(s.center.y()) + "," +
                 to_text(s.center.z()) + "," + to_text(s.half_extents.x()) + "," +
                 to_text(s.half_extents.y()) + "," + to_text(s.half_extents.z());
        }
      },
      surf);
}

}  // namespace n2s3
