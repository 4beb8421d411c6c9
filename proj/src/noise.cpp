#include "n2s3/noise.hpp"

#include <cmath>

#include "n2s3/errors.hpp"
#include "n2s3/rng.hpp"

namespace n2s3 {

PointCloud corrupt_gaussian(const PointCloud& pc, double sigma, std::uint64_t seed) {
  validate_cloud(pc);
  if (sigma < 0.0 || !std::isfinite(sigma)) throw Error("sigma must be finite and >= 0");
  Rng rng(seed);
  PointCloud out;
  out.points.reserve(pc.size());
  for (const Vec3& p : pc.points) {
    const Vec3 eps(rng.normal(), rng.normal(), rng.normal());
    out.points.push_back(p + sigma * eps);
  }
  return out;
}

std::pair<PointCloud, std::vector<Vec3>> perturb_for_training(
    const PointCloud& noisy, double sigma_t, std::uint64_t seed) {
  validate_cloud(noisy);
  if (!(sigma_t > 0.0) || !std::isfinite(sigma_t)) throw Error("sigma_t must be finite and > 0");
  Rng rng(seed);
  PointCloud perturbed;
  perturbed.points.reserve(noisy.size());
  std::vector<Vec3> u;
  u.reserve(noisy.size());
  for (const Vec3& y : noisy.points) {
    u.emplace_back(rng.normal(), rng.normal(), rng.normal());
    perturbed.points.push_back(y + sigma_t * u.back());
  }
  return {std::move(perturbed), std::move(u)};
}

double sigma_schedule(int epoch, const AnnealSchedule& sched) {
  if (sched.total_epochs < 1) throw Error("schedule needs at least one epoch");
  if (!(sched.sigma_max >= sched.sigma_min) || !(sched.sigma_min > 0.0)) {
    throw Error("schedule requires sigma_max >= sigma_min > 0");
  }
  if (epoch < 0 || epoch >= sched.total_epochs) {
    throw InvalidEpoch("epoch " + std::to_string(epoch) + " outside [0, " +
                       std::to_string(sched.total_epochs) + ")");
  }
  if (sched.total_epochs == 1) return sched.sigma_max;
  const double t = double(epoch) / double(sched.total_epochs - 1);
  // std::lerp is exact at both endpoints.
  return std::lerp(sched.sigma_max, sched.sigma_min, t);
}

}  // namespace n2s3
