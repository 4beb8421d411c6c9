#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "n2s3/point_cloud.hpp"

namespace n2s3 {

/// Noise family and level. The level is a fraction of the bounding-sphere
/// radius, so on unit-sphere-normalized clouds it equals the absolute
/// standard deviation.
struct NoiseSpec {
  enum class Kind { gaussian_isotropic };
  Kind kind = Kind::gaussian_isotropic;
  double level = 0.01;
};

/// Linear training-noise schedule from sigma_max down to sigma_min.
struct AnnealSchedule {
  double sigma_max = 0.031;
  double sigma_min = 0.001;
  int total_epochs = 400;
};

/// Adds iid isotropic Gaussian noise with standard deviation sigma to every
/// point. Deterministic for a given seed.
PointCloud corrupt_gaussian(const PointCloud& pc, double sigma, std::uint64_t seed);

/// Training perturbation: returns y' with y'_i = y_i + sigma_t * u_i and the
/// unit-variance noise vectors u themselves, so the loss can reuse them.
std::pair<PointCloud, std::vector<Vec3>> perturb_for_training(
    const PointCloud& noisy, double sigma_t, std::uint64_t seed);

/// sigma_t at the given epoch: sigma_max at epoch 0, sigma_min at the last
/// epoch, linear in between. Throws InvalidEpoch outside [0, total_epochs).
double sigma_schedule(int epoch, const AnnealSchedule& sched);

}  // namespace n2s3
