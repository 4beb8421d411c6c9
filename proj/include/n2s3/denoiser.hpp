#pragma once

#include <span>
#include <vector>

#include "n2s3/metrics.hpp"
#include "n2s3/point_cloud.hpp"
#include "n2s3/score_network.hpp"
#include "n2s3/surfaces.hpp"

namespace n2s3 {

/// Per-point score estimates aligned with a cloud's index space.
struct ScoreField {
  enum class Source { network, analytic_gaussian, analytic_plane };
  std::vector<Vec3> scores;
  Source source = Source::network;
};

/// Exact score of N(mu, sigma^2 I): score_i = -(p_i - mu) / sigma^2.
ScoreField analytic_gaussian_score(const PointCloud& pc, const Vec3& mu, double sigma);

/// Exact score of a plane blurred by isotropic Gaussian noise of width
/// sigma: the restoring pull along the unit normal.
ScoreField analytic_plane_score(const PointCloud& pc, const Plane& plane, double sigma);

/// One-step posterior-mean update for Gaussian noise: out_i = p_i +
/// sigma^2 * score_i.
PointCloud tweedie_denoise(const PointCloud& pc, const ScoreField& scores, double sigma);

/// Per-point network scores over k_patch neighborhoods of the cloud.
ScoreField predict_scores(const ScoreNetwork& net, const PointCloud& pc, int k_patch);

/// predict_scores followed by tweedie_denoise.
PointCloud denoise_known_sigma(const ScoreNetwork& net, const PointCloud& pc,
                               double sigma, int k_patch);

struct SigmaSweepResult {
  double sigma_star = 0.0;
  std::vector<std::pair<double, double>> tv_trace;  // (sigma, tv_pc)
  PointCloud denoised;
};

/// Core of the unknown-noise sweep: scores are fixed, each grid sigma is
/// applied through the one-step update, and the sigma with the lowest TV_PC
/// wins; ties go to the smaller sigma.
SigmaSweepResult sigma_sweep(const PointCloud& pc, const ScoreField& scores,
                             std::span<const double> sigma_grid, const TvParams& tv);

/// Unknown-noise denoising: predict scores once, then sweep the grid.
SigmaSweepResult denoise_unknown_sigma(const ScoreNetwork& net, const PointCloud& pc,
                                       std::span<const double> sigma_grid, int k_patch,
                                       const TvParams& tv);

/// 40 logarithmically spaced values in [0.001, 0.06]; covers 1-3% noise on
/// unit-radius clouds with margin.
std::vector<double> default_sigma_grid();

}  // namespace n2s3
