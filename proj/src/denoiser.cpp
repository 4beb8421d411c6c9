#include "n2s3/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "n2s3/errors.hpp"
#include "n2s3/kdtree.hpp"
#include "n2s3/parallel.hpp"

namespace n2s3 {

ScoreField analytic_gaussian_score(const PointCloud& pc, const Vec3& mu, double sigma) {
  validate_cloud(pc);
  if (!(sigma > 0.0)) throw Error("analytic_gaussian_score: sigma must be > 0");
  const double var = sigma * sigma;
  ScoreField field;
  field.source = ScoreField::Source::analytic_gaussian;
  field.scores.reserve(pc.size());
  for (const Vec3& p : pc.points) field.scores.push_back(-(p - mu) / var);
  return field;
}

ScoreField analytic_plane_score(const PointCloud& pc, const Plane& plane, double sigma) {
  validate_cloud(pc);
  if (!(sigma > 0.0)) throw Error("analytic_plane_score: sigma must be > 0");
  const double var = sigma * sigma;
  ScoreField field;
  field.source = ScoreField::Source::analytic_plane;
  field.scores.reserve(pc.size());
  for (const Vec3& p : pc.points) {
    field.scores.push_back(-((plane.normal.dot(p) - plane.offset) / var) * plane.normal);
  }
  return field;
}

PointCloud tweedie_denoise(const PointCloud& pc, const ScoreField& scores, double sigma) {
  if (scores.scores.size() != pc.size()) {
    throw LengthMismatch("tweedie_denoise: score field does not match the cloud");
  }
  if (sigma < 0.0) throw Error("tweedie_denoise: sigma must be >= 0");
  const double var = sigma * sigma;
  PointCloud out;
  out.points.reserve(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    out.points.push_back(pc[i] + var * scores.scores[i]);
  }
  return out;
}

ScoreField predict_scores(const ScoreNetwork& net, const PointCloud& pc, int k_patch) {
  validate_cloud(pc);
  const KnnIndex index(pc);
  ScoreField field;
  field.source = ScoreField::Source::network;
  field.scores.resize(pc.size());
  parallel_for(pc.size(), [&](std::size_t begin, std::size_t end) {
    ScoreNetwork::Workspace ws = net.make_workspace();
    for (std::size_t i = begin; i < end; ++i) {
      const PatchFeatures patch = extract_patch(pc, index, int(i), k_patch);
      field.scores[i] = net.forward(patch, ws);
    }
  });
  return field;
}

PointCloud denoise_known_sigma(const ScoreNetwork& net, const PointCloud& pc,
                               double sigma, int k_patch) {
  return tweedie_denoise(pc, predict_scores(net, pc, k_patch), sigma);
}

SigmaSweepResult sigma_sweep(const PointCloud& pc, const ScoreField& scores,
                             std::span<const double> sigma_grid, const TvParams& tv) {
  if (sigma_grid.empty()) throw Error("sigma_sweep: empty sigma grid");
  for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
    if (!(sigma_grid[i] > 0.0)) throw Error("sigma_sweep: grid values must be > 0");
    if (i > 0 && !(sigma_grid[i] > sigma_grid[i - 1])) {
      throw Error("sigma_sweep: grid must be strictly ascending");
    }
  }
  if (scores.scores.size() != pc.size()) {
    throw LengthMismatch("sigma_sweep: score field does not match the cloud");
  }

  SigmaSweepResult result;
  result.tv_trace.resize(sigma_grid.size());
  parallel_for(sigma_grid.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      const double sigma = sigma_grid[g];
      const PointCloud x = tweedie_denoise(pc, scores, sigma);
      result.tv_trace[g] = {sigma, tv_pc(x, tv)};
    }
  });

  // Ascending scan with a strict comparison: ties resolve to the smaller
  // sigma, the less aggressive displacement.
  std::size_t best = 0;
  for (std::size_t g = 1; g < sigma_grid.size(); ++g) {
    if (result.tv_trace[g].second < result.tv_trace[best].second) best = g;
  }
  result.sigma_star = sigma_grid[best];
  result.denoised = tweedie_denoise(pc, scores, result.sigma_star);
  return result;
}

SigmaSweepResult denoise_unknown_sigma(const ScoreNetwork& net, const PointCloud& pc,
                                       std::span<const double> sigma_grid, int k_patch,
                                       const TvParams& tv) {
  // Algorithm structure: scores once, grid applied to the fixed field.
  const ScoreField scores = predict_scores(net, pc, k_patch);
  return sigma_sweep(pc, scores, sigma_grid, tv);
}

std::vector<double> default_sigma_grid() {
  constexpr int kCount = 40;
  constexpr double kLo = 0.001;
  constexpr double kHi = 0.06;
  std::vector<double> grid(kCount);
  const double log_lo = std::log(kLo);
  const double log_hi = std::log(kHi);
  for (int i = 0; i < kCount; ++i) {
    grid[std::size_t(i)] = std::exp(std::lerp(log_lo, log_hi, double(i) / (kCount - 1)));
  }
  grid.front() = kLo;
  grid.back() = kHi;
  return grid;
}

}  // namespace n2s3
