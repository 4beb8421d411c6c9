#include "n2s3/metrics.hpp"

#include <cmath>
#include <numeric>

#include "n2s3/errors.hpp"
#include "n2s3/kdtree.hpp"
#include "n2s3/rng.hpp"

namespace n2s3 {

void TvParams::validate() const {
  if (k_neighbors < 1) throw InvalidK("tv_pc: k_neighbors must be >= 1");
  // epsilon == 0 is the sharp L1 limit; it is allowed for analysis even
  // though estimation configs keep it positive.
  if (epsilon < 0.0) throw Error("tv_pc: epsilon must be >= 0");
  if (weighting == Weighting::gaussian && !(kernel_sigma > 0.0)) {
    throw Error("tv_pc: gaussian weighting needs kernel_sigma > 0");
  }
}

double tv_pc(const PointCloud& pc, const TvParams& params) {
  params.validate();
  validate_cloud(pc);
  const int k = params.k_neighbors;
  if (pc.size() <= std::size_t(k)) {
    throw InvalidK("tv_pc: need more than k_neighbors points");
  }

  const KnnIndex index(pc);
  const double eps2 = params.epsilon * params.epsilon;
  const double inv_two_ks2 = params.weighting == TvParams::Weighting::gaussian
                                 ? 1.0 / (2.0 * params.kernel_sigma * params.kernel_sigma)
                                 : 0.0;

  double total = 0.0;
  std::vector<std::pair<double, int>> nbrs;
  nbrs.reserve(std::size_t(k) + 1);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    // Query k+1 and drop the point itself; when duplicates push the point
    // out of its own result list, the k nearest others are simply the
    // first k entries.
    index.knn_squared_into(pc[i], k + 1, nbrs);
    int taken = 0;
    for (const auto& [d2, j] : nbrs) {
      if (j == int(i)) continue;
      if (taken == k) break;
      const double charbonnier = std::sqrt(d2 + eps2);
      if (params.weighting == TvParams::Weighting::gaussian) {
        total += std::exp(-d2 * inv_two_ks2) * charbonnier;
      } else {
        total += charbonnier;
      }
      ++taken;
    }
  }
  return total;
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  validate_cloud(a);
  validate_cloud(b);

  const KnnIndex ib(b);
  double sum_a = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum_a += ib.nearest_squared(a[i]).second;

  const KnnIndex ia(a);
  double sum_b = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) sum_b += ia.nearest_squared(b[i]).second;

  return sum_a / double(a.size()) + sum_b / double(b.size());
}

double point_to_surface(const PointCloud& pc, const AnalyticSurface& surf) {
  validate_cloud(pc);
  double sum = 0.0;
  for (const Vec3& p : pc.points) sum += surface_distance(surf, p);
  return sum / double(pc.size());
}

std::pair<PointCloud, std::vector<int>> shuffle_cloud(const PointCloud& pc,
                                                      std::uint64_t seed) {
  std::vector<int> perm(pc.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[std::size_t(rng.below(i))]);
  }
  return {apply_permutation(pc, perm), std::move(perm)};
}

PointCloud apply_permutation(const PointCloud& pc, const std::vector<int>& perm) {
  if (perm.size() != pc.size()) throw LengthMismatch("permutation length mismatch");
  PointCloud out;
  out.points.reserve(pc.size());
  for (int p : perm) out.points.push_back(pc[std::size_t(p)]);
  return out;
}

PointCloud transform_cloud(const PointCloud& pc, double scale, const Vec3& translation) {
  PointCloud out;
  out.points.reserve(pc.size());
  for (const Vec3& p : pc.points) out.points.push_back(scale * p + translation);
  return out;
}

}  // namespace n2s3
