#pragma once

#include <utility>
#include <vector>

#include "n2s3/point_cloud.hpp"

namespace n2s3 {

/// Exact k-nearest-neighbor index: kd-tree with median splits along the
/// widest axis. Results are identical to a brute-force scan, with ties at
/// equal distance broken by ascending point index. Immutable once built;
/// concurrent queries are safe.
class KnnIndex {
public:
  explicit KnnIndex(const PointCloud& pc);

  std::size_t size() const { return points_.size(); }

  /// k nearest neighbors of q among the indexed points, ascending by
  /// (distance, index). Throws InvalidK unless 1 <= k <= size().
  std::vector<std::pair<int, double>> knn(const Vec3& q, int k) const;

  /// Same neighbor set with squared distances; the metrics use this to stay
  /// bit-identical with brute-force recomputation.
  void knn_squared_into(const Vec3& q, int k,
                        std::vector<std::pair<double, int>>& out) const;

  /// Index and squared distance of the single nearest neighbor.
  std::pair<int, double> nearest_squared(const Vec3& q) const;

  const Vec3& point(int i) const { return points_[std::size_t(i)]; }

private:
  struct Node {
    int begin = 0;
    int end = 0;       // leaf covers order_[begin, end)
    int axis = -1;     // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
  };

  int build(int begin, int end);
  void search(int node, const Vec3& q, std::size_t k,
              std::vector<std::pair<double, int>>& heap) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;   // permutation of point indices, leaf-contiguous
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 16;
};

/// Convenience wrapper matching the one-shot call sites.
std::vector<std::pair<int, double>> knn_query(const KnnIndex& idx, const Vec3& q,
                                              int k);

}  // namespace n2s3
