#include "n2s3/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "n2s3/errors.hpp"

namespace n2s3 {

namespace {

// Heap entries are (squared distance, index); the lexicographic max sits on
// top, so the element evicted first is the farthest and, among equals, the
// one with the highest index. That realizes the ascending-index tie rule.
inline void heap_insert(std::vector<std::pair<double, int>>& heap, std::size_t k,
                        std::pair<double, int> cand) {
  if (heap.size() < k) {
    heap.push_back(cand);
    std::push_heap(heap.begin(), heap.end());
  } else if (cand < heap.front()) {
    std::pop_heap(heap.begin(), heap.end());
    heap.back() = cand;
    std::push_heap(heap.begin(), heap.end());
  }
}

}  // namespace

KnnIndex::KnnIndex(const PointCloud& pc) {
  validate_cloud(pc);
  points_ = pc.points;
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * points_.size() / kLeafSize + 8);
  root_ = build(0, int(points_.size()));
}

int KnnIndex::build(int begin, int end) {
  const int id = int(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, 0.0, -1, -1});
  if (end - begin <= kLeafSize) return id;

  // Split along the widest axis at the median point.
  Vec3 lo = points_[std::size_t(order_[std::size_t(begin)])];
  Vec3 hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    const Vec3& p = points_[std::size_t(order_[std::size_t(i)])];
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide; keep as leaf

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int a, int b) {
                     return points_[std::size_t(a)][axis] < points_[std::size_t(b)][axis];
                   });
  const double split = points_[std::size_t(order_[std::size_t(mid)])][axis];

  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[std::size_t(id)].axis = axis;
  nodes_[std::size_t(id)].split = split;
  nodes_[std::size_t(id)].left = left;
  nodes_[std::size_t(id)].right = right;
  return id;
}

void KnnIndex::search(int node, const Vec3& q, std::size_t k,
                      std::vector<std::pair<double, int>>& heap) const {
  const Node& n = nodes_[std::size_t(node)];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const int idx = order_[std::size_t(i)];
      const double d2 = (q - points_[std::size_t(idx)]).squaredNorm();
      heap_insert(heap, k, {d2, idx});
    }
    return;
  }

  const double diff = q[n.axis] - n.split;
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;

  search(near, q, k, heap);
  // A far-side point can still win a tie at equal distance with a smaller
  // index, so only prune on a strictly larger plane distance.
  if (heap.size() < k || diff * diff <= heap.front().first) {
    search(far, q, k, heap);
  }
}

void KnnIndex::knn_squared_into(const Vec3& q, int k,
                                std::vector<std::pair<double, int>>& out) const {
  if (k < 1 || std::size_t(k) > points_.size()) {
    throw InvalidK("k must be in [1, " + std::to_string(points_.size()) + "], got " +
                   std::to_string(k));
  }
  out.clear();
  search(root_, q, std::size_t(k), out);
  std::sort(out.begin(), out.end());
}

std::pair<int, double> KnnIndex::nearest_squared(const Vec3& q) const {
  std::vector<std::pair<double, int>> heap;
  heap.reserve(1);
  search(root_, q, 1, heap);
  return {heap.front().second, heap.front().first};
}

std::vector<std::pair<int, double>> KnnIndex::knn(const Vec3& q, int k) const {
  std::vector<std::pair<double, int>> sq;
  sq.reserve(std::size_t(k));
  knn_squared_into(q, k, sq);
  std::vector<std::pair<int, double>> out;
  out.reserve(sq.size());
  for (const auto& [d2, idx] : sq) out.emplace_back(idx, std::sqrt(d2));
  return out;
}

std::vector<std::pair<int, double>> knn_query(const KnnIndex& idx, const Vec3& q,
                                              int k) {
  return idx.knn(q, k);
}

}  // namespace n2s3
