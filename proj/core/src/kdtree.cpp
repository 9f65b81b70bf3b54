#include "moransac/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace moransac {

namespace {
constexpr int kLeafSize = 16;
}

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(points_.size()));
  }
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double ca = points_[a][axis];
                     const double cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  return id;
}

void KdTree::search(int node, const Vec3& query, int k,
                    std::vector<std::pair<double, int>>& heap) const {
  const Node& n = nodes_[node];
  if (n.left < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const int idx = order_[i];
      const double d2 = (points_[idx] - query).squaredNorm();
      const std::pair<double, int> cand{d2, idx};
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = query[n.axis] - n.split;
  const int near = diff < 0 ? n.left : n.right;
  const int far = diff < 0 ? n.right : n.left;
  search(near, query, k, heap);
  if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().first) {
    search(far, query, k, heap);
  }
}

std::vector<int> KdTree::knn(const Vec3& query, int k) const {
  if (k > static_cast<int>(points_.size())) {
    throw InsufficientPointsError("knn: k=" + std::to_string(k) + " exceeds " +
                                  std::to_string(points_.size()) + " points");
  }
  if (k <= 0) return {};
  std::vector<std::pair<double, int>> heap;
  heap.reserve(static_cast<std::size_t>(k) + 1);
  search(root_, query, k, heap);
  std::sort(heap.begin(), heap.end());
  std::vector<int> out(heap.size());
  for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].second;
  return out;
}

std::vector<std::vector<int>> knn(const std::vector<Vec3>& targets,
                                  const std::vector<Vec3>& queries, int k) {
  const KdTree tree(targets);
  std::vector<std::vector<int>> out;
  out.reserve(queries.size());
  for (const Vec3& q : queries) out.push_back(tree.knn(q, k));
  return out;
}

}  // namespace moransac
