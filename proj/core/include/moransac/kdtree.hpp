#pragma once

#include <vector>

#include "moransac/point_cloud.hpp"

namespace moransac {

/// Static 3D kd-tree over a copied point set. Queries return exact k-nearest
/// neighbors ordered by ascending (distance, index), so ties always resolve
/// toward the lower point index.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);

  std::vector<int> knn(const Vec3& query, int k) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int begin = 0;  // leaf range into order_
    int end = 0;
    int axis = 0;
    double split = 0;
  };

  int build(int begin, int end);
  void search(int node, const Vec3& query, int k,
              std::vector<std::pair<double, int>>& heap) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

/// Exact k nearest targets for every query, ascending by (distance, index).
/// Throws InsufficientPointsError when k exceeds the target count.
std::vector<std::vector<int>> knn(const std::vector<Vec3>& targets,
                                  const std::vector<Vec3>& queries, int k);

}  // namespace moransac
