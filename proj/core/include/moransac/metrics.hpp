#pragma once

#include <vector>

#include "moransac/point_cloud.hpp"
#include "moransac/segmentation.hpp"

namespace moransac {

struct MetricsReport {
  double voi = 0;  // nats, lower is better
  double ri = 0;   // [0, 1]
  double sc = 0;   // [0, 1]
  double voxel_size = 0;
  std::size_t voxel_count = 0;
};

/// Majority label per occupied voxel (grid anchored at the cloud's minimum
/// corner, voxels ordered by grid coordinate). Ties resolve to the lowest
/// label; unassigned points only count when a voxel holds nothing else, in
/// which case it stays -1.
std::vector<int> voxelize_labels(const PointCloud& cloud, const Segmentation& seg,
                                 double voxel);

/// Fraction of unordered element pairs on which the two labelings agree
/// (same-cluster vs different-cluster), computed from contingency sums.
/// -1 counts as an ordinary label here.
double rand_index(const std::vector<int>& a, const std::vector<int>& b);

/// VOI = H(a) + H(b) - 2 I(a; b), natural-log entropies.
double variation_of_information(const std::vector<int>& a, const std::vector<int>& b);

/// Ground truth covered by prediction: the |R|-weighted mean over gt regions
/// of the best IoU against predicted regions. Unassigned elements form no gt
/// region (the weight total is the gt-assigned count), and the predicted
/// unassigned "region" is never rewarded with a match.
double segmentation_covering(const std::vector<int>& gt, const std::vector<int>& pred);

/// Voxelizes gt and pred on the identical grid and compares the voxel label
/// lists with all three metrics. Throws InputError when no voxel is occupied.
MetricsReport evaluate(const PointCloud& cloud, const Segmentation& gt,
                       const Segmentation& pred, double voxel);

std::vector<MetricsReport> evaluate_sweep(const PointCloud& cloud,
                                          const Segmentation& gt,
                                          const Segmentation& pred,
                                          const std::vector<double>& voxels);

}  // namespace moransac
