#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "moransac/plane.hpp"
#include "moransac/segmentation.hpp"

namespace moransac {

struct RansacParams {
  double inlier_threshold = 0.005;  // meters; matches the merge delta default
  int max_iterations = 200;
  int min_inliers = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Consensus floor used by the sequential baseline: max(50, 0.5% of N).
int default_min_inliers(std::size_t n);

struct RansacResult {
  Plane plane;
  std::vector<int> inliers;  // ascending indices into the input points
};

/// Classic 3-point-hypothesis plane RANSAC: seeded sampling, consensus
/// counting at the inlier threshold, one least-squares refit on the best
/// consensus followed by one recount. Degenerate (near-collinear) samples are
/// skipped without consuming an iteration. Deterministic for a fixed seed.
///
/// Throws InsufficientPointsError for fewer than 3 points and
/// NoPlaneFoundError when the best consensus stays below min_inliers.
RansacResult ransac_plane(std::span<const Vec3> points, const RansacParams& params);

/// Same, restricted to a subset; returned inlier indices refer to the
/// original point vector.
RansacResult ransac_plane(const std::vector<Vec3>& points,
                          const std::vector<int>& subset,
                          const RansacParams& params);

/// Sequential multi-plane baseline: repeats ransac_plane on the residual
/// points, assigning labels 0, 1, 2, ... in extraction order until no plane
/// is found or max_planes is reached. Leftover points get label -1.
Segmentation sequential_multiplane(const PointCloud& cloud,
                                   const RansacParams& params, int max_planes);

}  // namespace moransac
