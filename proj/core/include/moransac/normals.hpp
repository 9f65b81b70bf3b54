#pragma once

#include <cstdint>
#include <vector>

#include "moransac/point_cloud.hpp"

namespace moransac {

struct NormalsResult {
  std::vector<Vec3> normals;
  /// Marks neighborhoods whose covariance had rank < 2 (collinear or
  /// coincident points); those normals are a deterministic fallback.
  std::vector<std::uint8_t> degenerate;
};

/// PCA normal per point from its k nearest neighbors (the point itself
/// counts as a neighbor). Normals are unit length and oriented to face the
/// origin. Throws InsufficientPointsError when the cloud has fewer than k
/// points or k < 3.
NormalsResult compute_normals(const PointCloud& cloud, int k);

/// Convenience wrapper returning a copy of the cloud with normals set.
PointCloud estimate_normals(const PointCloud& cloud, int k);

}  // namespace moransac
