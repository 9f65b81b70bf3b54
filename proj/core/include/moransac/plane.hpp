#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "moransac/point_cloud.hpp"

namespace moransac {

/// Plane {x : normal . x + offset = 0} with unit normal and canonical sign:
/// the first nonzero normal component is positive.
struct Plane {
  Vec3 normal{0, 0, 1};
  double offset = 0;

  /// Normalizes and flips into canonical sign. Throws DegenerateFitError on a
  /// near-zero normal.
  void canonicalize();

  double distance(const Vec3& p) const { return std::abs(normal.dot(p) + offset); }
  double signed_distance(const Vec3& p) const { return normal.dot(p) + offset; }

  static Plane from_normal_point(const Vec3& normal, const Vec3& point);
};

inline double point_plane_distance(const Plane& plane, const Vec3& p) {
  return plane.distance(p);
}

/// Total-least-squares plane through the centroid (covariance PCA, smallest
/// eigenvector). Throws DegenerateFitError for collinear or duplicate point
/// sets and InsufficientPointsError for fewer than 3 points.
Plane fit_plane_lsq(std::span<const Vec3> points);
Plane fit_plane_lsq(const std::vector<Vec3>& points, const std::vector<int>& indices);

}  // namespace moransac
