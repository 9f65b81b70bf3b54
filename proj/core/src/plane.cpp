#include "moransac/plane.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace moransac {

void Plane::canonicalize() {
  const double len = normal.norm();
  if (!(len > 1e-12)) throw DegenerateFitError("plane normal is near zero");
  normal /= len;
  offset /= len;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(normal[i]) > 1e-12) {
      if (normal[i] < 0) {
        normal = -normal;
        offset = -offset;
      }
      break;
    }
  }
}

Plane Plane::from_normal_point(const Vec3& normal, const Vec3& point) {
  Plane plane;
  plane.normal = normal;
  plane.offset = -normal.dot(point);
  plane.canonicalize();
  return plane;
}

Plane fit_plane_lsq(std::span<const Vec3> points) {
  if (points.size() < 3) {
    throw InsufficientPointsError("plane fit needs at least 3 points, got " +
                                  std::to_string(points.size()));
  }
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Vec3 evals = eig.eigenvalues();  // ascending
  // Rank < 2 (collinear or coincident points) leaves the normal unconstrained.
  if (!(evals[1] > 1e-12 * std::max(evals[2], 1e-30))) {
    throw DegenerateFitError("plane fit is degenerate (collinear or duplicate points)");
  }
  Plane plane;
  plane.normal = eig.eigenvectors().col(0);
  plane.offset = -plane.normal.dot(centroid);
  plane.canonicalize();
  return plane;
}

Plane fit_plane_lsq(const std::vector<Vec3>& points, const std::vector<int>& indices) {
  std::vector<Vec3> subset;
  subset.reserve(indices.size());
  for (int i : indices) subset.push_back(points[static_cast<std::size_t>(i)]);
  return fit_plane_lsq(subset);
}

}  // namespace moransac
