#include "moransac/normals.hpp"

#include <Eigen/Geometry>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "moransac/kdtree.hpp"

namespace moransac {

namespace {

void canonicalize_direction(Vec3& n) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(n[i]) > 1e-12) {
      if (n[i] < 0) n = -n;
      return;
    }
  }
}

// Unit vector orthogonal to dir, chosen as cross(dir, e_i) for the lowest
// coordinate axis not parallel to dir.
Vec3 orthogonal_fallback(const Vec3& dir) {
  for (int i = 0; i < 3; ++i) {
    Vec3 axis = Vec3::Zero();
    axis[i] = 1.0;
    Vec3 cand = dir.cross(axis);
    const double len = cand.norm();
    if (len > 1e-9) return cand / len;
  }
  return Vec3(0, 0, 1);
}

}  // namespace

NormalsResult compute_normals(const PointCloud& cloud, int k) {
  const std::size_t n = cloud.size();
  if (k < 3) throw InsufficientPointsError("normal estimation needs k >= 3");
  if (n < static_cast<std::size_t>(k)) {
    throw InsufficientPointsError("normal estimation needs at least k=" +
                                  std::to_string(k) + " points, cloud has " +
                                  std::to_string(n));
  }
  const KdTree tree(cloud.positions);
  NormalsResult result;
  result.normals.resize(n);
  result.degenerate.assign(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<int> nb = tree.knn(cloud.positions[i], k);
    Vec3 mean = Vec3::Zero();
    for (int j : nb) mean += cloud.positions[static_cast<std::size_t>(j)];
    mean /= static_cast<double>(nb.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int j : nb) {
      const Vec3 d = cloud.positions[static_cast<std::size_t>(j)] - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(nb.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Vec3 evals = eig.eigenvalues();
    Vec3 normal;
    if (evals[1] > 1e-12 * std::max(evals[2], 1e-30)) {
      normal = eig.eigenvectors().col(0);
    } else {
      result.degenerate[i] = 1;
      normal = orthogonal_fallback(evals[2] > 0 ? Vec3(eig.eigenvectors().col(2))
                                                : Vec3(1, 0, 0));
    }
    canonicalize_direction(normal);
    // Viewpoint orientation: face the origin; ties flip too, making the
    // through-origin plane deterministic.
    if (normal.dot(cloud.positions[i]) >= 0) normal = -normal;
    result.normals[i] = normal;
  }
  return result;
}

PointCloud estimate_normals(const PointCloud& cloud, int k) {
  PointCloud out = cloud;
  out.normals = compute_normals(cloud, k).normals;
  return out;
}

}  // namespace moransac
