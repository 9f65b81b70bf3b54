#include "moransac/grasp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace moransac {

namespace {

Vec3 centroid_of(const Cluster& cluster, const PointCloud& cloud) {
  Vec3 sum = Vec3::Zero();
  for (int i : cluster.points) sum += cloud.positions[static_cast<std::size_t>(i)];
  return sum / static_cast<double>(cluster.points.size());
}

}  // namespace

GraspSelection select_grasp_point(const PointCloud& cloud, const ClusterDict& clusters,
                                  const Vec3& up, double floor_angle_deg) {
  if (up.norm() < 1e-9) throw InputError("up vector must be nonzero");
  const Vec3 up_unit = up.normalized();
  const double cos_limit = std::cos(floor_angle_deg * std::numbers::pi / 180.0);

  // Floor: the best-supported cluster whose normal is within the cone of +-up.
  int floor_id = -1;
  std::size_t floor_count = 0;
  for (const auto& [id, cluster] : clusters) {
    if (!cluster.plane || cluster.points.empty()) continue;
    if (std::abs(cluster.plane->normal.dot(up_unit)) < cos_limit) continue;
    if (cluster.points.size() > floor_count) {
      floor_count = cluster.points.size();
      floor_id = id;
    }
  }
  if (floor_id < 0) throw NoFloorError("no cluster qualifies as floor");

  // Orient the floor plane so positive side means above.
  Plane floor = *clusters.at(floor_id).plane;
  if (floor.normal.dot(up_unit) < 0) {
    floor.normal = -floor.normal;
    floor.offset = -floor.offset;
  }

  GraspSelection best;
  double best_height = -std::numeric_limits<double>::infinity();
  for (const auto& [id, cluster] : clusters) {
    if (id == floor_id || !cluster.plane || cluster.points.empty()) continue;
    const Vec3 c = centroid_of(cluster, cloud);
    const double height = floor.signed_distance(c);
    if (height > best_height) {
      best_height = height;
      best.point = c;
      best.cluster_id = id;
    }
  }
  if (best.cluster_id < 0) throw NothingToGraspError("only the floor is present");
  return best;
}

}  // namespace moransac
