#pragma once

#include "moransac/merge.hpp"
#include "moransac/point_cloud.hpp"

namespace moransac {

struct GraspSelection {
  Vec3 point = Vec3::Zero();
  int cluster_id = -1;
};

/// Suction grasp target: the floor is the largest cluster whose plane normal
/// lies within floor_angle_deg of +-up; among the remaining planar clusters,
/// the one whose centroid sits highest above the floor plane wins (ties take
/// the lowest cluster id) and its centroid is returned.
///
/// Throws NoFloorError when no cluster qualifies as floor and
/// NothingToGraspError when only the floor is present.
GraspSelection select_grasp_point(const PointCloud& cloud, const ClusterDict& clusters,
                                  const Vec3& up, double floor_angle_deg = 30.0);

}  // namespace moransac
