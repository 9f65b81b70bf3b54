#include "moransac/ransac.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <numeric>
#include <random>

namespace moransac {

void RansacParams::validate() const {
  if (!(inlier_threshold > 0)) throw ConfigError("inlier_threshold must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (min_inliers < 3) throw ConfigError("min_inliers must be at least 3");
}

int default_min_inliers(std::size_t n) {
  return std::max<int>(50, static_cast<int>(n / 200));
}

namespace {

struct Hypothesis {
  Vec3 normal;
  double offset;
};

// Plane through three points; false when they are collinear within 1e-9.
bool hypothesis_from_triplet(const Vec3& a, const Vec3& b, const Vec3& c,
                             Hypothesis& h) {
  const Vec3 cross = (b - a).cross(c - a);
  const double len = cross.norm();
  if (len <= 1e-9) return false;
  h.normal = cross / len;
  h.offset = -h.normal.dot(a);
  return true;
}

}  // namespace

RansacResult ransac_plane(std::span<const Vec3> points, const RansacParams& params) {
  params.validate();
  const int n = static_cast<int>(points.size());
  if (n < 3) {
    throw InsufficientPointsError("plane RANSAC needs at least 3 points, got " +
                                  std::to_string(n));
  }

  int best_count = 0;
  Hypothesis best{};
  bool have_best = false;
  std::uniform_int_distribution<int> pick(0, n - 1);
  // Degenerate triplets do not consume iterations; the attempt cap keeps
  // fully collinear inputs from spinning forever.
  const long max_attempts = std::max<long>(1000, 20L * params.max_iterations);
  int valid_iters = 0;
  for (long attempt = 0; attempt < max_attempts && valid_iters < params.max_iterations;
       ++attempt) {
    std::mt19937_64 rng(mix_seed(params.seed, static_cast<std::uint64_t>(attempt)));
    const int i0 = pick(rng);
    int i1 = pick(rng);
    int i2 = pick(rng);
    if (i0 == i1 || i0 == i2 || i1 == i2) continue;
    Hypothesis h;
    if (!hypothesis_from_triplet(points[i0], points[i1], points[i2], h)) continue;
    ++valid_iters;
    int count = 0;
    for (int i = 0; i < n; ++i) {
      if (std::abs(h.normal.dot(points[i]) + h.offset) < params.inlier_threshold) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best = h;
      have_best = true;
    }
  }
  if (!have_best || best_count < std::max(3, params.min_inliers)) {
    throw NoPlaneFoundError("no plane consensus of at least " +
                            std::to_string(params.min_inliers) + " points (best " +
                            std::to_string(best_count) + ")");
  }

  std::vector<int> inliers;
  inliers.reserve(static_cast<std::size_t>(best_count));
  for (int i = 0; i < n; ++i) {
    if (std::abs(best.normal.dot(points[i]) + best.offset) < params.inlier_threshold) {
      inliers.push_back(i);
    }
  }

  // Refit once on the consensus set, then recount once.
  Plane plane;
  plane.normal = best.normal;
  plane.offset = best.offset;
  plane.canonicalize();
  try {
    std::vector<Vec3> consensus;
    consensus.reserve(inliers.size());
    for (int i : inliers) consensus.push_back(points[i]);
    plane = fit_plane_lsq(consensus);
  } catch (const DegenerateFitError&) {
    // Keep the raw hypothesis when the consensus set is too flat to refit.
  }
  inliers.clear();
  for (int i = 0; i < n; ++i) {
    if (plane.distance(points[i]) < params.inlier_threshold) inliers.push_back(i);
  }
  if (static_cast<int>(inliers.size()) < params.min_inliers) {
    throw NoPlaneFoundError("consensus fell below min_inliers after refit");
  }
  return {plane, std::move(inliers)};
}

RansacResult ransac_plane(const std::vector<Vec3>& points,
                          const std::vector<int>& subset,
                          const RansacParams& params) {
  std::vector<Vec3> local;
  local.reserve(subset.size());
  for (int i : subset) local.push_back(points[static_cast<std::size_t>(i)]);
  RansacResult result = ransac_plane(std::span<const Vec3>(local), params);
  for (int& idx : result.inliers) idx = subset[static_cast<std::size_t>(idx)];
  return result;
}

Segmentation sequential_multiplane(const PointCloud& cloud,
                                   const RansacParams& params, int max_planes) {
  params.validate();
  if (cloud.size() < 3) {
    throw InsufficientPointsError("sequential multiplane needs at least 3 points");
  }
  Segmentation seg;
  seg.labels.assign(cloud.size(), -1);

  std::vector<int> residual(cloud.size());
  std::iota(residual.begin(), residual.end(), 0);

  for (int label = 0; label < max_planes && static_cast<int>(residual.size()) >= 3;
       ++label) {
    RansacParams round = params;
    round.seed = mix_seed(params.seed, static_cast<std::uint64_t>(label) + 1);
    RansacResult found;
    try {
      found = ransac_plane(cloud.positions, residual, round);
    } catch (const NoPlaneFoundError&) {
      break;
    }
    std::vector<bool> taken(cloud.size(), false);
    for (int idx : found.inliers) {
      seg.labels[static_cast<std::size_t>(idx)] = label;
      taken[static_cast<std::size_t>(idx)] = true;
    }
    std::vector<int> next;
    next.reserve(residual.size() - found.inliers.size());
    for (int idx : residual) {
      if (!taken[static_cast<std::size_t>(idx)]) next.push_back(idx);
    }
    residual = std::move(next);
  }
  return seg;
}

}  // namespace moransac
