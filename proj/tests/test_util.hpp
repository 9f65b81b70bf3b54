#pragma once

#include <Eigen/Geometry>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "moransac/point_cloud.hpp"

namespace moransac::testutil {

inline PointCloud random_cloud(int n, std::uint64_t seed, double extent = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-extent / 2, extent / 2);
  PointCloud cloud;
  cloud.positions.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) cloud.positions.emplace_back(uni(rng), uni(rng), uni(rng));
  return cloud;
}

/// Points on the plane {x: n.x + d = 0} within a square patch, with Gaussian
/// off-plane noise.
inline std::vector<Vec3> plane_patch(const Vec3& normal, double offset, double extent,
                                     int n, double sigma, std::uint64_t seed) {
  const Vec3 nn = normal.normalized();
  // In-plane frame.
  Vec3 u = nn.cross(Vec3(1, 0, 0));
  if (u.norm() < 1e-6) u = nn.cross(Vec3(0, 1, 0));
  u.normalize();
  const Vec3 v = nn.cross(u).normalized();
  const Vec3 origin = -offset * nn;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-extent / 2, extent / 2);
  std::normal_distribution<double> gauss(0.0, sigma);
  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    points.push_back(origin + u * uni(rng) + v * uni(rng) +
                     (sigma > 0 ? Vec3(nn * gauss(rng)) : Vec3::Zero()));
  }
  return points;
}

/// Unique scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("moransac_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace moransac::testutil
