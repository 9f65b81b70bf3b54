#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "moransac/image_io.hpp"
#include "moransac/point_cloud.hpp"

namespace moransac {

/// Pinhole intrinsics. depth_scale converts raw depth units to meters.
struct CameraIntrinsics {
  double fx = 0;
  double fy = 0;
  double cx = 0;
  double cy = 0;
  double depth_scale = 0.001;

  void validate() const;
};

CameraIntrinsics read_intrinsics(const std::filesystem::path& file);
void write_intrinsics(const std::filesystem::path& file, const CameraIntrinsics& k);

/// Back-projects a depth image: pixel (u, v) with depth d > 0 maps to
/// ((u - cx) z / fx, (v - cy) z / fy, z) with z = d * depth_scale, scanning
/// in raster order. Zero-depth pixels are dropped; colors are carried through
/// when an RGB image of identical resolution is given.
///
/// If pixel_indices is non-null it receives, per output point, the linear
/// index (v * width + u) of its source pixel.
///
/// Throws DimensionError on resolution mismatch and EmptyCloudError when no
/// pixel has positive depth.
PointCloud depth_to_cloud(const DepthImage& depth, const CameraIntrinsics& k,
                          const RgbImage* rgb = nullptr,
                          std::vector<int>* pixel_indices = nullptr);

/// Z-buffered pinhole projection of a cloud; the nearest point wins each
/// pixel. point_index holds the winning source point per pixel (-1 if none).
struct FrameRender {
  DepthImage depth;
  RgbImage rgb;
  std::vector<int> point_index;
};

FrameRender project_to_frame(const PointCloud& cloud, const CameraIntrinsics& k,
                             int width, int height);

}  // namespace moransac
