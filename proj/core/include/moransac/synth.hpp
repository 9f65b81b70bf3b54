#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "moransac/camera.hpp"
#include "moransac/plane.hpp"
#include "moransac/segmentation.hpp"

namespace moransac {

enum class ObjectKind { kBox, kCylinder };

struct SceneSpec {
  double floor_extent = 1.0;  // square floor side (m)
  int object_count = 5;
  std::vector<ObjectKind> kinds{ObjectKind::kBox};
  double min_size = 0.08;   // object footprint range (m)
  double max_size = 0.25;
  double min_height = 0.05;
  double max_height = 0.3;
  int box_faces_min = 3;    // visible faces per box, top included, 1..3
  int box_faces_max = 3;
  int points_per_face = 600;
  double noise_sigma = 0.002;      // along-normal, truncated at 4 sigma
  double outlier_fraction = 0.05;  // fraction of the final cloud
  double cylinder_facet_width = 0.02;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A generated scene: cloud with per-object colors and exact per-face
/// normals, ground-truth face labels (-1 for outliers), and the analytic
/// plane per label.
struct Scene {
  PointCloud cloud;
  Segmentation gt;
  std::vector<Plane> gt_planes;
};

/// Appends a noisy rectangular patch and returns its new ground-truth label.
/// u_axis/v_axis are unit in-plane directions; points get the exact face
/// normal and color +- small jitter.
int add_patch(Scene& scene, const Vec3& center, const Vec3& u_axis,
              const Vec3& v_axis, double u_extent, double v_extent, int n_points,
              const Vec3& color, double sigma, std::mt19937_64& rng);

/// Same, with uniform samples on a disk of the given radius.
int add_disk(Scene& scene, const Vec3& center, const Vec3& u_axis,
             const Vec3& v_axis, double radius, int n_points, const Vec3& color,
             double sigma, std::mt19937_64& rng);

/// Uniform outliers (label -1) in the axis-aligned box [lo, hi].
void add_outliers(Scene& scene, const Vec3& lo, const Vec3& hi, int n,
                  std::mt19937_64& rng);

/// Floor plus randomly posed objects with per-face ground truth. Throws
/// SceneSpecError when objects cannot fit the floor.
Scene gen_scene(const SceneSpec& spec);

/// Scene archive: a directory holding cloud.ply, gt_labels.txt, planes.csv
/// and spec.txt.
void save_scene(const std::filesystem::path& dir, const Scene& scene,
                const SceneSpec* spec = nullptr);
Scene load_scene(const std::filesystem::path& dir);

struct LoadedFrame {
  PointCloud cloud;  // camera coordinates, normals estimated
  std::optional<Segmentation> gt;
};

/// RGB-D ingestion: back-projects the depth image (colors attached when an
/// RGB image is given), estimates normals, and maps the optional per-pixel
/// label image onto the surviving points.
LoadedFrame load_rgbd_frame(const std::filesystem::path& depth_path,
                            const std::filesystem::path& rgb_path,
                            const std::filesystem::path& intrinsics_path,
                            const std::filesystem::path& gt_label_path = {},
                            int normal_k = 30);

/// Top-down pinhole rendering of a scene, for frame round trips and demo
/// input. camera_frame holds the same scene expressed in camera coordinates
/// (x right, y down, z forward), labels unchanged.
struct RenderedScene {
  DepthImage depth;
  RgbImage rgb;
  LabelImage labels;
  CameraIntrinsics intrinsics;
  Scene camera_frame;
};

RenderedScene render_scene_frame(const Scene& scene, double camera_height,
                                 int width, int height,
                                 double depth_scale = 0.00025);

}  // namespace moransac
