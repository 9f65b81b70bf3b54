#include "moransac/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "moransac/normals.hpp"
#include "moransac/ply_io.hpp"

namespace moransac {

void SceneSpec::validate() const {
  if (!(floor_extent > 0)) throw SceneSpecError("floor_extent must be positive");
  if (object_count < 0) throw SceneSpecError("object_count must be non-negative");
  if (!(min_size > 0) || max_size < min_size) throw SceneSpecError("bad object size range");
  if (!(min_height > 0) || max_height < min_height) throw SceneSpecError("bad height range");
  if (box_faces_min < 1 || box_faces_max > 3 || box_faces_min > box_faces_max) {
    throw SceneSpecError("box visible faces must lie in 1..3");
  }
  if (points_per_face < 3) throw SceneSpecError("points_per_face must be at least 3");
  if (noise_sigma < 0) throw SceneSpecError("noise_sigma must be non-negative");
  if (outlier_fraction < 0 || outlier_fraction >= 1) {
    throw SceneSpecError("outlier_fraction must lie in [0, 1)");
  }
  if (!(cylinder_facet_width > 0)) throw SceneSpecError("cylinder_facet_width must be positive");
  if (object_count > 0 && max_size + 0.02 > floor_extent) {
    throw SceneSpecError("objects exceed the floor extent");
  }
  if (kinds.empty()) throw SceneSpecError("at least one object kind required");
}

namespace {

double truncated_gauss(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0) return 0;
  std::normal_distribution<double> gauss(0.0, sigma);
  const double v = gauss(rng);
  return std::clamp(v, -4.0 * sigma, 4.0 * sigma);
}

Vec3 jittered_color(const Vec3& base, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  return Vec3(std::clamp(base.x() + jitter(rng), 0.0, 1.0),
              std::clamp(base.y() + jitter(rng), 0.0, 1.0),
              std::clamp(base.z() + jitter(rng), 0.0, 1.0));
}

}  // namespace

int add_patch(Scene& scene, const Vec3& center, const Vec3& u_axis,
              const Vec3& v_axis, double u_extent, double v_extent, int n_points,
              const Vec3& color, double sigma, std::mt19937_64& rng) {
  const Vec3 normal = u_axis.cross(v_axis).normalized();
  const int label = static_cast<int>(scene.gt_planes.size());
  scene.gt_planes.push_back(Plane::from_normal_point(normal, center));

  std::uniform_real_distribution<double> uu(-u_extent / 2, u_extent / 2);
  std::uniform_real_distribution<double> vv(-v_extent / 2, v_extent / 2);
  for (int i = 0; i < n_points; ++i) {
    const Vec3 p = center + u_axis * uu(rng) + v_axis * vv(rng) +
                   normal * truncated_gauss(rng, sigma);
    scene.cloud.positions.push_back(p);
    scene.cloud.colors.push_back(jittered_color(color, rng));
    scene.cloud.normals.push_back(normal);
    scene.gt.labels.push_back(label);
  }
  return label;
}

int add_disk(Scene& scene, const Vec3& center, const Vec3& u_axis,
             const Vec3& v_axis, double radius, int n_points, const Vec3& color,
             double sigma, std::mt19937_64& rng) {
  const Vec3 normal = u_axis.cross(v_axis).normalized();
  const int label = static_cast<int>(scene.gt_planes.size());
  scene.gt_planes.push_back(Plane::from_normal_point(normal, center));

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < n_points; ++i) {
    const double r = radius * std::sqrt(uni(rng));
    const double phi = 2.0 * std::numbers::pi * uni(rng);
    const Vec3 p = center + u_axis * (r * std::cos(phi)) + v_axis * (r * std::sin(phi)) +
                   normal * truncated_gauss(rng, sigma);
    scene.cloud.positions.push_back(p);
    scene.cloud.colors.push_back(jittered_color(color, rng));
    scene.cloud.normals.push_back(normal);
    scene.gt.labels.push_back(label);
  }
  return label;
}

void add_outliers(Scene& scene, const Vec3& lo, const Vec3& hi, int n,
                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(lo.x(), hi.x());
  std::uniform_real_distribution<double> uy(lo.y(), hi.y());
  std::uniform_real_distribution<double> uz(lo.z(), hi.z());
  std::uniform_real_distribution<double> uc(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    scene.cloud.positions.emplace_back(ux(rng), uy(rng), uz(rng));
    scene.cloud.colors.emplace_back(uc(rng), uc(rng), uc(rng));
    Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
    while (dir.norm() < 1e-6) dir = Vec3(gauss(rng), gauss(rng), gauss(rng));
    scene.cloud.normals.push_back(dir.normalized());
    scene.gt.labels.push_back(-1);
  }
}

Scene gen_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Scene scene;

  const double e = spec.floor_extent;
  add_patch(scene, Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), e, e,
            spec.points_per_face * 2, Vec3(0.5, 0.5, 0.5), spec.noise_sigma, rng);

  for (int obj = 0; obj < spec.object_count; ++obj) {
    const ObjectKind kind =
        spec.kinds[std::uniform_int_distribution<std::size_t>(0, spec.kinds.size() - 1)(rng)];
    const double size =
        spec.min_size + (spec.max_size - spec.min_size) * uni(rng);
    const double h =
        spec.min_height + (spec.max_height - spec.min_height) * uni(rng);
    const double margin = (e - size) / 2 - 0.01;
    const double cx = (2 * uni(rng) - 1) * std::max(0.0, margin);
    const double cy = (2 * uni(rng) - 1) * std::max(0.0, margin);
    const double yaw = 2.0 * std::numbers::pi * uni(rng);
    const Vec3 ux(std::cos(yaw), std::sin(yaw), 0);
    const Vec3 uy(-std::sin(yaw), std::cos(yaw), 0);
    const Vec3 base = Vec3(0.1 + 0.8 * uni(rng), 0.1 + 0.8 * uni(rng), 0.1 + 0.8 * uni(rng));

    if (kind == ObjectKind::kBox) {
      const double sx = size;
      const double sy = spec.min_size + (spec.max_size - spec.min_size) * uni(rng);
      // Top face first, then a seeded pick of side faces.
      const int faces = std::uniform_int_distribution<int>(spec.box_faces_min,
                                                           spec.box_faces_max)(rng);
      add_patch(scene, Vec3(cx, cy, h), ux, uy, sx, sy, spec.points_per_face, base,
                spec.noise_sigma, rng);
      struct Side {
        Vec3 center, a, b;
        double ea, eb;
      };
      const Vec3 c(cx, cy, h / 2);
      std::vector<Side> sides{
          {c + ux * (sx / 2), uy, Vec3(0, 0, 1), sy, h},
          {c - ux * (sx / 2), Vec3(0, 0, 1), uy, h, sy},
          {c + uy * (sy / 2), Vec3(0, 0, 1), ux, h, sx},
          {c - uy * (sy / 2), ux, Vec3(0, 0, 1), sx, h},
      };
      // Deterministic side order: rotate by a seeded start.
      const int start = std::uniform_int_distribution<int>(0, 3)(rng);
      for (int f = 0; f < faces - 1; ++f) {
        const Side& s = sides[static_cast<std::size_t>((start + f) % 4)];
        add_patch(scene, s.center, s.a, s.b, s.ea, s.eb, spec.points_per_face, base,
                  spec.noise_sigma, rng);
      }
    } else {
      const double r = size / 2;
      add_disk(scene, Vec3(cx, cy, h), ux, uy, r, spec.points_per_face, base,
               spec.noise_sigma, rng);
      const int facets = std::max(
          3, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r /
                                        spec.cylinder_facet_width)));
      const double chord = 2.0 * r * std::sin(std::numbers::pi / facets);
      const int per_facet =
          std::max(20, spec.points_per_face / facets);
      for (int f = 0; f < facets; ++f) {
        const double phi = 2.0 * std::numbers::pi * (f + 0.5) / facets;
        const Vec3 radial(std::cos(phi), std::sin(phi), 0);
        const Vec3 tangent(-std::sin(phi), std::cos(phi), 0);
        const Vec3 center = Vec3(cx, cy, h / 2) + radial * (r * std::cos(std::numbers::pi / facets));
        add_patch(scene, center, tangent, Vec3(0, 0, 1), chord, h, per_facet, base,
                  spec.noise_sigma, rng);
      }
    }
  }

  if (spec.outlier_fraction > 0) {
    const auto surface = static_cast<double>(scene.cloud.size());
    const int n_out = static_cast<int>(
        std::lround(surface * spec.outlier_fraction / (1.0 - spec.outlier_fraction)));
    add_outliers(scene, Vec3(-e / 2, -e / 2, 0),
                 Vec3(e / 2, e / 2, spec.max_height + 0.1), n_out, rng);
  }
  return scene;
}

void save_scene(const std::filesystem::path& dir, const Scene& scene,
                const SceneSpec* spec) {
  std::filesystem::create_directories(dir);
  write_ply(dir / "cloud.ply", scene.cloud, PlyFormat::kBinaryLittleEndian);
  write_labels(dir / "gt_labels.txt", scene.gt);
  std::ofstream planes(dir / "planes.csv");
  if (!planes) throw InputError("cannot write " + (dir / "planes.csv").string());
  planes << "label,nx,ny,nz,offset\n";
  planes.precision(17);
  for (std::size_t i = 0; i < scene.gt_planes.size(); ++i) {
    const Plane& p = scene.gt_planes[i];
    planes << i << ',' << p.normal.x() << ',' << p.normal.y() << ',' << p.normal.z()
           << ',' << p.offset << '\n';
  }
  if (spec) {
    std::ofstream out(dir / "spec.txt");
    out.precision(17);
    out << "floor_extent = " << spec->floor_extent << "\n"
        << "object_count = " << spec->object_count << "\n"
        << "min_size = " << spec->min_size << "\n"
        << "max_size = " << spec->max_size << "\n"
        << "min_height = " << spec->min_height << "\n"
        << "max_height = " << spec->max_height << "\n"
        << "points_per_face = " << spec->points_per_face << "\n"
        << "noise_sigma = " << spec->noise_sigma << "\n"
        << "outlier_fraction = " << spec->outlier_fraction << "\n"
        << "seed = " << spec->seed << "\n";
  }
}

Scene load_scene(const std::filesystem::path& dir) {
  Scene scene;
  scene.cloud = read_ply(dir / "cloud.ply");
  scene.gt = read_labels(dir / "gt_labels.txt");
  if (scene.gt.labels.size() != scene.cloud.size()) {
    throw FormatError("gt_labels.txt length does not match cloud.ply in " + dir.string());
  }
  std::ifstream planes(dir / "planes.csv");
  if (!planes) throw InputError("cannot open " + (dir / "planes.csv").string());
  std::string line;
  std::getline(planes, line);  // header
  while (std::getline(planes, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    long label;
    Plane p;
    if (!(row >> label >> p.normal.x() >> p.normal.y() >> p.normal.z() >> p.offset)) {
      throw FormatError("bad row in planes.csv: " + line);
    }
    p.canonicalize();
    scene.gt_planes.push_back(p);
  }
  return scene;
}

LoadedFrame load_rgbd_frame(const std::filesystem::path& depth_path,
                            const std::filesystem::path& rgb_path,
                            const std::filesystem::path& intrinsics_path,
                            const std::filesystem::path& gt_label_path,
                            int normal_k) {
  const DepthImage depth = read_depth_pgm(depth_path);
  const CameraIntrinsics k = read_intrinsics(intrinsics_path);
  std::optional<RgbImage> rgb;
  if (!rgb_path.empty()) rgb = read_rgb_ppm(rgb_path);

  LoadedFrame frame;
  std::vector<int> pixel_indices;
  frame.cloud = depth_to_cloud(depth, k, rgb ? &*rgb : nullptr, &pixel_indices);
  frame.cloud = estimate_normals(frame.cloud, std::min<int>(normal_k,
                                 static_cast<int>(frame.cloud.size())));

  if (!gt_label_path.empty()) {
    const LabelImage labels = read_label_pgm(gt_label_path);
    if (labels.width != depth.width || labels.height != depth.height) {
      throw DimensionError("label image resolution does not match depth");
    }
    Segmentation gt;
    gt.labels.reserve(pixel_indices.size());
    for (int pix : pixel_indices) {
      gt.labels.push_back(labels.pixels[static_cast<std::size_t>(pix)]);
    }
    frame.gt = std::move(gt);
  }
  return frame;
}

RenderedScene render_scene_frame(const Scene& scene, double camera_height,
                                 int width, int height, double depth_scale) {
  // World (z up) to camera (x right, y down, z forward), camera straight
  // above the origin looking down.
  Scene cam;
  cam.gt = scene.gt;
  cam.cloud = scene.cloud;
  for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
    const Vec3& p = scene.cloud.positions[i];
    cam.cloud.positions[i] = Vec3(p.x(), -p.y(), camera_height - p.z());
    if (scene.cloud.has_normals()) {
      const Vec3& n = scene.cloud.normals[i];
      cam.cloud.normals[i] = Vec3(n.x(), -n.y(), -n.z());
    }
  }
  for (const Plane& p : scene.gt_planes) {
    // Transform the plane: n' . x' + d' = 0 under the same rigid map.
    const Vec3 n(p.normal.x(), -p.normal.y(), -p.normal.z());
    const double d = p.offset + p.normal.z() * camera_height;
    Plane q;
    q.normal = n;
    q.offset = d;
    q.canonicalize();
    cam.gt_planes.push_back(q);
  }

  RenderedScene out;
  out.camera_frame = std::move(cam);

  Vec3 lo = scene.cloud.positions.front();
  Vec3 hi = lo;
  for (const Vec3& p : scene.cloud.positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 0.1});
  CameraIntrinsics k;
  k.fx = k.fy = 0.9 * std::min(width, height) * (camera_height - hi.z()) / span;
  k.cx = width / 2.0 - 0.5;
  k.cy = height / 2.0 - 0.5;
  k.depth_scale = depth_scale;
  out.intrinsics = k;

  const FrameRender render =
      project_to_frame(out.camera_frame.cloud, k, width, height);
  out.depth = render.depth;
  out.rgb = render.rgb;
  out.labels = LabelImage::filled(width, height, -1);
  for (std::size_t pix = 0; pix < render.point_index.size(); ++pix) {
    const int idx = render.point_index[pix];
    if (idx >= 0) {
      out.labels.pixels[pix] = scene.gt.labels[static_cast<std::size_t>(idx)];
    }
  }
  return out;
}

}  // namespace moransac
