#include "moransac/camera.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace moransac {

void CameraIntrinsics::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw ConfigError("focal lengths must be positive");
  if (!(depth_scale > 0)) throw ConfigError("depth_scale must be positive");
}

CameraIntrinsics read_intrinsics(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open intrinsics file " + file.string());
  std::map<std::string, double> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::istringstream key(line.substr(0, eq));
    std::istringstream val(line.substr(eq + 1));
    std::string k;
    double v;
    if (key >> k && val >> v) kv[k] = v;
  }
  CameraIntrinsics k;
  for (auto [name, dst] : {std::pair{"fx", &k.fx}, {"fy", &k.fy}, {"cx", &k.cx},
                           {"cy", &k.cy}, {"depth_scale", &k.depth_scale}}) {
    auto it = kv.find(name);
    if (it == kv.end()) {
      throw FormatError("intrinsics file " + file.string() + " lacks key " + name);
    }
    *dst = it->second;
  }
  k.validate();
  return k;
}

void write_intrinsics(const std::filesystem::path& file, const CameraIntrinsics& k) {
  std::ofstream out(file);
  if (!out) throw InputError("cannot write intrinsics file " + file.string());
  out.precision(17);
  out << "fx = " << k.fx << "\nfy = " << k.fy << "\ncx = " << k.cx
      << "\ncy = " << k.cy << "\ndepth_scale = " << k.depth_scale << "\n";
}

PointCloud depth_to_cloud(const DepthImage& depth, const CameraIntrinsics& k,
                          const RgbImage* rgb, std::vector<int>* pixel_indices) {
  k.validate();
  if (rgb && (rgb->width != depth.width || rgb->height != depth.height)) {
    throw DimensionError("rgb resolution " + std::to_string(rgb->width) + "x" +
                         std::to_string(rgb->height) + " does not match depth " +
                         std::to_string(depth.width) + "x" +
                         std::to_string(depth.height));
  }
  PointCloud cloud;
  if (pixel_indices) pixel_indices->clear();
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const std::uint16_t d = depth.at(u, v);
      if (d == 0) continue;
      const double z = d * k.depth_scale;
      cloud.positions.emplace_back((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z);
      if (rgb) {
        const auto& c = rgb->at(u, v);
        cloud.colors.emplace_back(c[0] / 255.0, c[1] / 255.0, c[2] / 255.0);
      }
      if (pixel_indices) pixel_indices->push_back(v * depth.width + u);
    }
  }
  if (cloud.empty()) throw EmptyCloudError("depth image has no positive-depth pixels");
  return cloud;
}

FrameRender project_to_frame(const PointCloud& cloud, const CameraIntrinsics& k,
                             int width, int height) {
  k.validate();
  if (width <= 0 || height <= 0) throw InputError("frame size must be positive");
  FrameRender frame;
  frame.depth = DepthImage::zeros(width, height);
  frame.rgb = RgbImage::zeros(width, height);
  frame.point_index.assign(static_cast<std::size_t>(width) * height, -1);
  std::vector<double> zbuf(static_cast<std::size_t>(width) * height,
                           std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    if (p.z() <= 0) continue;
    const int u = static_cast<int>(std::lround(p.x() * k.fx / p.z() + k.cx));
    const int v = static_cast<int>(std::lround(p.y() * k.fy / p.z() + k.cy));
    if (u < 0 || u >= width || v < 0 || v >= height) continue;
    const std::size_t pix = static_cast<std::size_t>(v) * width + u;
    if (p.z() >= zbuf[pix]) continue;
    zbuf[pix] = p.z();
    const double raw = p.z() / k.depth_scale;
    frame.depth.pixels[pix] = static_cast<std::uint16_t>(
        std::clamp(std::lround(raw), 0L, 65535L));
    if (cloud.has_colors()) {
      const Vec3& c = cloud.colors[i];
      frame.rgb.pixels[pix] = {
          static_cast<std::uint8_t>(std::clamp(std::lround(c.x() * 255.0), 0L, 255L)),
          static_cast<std::uint8_t>(std::clamp(std::lround(c.y() * 255.0), 0L, 255L)),
          static_cast<std::uint8_t>(std::clamp(std::lround(c.z() * 255.0), 0L, 255L))};
    }
    frame.point_index[pix] = static_cast<int>(i);
  }
  return frame;
}

}  // namespace moransac
