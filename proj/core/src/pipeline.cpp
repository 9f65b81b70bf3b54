#include "moransac/pipeline.hpp"

#include <cmath>

#include "moransac/dpc.hpp"
#include "moransac/normals.hpp"
#include "moransac/sampling.hpp"

namespace moransac {

namespace {

PointCloud prepare_cloud(const PointCloud& input, const RunConfig& config) {
  if (input.empty()) throw EmptyCloudError("input cloud is empty");
  input.validate();
  PointCloud cloud = input;
  if (static_cast<int>(cloud.size()) > config.points_cap) {
    cloud = voxel_downsample_to_count(cloud, config.points_cap);
  }
  if (!cloud.has_normals()) {
    const int k = std::min<int>(config.normal_k, static_cast<int>(cloud.size()));
    if (k < 3) throw InsufficientPointsError("too few points for normal estimation");
    cloud = estimate_normals(cloud, k);
  }
  return cloud;
}

}  // namespace

PipelineOutput run_segmentation(const PointCloud& input, const VotingNet* net,
                                const RunConfig& config, MergeLog* log) {
  PipelineOutput out;
  out.cloud = prepare_cloud(input, config);
  const std::vector<ClusterDict> dicts =
      infer_subplanes(net, out.cloud, config.infer_params());
  TwoStageResult merged = two_stage_merge_detail(dicts, out.cloud, config.merge, log);
  out.seg = std::move(merged.seg);
  out.clusters = std::move(merged.clusters);
  return out;
}

PipelineOutput run_baseline(const PointCloud& input, const RunConfig& config) {
  PipelineOutput out;
  out.cloud = prepare_cloud(input, config);
  out.seg = sequential_multiplane(out.cloud, config.baseline_params(out.cloud.size()),
                                  config.ransac_max_planes);
  for (std::size_t i = 0; i < out.seg.labels.size(); ++i) {
    const int label = out.seg.labels[i];
    if (label >= 0) out.clusters[label].points.push_back(static_cast<int>(i));
  }
  for (auto& [label, cluster] : out.clusters) {
    try {
      cluster.plane = fit_plane_lsq(out.cloud.positions, cluster.points);
    } catch (const PipelineError&) {
      // Leave the plane unset for degenerate clusters.
    }
  }
  return out;
}

Vec3 label_color(int label) {
  if (label < 0) return Vec3(0.5, 0.5, 0.5);
  // Golden-ratio hue walk, full saturation.
  const double hue = std::fmod(0.61803398875 * (label + 1), 1.0) * 6.0;
  const double x = 1.0 - std::abs(std::fmod(hue, 2.0) - 1.0);
  switch (static_cast<int>(hue)) {
    case 0: return Vec3(1, x, 0);
    case 1: return Vec3(x, 1, 0);
    case 2: return Vec3(0, 1, x);
    case 3: return Vec3(0, x, 1);
    case 4: return Vec3(x, 0, 1);
    default: return Vec3(1, 0, x);
  }
}

PointCloud colorize_by_labels(const PointCloud& cloud, const Segmentation& seg) {
  if (seg.labels.size() != cloud.size()) {
    throw InputError("segmentation length does not match the cloud");
  }
  PointCloud out = cloud;
  out.colors.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out.colors[i] = label_color(seg.labels[i]);
  }
  return out;
}

}  // namespace moransac
