#pragma once

#include "moransac/config.hpp"
#include "moransac/merge.hpp"
#include "moransac/segmentation.hpp"
#include "moransac/voting_net.hpp"

namespace moransac {

/// Result of a full segmentation run. The labels refer to `cloud`, which is
/// the input after the cap-downsample and normal-estimation steps.
struct PipelineOutput {
  PointCloud cloud;
  Segmentation seg;
  ClusterDict clusters;  // keyed by segmentation label
};

/// Full pipeline: cap the point count, ensure normals, infer subplane
/// clusters (voted when a net is given, raw-position ablation otherwise) and
/// run the two-stage merge.
PipelineOutput run_segmentation(const PointCloud& input, const VotingNet* net,
                                const RunConfig& config, MergeLog* log = nullptr);

/// Sequential multi-plane RANSAC baseline over the same preprocessed cloud;
/// each extracted plane becomes one cluster.
PipelineOutput run_baseline(const PointCloud& input, const RunConfig& config);

/// Distinct flat color per label; -1 maps to mid gray.
Vec3 label_color(int label);
PointCloud colorize_by_labels(const PointCloud& cloud, const Segmentation& seg);

}  // namespace moransac
