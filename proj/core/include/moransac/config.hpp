#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "moransac/dpc.hpp"
#include "moransac/merge.hpp"
#include "moransac/ransac.hpp"
#include "moransac/train.hpp"

namespace moransac {

/// Plain-text `key = value` file; '#' starts a comment, later keys override
/// earlier ones.
std::map<std::string, std::string> read_kv_file(const std::filesystem::path& file);

/// Every tunable of the pipeline with its default, loadable from a key-value
/// config file with flag overrides. Validation is fail-fast at load time.
struct RunConfig {
  std::uint64_t seed = 0;
  int normal_k = 30;
  int points_cap = 32768;

  // Sequential baseline RANSAC; min_inliers 0 means max(50, 0.5% of N).
  double ransac_threshold = 0.005;
  int ransac_max_iterations = 200;
  int ransac_min_inliers = 0;
  int ransac_max_planes = 16;

  // Per-cluster RANSAC for pseudo-labels and inference subplanes.
  double pseudo_threshold = 0.005;
  int pseudo_max_iterations = 200;
  int pseudo_min_inliers = 3;

  MergeParams merge{};
  TrainConfig train{};
  int k_infer = 64;
  int kmeans_splits = 3;

  double grasp_floor_angle_deg = 30.0;
  Vec3 up{0, 0, 1};
  std::vector<double> eval_voxels{0.005};

  void apply(const std::string& key, const std::string& value);
  void apply_all(const std::map<std::string, std::string>& kv);
  void validate() const;

  static RunConfig from_file(const std::filesystem::path& file);

  RansacParams baseline_params(std::size_t cloud_size) const;
  RansacParams pseudo_params() const;
  InferParams infer_params() const;
};

}  // namespace moransac
