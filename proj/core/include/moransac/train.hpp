#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "moransac/dpc.hpp"
#include "moransac/voting_net.hpp"

namespace moransac {

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 1e-5;
  double weight_decay = 1e-5;
  int k_min = 8;
  int k_max = 196;
  double alpha = 3.0;
  int points_per_cloud = 32768;
  std::uint64_t seed = 0;
  int normal_k = 30;
  LossNorm loss_norm = LossNorm::kL1;
  RansacParams pseudo_ransac{};  // threshold 0.005, min_inliers 3
  VotingNetConfig net{};

  void validate() const;
};

struct LossLogRow {
  int epoch = 0;
  int step = 0;
  int k = 0;
  double loss = 0;
};

struct TrainResult {
  std::vector<LossLogRow> log;
  std::vector<double> epoch_mean_loss;
  int epochs_trained = 0;
};

/// Self-supervised training: per cloud per step, downsample to
/// points_per_cloud, draw K uniformly from [k_min, k_max], farthest-point
/// sample, vote, assign, pseudo-label with per-cluster RANSAC on the original
/// coordinates, and take one gradient step with decoupled weight decay.
/// Deterministic for a fixed seed. Throws InputError on an empty dataset.
TrainResult train(VotingNet& net, const std::vector<PointCloud>& dataset,
                  const TrainConfig& config);

/// Loss log as CSV (epoch, step, K, loss).
void write_loss_log(const std::filesystem::path& file,
                    const std::vector<LossLogRow>& log);

}  // namespace moransac
