#include "moransac/train.hpp"

#include <fstream>
#include <random>

#include "moransac/normals.hpp"
#include "moransac/sampling.hpp"

namespace moransac {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate >= 0)) throw ConfigError("learning_rate must be non-negative");
  if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be non-negative");
  if (k_min < 1 || k_max < k_min) throw ConfigError("bad K range");
  if (!(alpha > 0)) throw ConfigError("alpha must be positive");
  if (points_per_cloud < 16) throw ConfigError("points_per_cloud too small");
  if (normal_k < 3) throw ConfigError("normal_k must be at least 3");
  pseudo_ransac.validate();
  net.validate();
}

TrainResult train(VotingNet& net, const std::vector<PointCloud>& dataset,
                  const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw InputError("training dataset is empty");
  if (!net.initialized()) net = VotingNet(config.net, mix_seed(config.seed, 0x11));

  // Downsampling and normal estimation are deterministic per cloud, so the
  // per-step features are precomputed once.
  struct Prepared {
    Eigen::MatrixXd feats;
    std::vector<Vec3> positions;
    PointCloud cloud;
  };
  std::vector<Prepared> prepared;
  prepared.reserve(dataset.size());
  for (const PointCloud& raw : dataset) {
    if (raw.empty()) throw InputError("training cloud is empty");
    PointCloud cloud = voxel_downsample_to_count(raw, config.points_per_cloud);
    if (!cloud.has_normals()) {
      const int k = std::min<int>(config.normal_k, static_cast<int>(cloud.size()));
      if (k >= 3) cloud = estimate_normals(cloud, k);
    }
    Prepared prep;
    prep.feats = make_features(cloud);
    prep.positions = cloud.positions;
    prep.cloud = std::move(cloud);
    prepared.push_back(std::move(prep));
  }

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_sum = 0;
    for (std::size_t step = 0; step < prepared.size(); ++step) {
      const Prepared& prep = prepared[step];
      const int n = static_cast<int>(prep.positions.size());
      const std::uint64_t step_seed =
          mix_seed(config.seed, static_cast<std::uint64_t>(epoch) + 1,
                   static_cast<std::uint64_t>(step) + 1);
      std::mt19937_64 rng(step_seed);
      const int k_hi = std::min(config.k_max, n);
      const int k_lo = std::min(config.k_min, k_hi);
      const int k = std::uniform_int_distribution<int>(k_lo, k_hi)(rng);

      const std::vector<int> fps =
          farthest_point_sample(prep.positions, k, mix_seed(step_seed, 0xf));

      VotingNet::ForwardTrace trace = net.forward_traced(prep.feats, true);
      net.update_running_stats(trace);

      Eigen::MatrixXd voted = trace.votes;
      voted.col(0) += prep.feats.col(0);
      voted.col(1) += prep.feats.col(1);
      voted.col(2) += prep.feats.col(2);
      SubplaneClustering clustering = assign_clusters(voted, fps);

      RansacParams pseudo = config.pseudo_ransac;
      pseudo.seed = mix_seed(step_seed, 0xa);
      const PseudoLabels labels = pseudo_labels(prep.cloud, clustering, pseudo);

      const ContrastiveLossResult loss =
          contrastive_loss(clustering, labels, config.alpha, config.loss_norm);
      const Eigen::MatrixXd d_votes = contrastive_loss_vote_gradients(
          clustering, labels, config.alpha, config.loss_norm);
      const NetGradients grads = net.backward(trace, d_votes);
      net.apply_update(grads, config.learning_rate, config.weight_decay);

      result.log.push_back({epoch, static_cast<int>(step), k, loss.total});
      epoch_sum += loss.total;
    }
    result.epoch_mean_loss.push_back(epoch_sum / static_cast<double>(prepared.size()));
  }
  result.epochs_trained = config.epochs;
  return result;
}

void write_loss_log(const std::filesystem::path& file,
                    const std::vector<LossLogRow>& log) {
  std::ofstream out(file);
  if (!out) throw InputError("cannot write loss log " + file.string());
  out << "epoch,step,K,loss\n";
  out.precision(17);
  for (const LossLogRow& row : log) {
    out << row.epoch << ',' << row.step << ',' << row.k << ',' << row.loss << "\n";
  }
}

}  // namespace moransac
