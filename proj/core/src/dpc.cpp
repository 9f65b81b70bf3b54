#include "moransac/dpc.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "moransac/kmeans.hpp"
#include "moransac/sampling.hpp"

namespace moransac {

std::vector<std::vector<int>> SubplaneClustering::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(k()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }
  return out;
}

SubplaneClustering assign_clusters(const Eigen::MatrixXd& voted,
                                   const std::vector<int>& sample_indices) {
  const Eigen::Index n = voted.rows();
  if (sample_indices.empty()) throw InputError("assignment needs at least one representative");
  std::set<int> seen;
  for (int s : sample_indices) {
    if (s < 0 || s >= n) throw InputError("sample index out of range");
    if (!seen.insert(s).second) throw InputError("duplicate sample index");
  }

  SubplaneClustering out;
  out.sample_indices = sample_indices;
  out.voted = voted;
  out.labels.assign(static_cast<std::size_t>(n), 0);

  const int k = static_cast<int>(sample_indices.size());
  Eigen::MatrixXd reps(k, 3);
  for (int c = 0; c < k; ++c) reps.row(c) = voted.row(sample_indices[static_cast<std::size_t>(c)]);

  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d2 = (voted.row(i) - reps.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
      const double d2 = (voted.row(i) - reps.row(c)).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = c;
      }
    }
    out.labels[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

PseudoLabels pseudo_labels(const PointCloud& cloud,
                           const SubplaneClustering& clustering,
                           const RansacParams& params) {
  if (clustering.labels.size() != cloud.size()) {
    throw DimensionError("clustering does not cover the cloud");
  }
  PseudoLabels out;
  const auto members = clustering.members();
  out.clusters.resize(members.size());
  for (std::size_t c = 0; c < members.size(); ++c) {
    ClusterPseudoLabels& entry = out.clusters[c];
    const std::vector<int>& idx = members[c];
    if (idx.size() < 3) {
      entry.skipped = true;
      continue;
    }
    RansacParams local = params;
    local.seed = mix_seed(params.seed, c + 1, 0x9c);
    try {
      RansacResult fit = ransac_plane(cloud.positions, idx, local);
      entry.plane = fit.plane;
      std::set<int> inl(fit.inliers.begin(), fit.inliers.end());
      for (int i : idx) {
        if (inl.count(i)) {
          entry.inliers.push_back(i);
        } else {
          entry.outliers.push_back(i);
        }
      }
    } catch (const NoPlaneFoundError&) {
      entry.outliers = idx;
    }
  }
  return out;
}

namespace {

double point_norm(const Eigen::RowVector3d& v, LossNorm norm) {
  return norm == LossNorm::kL1 ? v.cwiseAbs().sum() : v.norm();
}

}  // namespace

ContrastiveLossResult contrastive_loss(const SubplaneClustering& clustering,
                                       const PseudoLabels& labels, double alpha,
                                       LossNorm norm) {
  if (!(alpha > 0)) throw InputError("alpha must be positive");
  ContrastiveLossResult result;
  result.per_cluster.assign(labels.clusters.size(), 0.0);
  double sum = 0;
  for (std::size_t c = 0; c < labels.clusters.size(); ++c) {
    const ClusterPseudoLabels& entry = labels.clusters[c];
    if (entry.skipped) continue;
    const Eigen::RowVector3d rep =
        clustering.voted.row(clustering.sample_indices[c]);
    double lk = 0;
    if (!entry.inliers.empty()) {
      double acc = 0;
      for (int i : entry.inliers) {
        acc += point_norm(clustering.voted.row(i) - rep, norm);
      }
      lk += acc / static_cast<double>(entry.inliers.size());
    }
    if (!entry.outliers.empty()) {
      double acc = 0;
      for (int i : entry.outliers) {
        acc += std::max(0.0, alpha - point_norm(clustering.voted.row(i) - rep, norm));
      }
      lk += acc / static_cast<double>(entry.outliers.size());
    }
    result.per_cluster[c] = lk;
    sum += lk;
    result.active_clusters += 1;
  }
  result.total = result.active_clusters > 0 ? sum / result.active_clusters : 0.0;
  return result;
}

namespace {

// d norm(v) / d v; the L1 subgradient at zero is zero componentwise, and the
// L2 gradient at the origin is defined as zero.
Eigen::RowVector3d norm_gradient(const Eigen::RowVector3d& v, LossNorm norm) {
  if (norm == LossNorm::kL1) {
    Eigen::RowVector3d g;
    for (int j = 0; j < 3; ++j) g[j] = v[j] > 0 ? 1.0 : (v[j] < 0 ? -1.0 : 0.0);
    return g;
  }
  const double len = v.norm();
  return len > 0 ? Eigen::RowVector3d(v / len) : Eigen::RowVector3d::Zero();
}

}  // namespace

Eigen::MatrixXd contrastive_loss_vote_gradients(const SubplaneClustering& clustering,
                                                const PseudoLabels& labels,
                                                double alpha, LossNorm norm) {
  if (!(alpha > 0)) throw InputError("alpha must be positive");
  Eigen::MatrixXd d_votes = Eigen::MatrixXd::Zero(clustering.voted.rows(), 3);
  int active = 0;
  for (const ClusterPseudoLabels& entry : labels.clusters) {
    if (!entry.skipped) ++active;
  }
  if (active == 0) return d_votes;
  const double cluster_w = 1.0 / active;

  for (std::size_t c = 0; c < labels.clusters.size(); ++c) {
    const ClusterPseudoLabels& entry = labels.clusters[c];
    if (entry.skipped) continue;
    const int rep_idx = clustering.sample_indices[c];
    const Eigen::RowVector3d rep = clustering.voted.row(rep_idx);
    if (!entry.inliers.empty()) {
      const double w = cluster_w / static_cast<double>(entry.inliers.size());
      for (int i : entry.inliers) {
        const Eigen::RowVector3d g =
            norm_gradient(clustering.voted.row(i) - rep, norm) * w;
        d_votes.row(i) += g;
        d_votes.row(rep_idx) -= g;
      }
    }
    if (!entry.outliers.empty()) {
      const double w = cluster_w / static_cast<double>(entry.outliers.size());
      for (int i : entry.outliers) {
        const Eigen::RowVector3d diff = clustering.voted.row(i) - rep;
        if (alpha - point_norm(diff, norm) > 0) {
          const Eigen::RowVector3d g = norm_gradient(diff, norm) * w;
          d_votes.row(i) -= g;
          d_votes.row(rep_idx) += g;
        }
      }
    }
  }
  return d_votes;
}

LossGradients loss_gradients(const VotingNet& net, const Eigen::MatrixXd& feats,
                             const std::vector<int>& sample_indices,
                             const PseudoLabels& labels, double alpha,
                             LossNorm norm) {
  const VotingNet::ForwardTrace trace = net.forward_traced(feats, true);
  Eigen::MatrixXd voted = trace.votes;
  voted.col(0) += feats.col(0);
  voted.col(1) += feats.col(1);
  voted.col(2) += feats.col(2);

  SubplaneClustering clustering;
  clustering.sample_indices = sample_indices;
  clustering.voted = std::move(voted);
  clustering.labels.assign(static_cast<std::size_t>(feats.rows()), 0);

  LossGradients out;
  out.loss = contrastive_loss(clustering, labels, alpha, norm).total;
  const Eigen::MatrixXd d_votes =
      contrastive_loss_vote_gradients(clustering, labels, alpha, norm);
  out.grads = net.backward(trace, d_votes);
  return out;
}

Eigen::MatrixXd make_features(const PointCloud& cloud) {
  if (!cloud.has_normals()) throw InputError("9D features need normals");
  Eigen::MatrixXd feats(cloud.size(), 9);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    feats.block<1, 3>(static_cast<Eigen::Index>(i), 0) = cloud.positions[i].transpose();
    feats.block<1, 3>(static_cast<Eigen::Index>(i), 3) =
        cloud.has_colors() ? Eigen::RowVector3d(cloud.colors[i].transpose())
                           : Eigen::RowVector3d(Eigen::RowVector3d::Zero());
    feats.block<1, 3>(static_cast<Eigen::Index>(i), 6) = cloud.normals[i].transpose();
  }
  return feats;
}

void InferParams::validate() const {
  if (k_per_split < 1) throw ConfigError("k_per_split must be at least 1");
  if (kmeans_splits < 1) throw ConfigError("kmeans_splits must be at least 1");
  cluster_ransac.validate();
}

std::vector<ClusterDict> infer_subplanes(const VotingNet* net,
                                         const PointCloud& cloud,
                                         const InferParams& params) {
  params.validate();
  if (cloud.empty()) throw EmptyCloudError("cannot infer subplanes on an empty cloud");
  const Eigen::MatrixXd feats = make_features(cloud);

  // K-means split of the 9D cloud (standardized inside kmeans).
  std::vector<int> split_of(cloud.size(), 0);
  const int splits = std::min<int>(params.kmeans_splits, static_cast<int>(cloud.size()));
  if (splits > 1) {
    std::vector<Eigen::VectorXd> rows(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      rows[i] = feats.row(static_cast<Eigen::Index>(i)).transpose();
    }
    split_of = kmeans(rows, splits, mix_seed(params.seed, 0x51, 0)).labels;
  }

  std::vector<std::vector<int>> split_members(static_cast<std::size_t>(splits));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    split_members[static_cast<std::size_t>(split_of[i])].push_back(static_cast<int>(i));
  }

  std::vector<ClusterDict> dicts;
  for (std::size_t s = 0; s < split_members.size(); ++s) {
    ClusterDict dict;
    const std::vector<int>& members = split_members[s];
    if (members.empty()) {
      dicts.push_back(std::move(dict));
      continue;
    }
    std::vector<Vec3> positions;
    positions.reserve(members.size());
    for (int i : members) positions.push_back(cloud.positions[static_cast<std::size_t>(i)]);

    const int k = std::min<int>(params.k_per_split, static_cast<int>(members.size()));
    const std::vector<int> fps =
        farthest_point_sample(positions, k, mix_seed(params.seed, s + 1, 0xf5));

    Eigen::MatrixXd voted(members.size(), 3);
    if (net) {
      Eigen::MatrixXd split_feats(members.size(), 9);
      for (std::size_t i = 0; i < members.size(); ++i) {
        split_feats.row(static_cast<Eigen::Index>(i)) =
            feats.row(static_cast<Eigen::Index>(members[i]));
      }
      const Eigen::MatrixXd votes = net->forward(split_feats, false);
      for (std::size_t i = 0; i < members.size(); ++i) {
        voted.row(static_cast<Eigen::Index>(i)) =
            positions[i].transpose() + votes.row(static_cast<Eigen::Index>(i));
      }
    } else {
      // Ablation: cluster on the raw positions.
      for (std::size_t i = 0; i < members.size(); ++i) {
        voted.row(static_cast<Eigen::Index>(i)) = positions[i].transpose();
      }
    }

    const SubplaneClustering clustering = assign_clusters(voted, fps);
    const auto cluster_members = clustering.members();
    for (std::size_t c = 0; c < cluster_members.size(); ++c) {
      Cluster cluster;
      cluster.points.reserve(cluster_members[c].size());
      for (int local : cluster_members[c]) {
        cluster.points.push_back(members[static_cast<std::size_t>(local)]);
      }
      std::sort(cluster.points.begin(), cluster.points.end());
      if (cluster.points.size() >= 3) {
        RansacParams local = params.cluster_ransac;
        local.seed = mix_seed(params.seed, s * 1000 + c, 0xca);
        try {
          cluster.plane = ransac_plane(cloud.positions, cluster.points, local).plane;
        } catch (const NoPlaneFoundError&) {
        } catch (const InsufficientPointsError&) {
        }
      }
      if (!cluster.points.empty()) {
        dict.emplace(static_cast<int>(c), std::move(cluster));
      }
    }
    dicts.push_back(std::move(dict));
  }
  return dicts;
}

}  // namespace moransac
