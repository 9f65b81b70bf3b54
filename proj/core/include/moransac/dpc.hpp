#pragma once

#include <map>
#include <optional>
#include <vector>

#include "moransac/merge.hpp"
#include "moransac/ransac.hpp"
#include "moransac/voting_net.hpp"

namespace moransac {

/// Subplane clusters from nearest-representative assignment on the voted
/// points. Representative k is the voted position of sample_indices[k] and
/// carries label k.
struct SubplaneClustering {
  std::vector<int> labels;          // per point, 0..K-1
  std::vector<int> sample_indices;  // the K FPS picks
  Eigen::MatrixXd voted;            // N x 3 voted positions

  int k() const { return static_cast<int>(sample_indices.size()); }
  Vec3 representative(int cluster) const {
    return voted.row(sample_indices[static_cast<std::size_t>(cluster)]).transpose();
  }
  std::vector<std::vector<int>> members() const;
};

/// Labels every voted point with its nearest representative (L2, ties to the
/// lowest cluster index). Throws InputError on duplicate or out-of-range
/// sample indices.
SubplaneClustering assign_clusters(const Eigen::MatrixXd& voted,
                                   const std::vector<int>& sample_indices);

/// Per-cluster RANSAC pseudo-labels. Inliers and outliers partition each
/// cluster's members; clusters with fewer than 3 members are skipped and
/// contribute nothing to the loss.
struct ClusterPseudoLabels {
  std::vector<int> inliers;
  std::vector<int> outliers;
  std::optional<Plane> plane;
  bool skipped = false;
};

struct PseudoLabels {
  std::vector<ClusterPseudoLabels> clusters;
};

/// RANSAC runs on the original point coordinates, never the voted ones.
/// Clusters where no plane reaches consensus keep all members as outliers.
PseudoLabels pseudo_labels(const PointCloud& cloud,
                           const SubplaneClustering& clustering,
                           const RansacParams& params);

enum class LossNorm { kL1, kL2 };

struct ContrastiveLossResult {
  double total = 0;                  // mean over non-skipped clusters
  std::vector<double> per_cluster;   // L_k, zero for skipped clusters
  int active_clusters = 0;
};

/// Per-cluster contrastive loss: mean distance of pseudo-inliers to the
/// representative plus the mean hinge [alpha - distance]+ over
/// pseudo-outliers, using the L1 norm of the 3D difference by default.
/// Empty inlier or outlier sets contribute zero for their term.
ContrastiveLossResult contrastive_loss(const SubplaneClustering& clustering,
                                       const PseudoLabels& labels, double alpha,
                                       LossNorm norm = LossNorm::kL1);

/// d(loss)/d(votes), treating the cluster assignment and pseudo-labels as
/// constants of the step; gradients flow through both the member points and
/// the representatives. The L1 subgradient at zero is zero, and a hinge
/// exactly at zero is inactive.
Eigen::MatrixXd contrastive_loss_vote_gradients(const SubplaneClustering& clustering,
                                                const PseudoLabels& labels,
                                                double alpha,
                                                LossNorm norm = LossNorm::kL1);

struct LossGradients {
  double loss = 0;
  NetGradients grads;
};

/// Loss and exact parameter gradients for one training-mode forward pass with
/// fixed pseudo-labels. Pure: running statistics are not updated.
LossGradients loss_gradients(const VotingNet& net, const Eigen::MatrixXd& feats,
                             const std::vector<int>& sample_indices,
                             const PseudoLabels& labels, double alpha,
                             LossNorm norm = LossNorm::kL1);

/// N x 9 feature rows (xyz, rgb, normal); zero colors when absent.
Eigen::MatrixXd make_features(const PointCloud& cloud);

struct InferParams {
  int k_per_split = 64;
  int kmeans_splits = 3;
  std::uint64_t seed = 0;
  RansacParams cluster_ransac{};  // threshold 0.005, min_inliers 3

  void validate() const;
};

/// Inference: the 9D cloud is split into kmeans_splits groups by k-means,
/// each split is voted and clustered around its FPS representatives, and each
/// subplane cluster gets a RANSAC plane on original coordinates. Clusters
/// whose RANSAC found no plane carry a null plane (they never merge).
/// Cluster members are indices into the given cloud. Requires normals;
/// missing colors run as zeros. Pass a null net for the no-vote ablation,
/// which clusters on raw positions.
std::vector<ClusterDict> infer_subplanes(const VotingNet* net,
                                         const PointCloud& cloud,
                                         const InferParams& params);

}  // namespace moransac
