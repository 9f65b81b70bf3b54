#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "moransac/errors.hpp"

namespace moransac {

struct VotingNetConfig {
  /// Hidden widths of the pointwise backbone (input is the 9D point feature).
  std::vector<int> backbone_hidden{64};
  /// Backbone output width, the per-point feature dimension.
  int feature_dim = 128;

  void validate() const;
};

struct LinearLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

struct NetGradients {
  std::vector<Eigen::MatrixXd> d_weight;
  std::vector<Eigen::VectorXd> d_bias;
  Eigen::Vector3d d_gamma = Eigen::Vector3d::Zero();
  Eigen::Vector3d d_beta = Eigen::Vector3d::Zero();
};

/// Pointwise voting network: an MLP backbone (ReLU after every linear) that
/// lifts each 9D point feature to feature_dim, then a voting head of two
/// linear layers producing 3D features, each followed by ReLU, with batch
/// normalization over the point dimension after the last one. The output is
/// one 3D vote per point.
class VotingNet {
 public:
  VotingNet() = default;
  VotingNet(const VotingNetConfig& config, std::uint64_t seed);

  /// Everything the backward pass needs from one forward evaluation.
  struct ForwardTrace {
    std::vector<Eigen::MatrixXd> inputs;    // input to each linear, N x in
    std::vector<Eigen::MatrixXd> preacts;   // pre-ReLU output, N x out
    Eigen::MatrixXd bn_input;               // N x 3, after the final ReLU
    Eigen::Vector3d mu = Eigen::Vector3d::Zero();
    Eigen::Vector3d var = Eigen::Vector3d::Zero();
    Eigen::MatrixXd xhat;                   // normalized bn input
    Eigen::MatrixXd votes;                  // N x 3
    bool training = false;
  };

  /// Votes for an N x 9 feature matrix (rows: xyz, rgb, normal). Training
  /// mode normalizes with batch statistics, evaluation mode with the stored
  /// running statistics. Pure: running statistics are never touched here.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& feats, bool training = false) const;

  ForwardTrace forward_traced(const Eigen::MatrixXd& feats, bool training) const;

  /// Running-statistics update for one training batch (momentum 0.1,
  /// unbiased variance), the one stateful part of a training step.
  void update_running_stats(const ForwardTrace& trace);

  /// Reverse-mode gradients of a scalar loss given d(loss)/d(votes).
  NetGradients backward(const ForwardTrace& trace,
                        const Eigen::MatrixXd& d_votes) const;

  /// Gradient-descent step with decoupled weight decay:
  /// theta <- theta (1 - lr wd) - lr grad.
  void apply_update(const NetGradients& grads, double learning_rate,
                    double weight_decay);

  const std::vector<LinearLayer>& linears() const { return linears_; }
  std::vector<LinearLayer>& linears() { return linears_; }
  Eigen::Vector3d& gamma() { return gamma_; }
  Eigen::Vector3d& beta() { return beta_; }
  const Eigen::Vector3d& gamma() const { return gamma_; }
  const Eigen::Vector3d& beta() const { return beta_; }
  Eigen::Vector3d& running_mean() { return running_mean_; }
  Eigen::Vector3d& running_var() { return running_var_; }
  const Eigen::Vector3d& running_mean() const { return running_mean_; }
  const Eigen::Vector3d& running_var() const { return running_var_; }

  int input_dim() const;
  bool initialized() const { return !linears_.empty(); }

  static constexpr double kBnEps = 1e-5;
  static constexpr double kBnMomentum = 0.1;

 private:
  std::vector<LinearLayer> linears_;
  Eigen::Vector3d gamma_ = Eigen::Vector3d::Ones();
  Eigen::Vector3d beta_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d running_mean_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d running_var_ = Eigen::Vector3d::Ones();
};

}  // namespace moransac
