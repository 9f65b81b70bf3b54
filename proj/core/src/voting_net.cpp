#include "moransac/voting_net.hpp"

#include <cmath>
#include <random>
#include <string>

namespace moransac {

void VotingNetConfig::validate() const {
  if (feature_dim < 1) throw ConfigError("feature_dim must be at least 1");
  for (int h : backbone_hidden) {
    if (h < 1) throw ConfigError("backbone hidden widths must be at least 1");
  }
}

VotingNet::VotingNet(const VotingNetConfig& config, std::uint64_t seed) {
  config.validate();
  std::vector<int> dims{9};
  for (int h : config.backbone_hidden) dims.push_back(h);
  dims.push_back(config.feature_dim);
  dims.push_back(3);
  dims.push_back(3);

  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> uni(-bound, bound);
    LinearLayer layer;
    layer.weight.resize(out, in);
    layer.bias.resize(out);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) layer.weight(r, c) = uni(rng);
      layer.bias[r] = uni(rng);
    }
    linears_.push_back(std::move(layer));
  }
}

int VotingNet::input_dim() const {
  return linears_.empty() ? 0 : static_cast<int>(linears_.front().weight.cols());
}

VotingNet::ForwardTrace VotingNet::forward_traced(const Eigen::MatrixXd& feats,
                                                  bool training) const {
  if (!initialized()) throw InputError("voting net has no parameters");
  if (feats.cols() != input_dim()) {
    throw DimensionError("voting net expects " + std::to_string(input_dim()) +
                         " input features, got " + std::to_string(feats.cols()));
  }
  if (feats.rows() < 1) throw InputError("voting net needs at least one point");
  if (!feats.allFinite()) throw InputError("non-finite values in voting net input");

  ForwardTrace trace;
  trace.training = training;
  Eigen::MatrixXd x = feats;
  for (const LinearLayer& layer : linears_) {
    trace.inputs.push_back(x);
    Eigen::MatrixXd pre = x * layer.weight.transpose();
    pre.rowwise() += layer.bias.transpose();
    trace.preacts.push_back(pre);
    x = pre.cwiseMax(0.0);
  }
  trace.bn_input = x;

  const double n = static_cast<double>(x.rows());
  if (training) {
    trace.mu = x.colwise().mean().transpose();
    trace.var =
        ((x.rowwise() - trace.mu.transpose()).array().square().colwise().sum() / n)
            .matrix()
            .transpose();
  } else {
    trace.mu = running_mean_;
    trace.var = running_var_;
  }
  trace.xhat = x;
  for (int j = 0; j < 3; ++j) {
    const double inv = 1.0 / std::sqrt(trace.var[j] + kBnEps);
    trace.xhat.col(j) = ((x.col(j).array() - trace.mu[j]) * inv).matrix();
  }
  trace.votes = trace.xhat;
  for (int j = 0; j < 3; ++j) {
    trace.votes.col(j) = trace.xhat.col(j) * gamma_[j] + Eigen::VectorXd::Constant(x.rows(), beta_[j]);
  }
  return trace;
}

Eigen::MatrixXd VotingNet::forward(const Eigen::MatrixXd& feats, bool training) const {
  return forward_traced(feats, training).votes;
}

void VotingNet::update_running_stats(const ForwardTrace& trace) {
  if (!trace.training) return;
  const double n = static_cast<double>(trace.bn_input.rows());
  Eigen::Vector3d var_unbiased = trace.var;
  if (n > 1.5) var_unbiased *= n / (n - 1.0);
  running_mean_ = (1.0 - kBnMomentum) * running_mean_ + kBnMomentum * trace.mu;
  running_var_ = (1.0 - kBnMomentum) * running_var_ + kBnMomentum * var_unbiased;
}

NetGradients VotingNet::backward(const ForwardTrace& trace,
                                 const Eigen::MatrixXd& d_votes) const {
  NetGradients grads;
  grads.d_weight.resize(linears_.size());
  grads.d_bias.resize(linears_.size());

  const Eigen::Index n = trace.bn_input.rows();
  Eigen::MatrixXd d_x(n, 3);
  for (int j = 0; j < 3; ++j) {
    grads.d_gamma[j] = (d_votes.col(j).array() * trace.xhat.col(j).array()).sum();
    grads.d_beta[j] = d_votes.col(j).sum();
    const Eigen::VectorXd d_xhat = d_votes.col(j) * gamma_[j];
    const double inv = 1.0 / std::sqrt(trace.var[j] + kBnEps);
    if (trace.training) {
      const double mean_dxhat = d_xhat.mean();
      const double mean_dxhat_xhat = (d_xhat.array() * trace.xhat.col(j).array()).mean();
      d_x.col(j) = (inv * (d_xhat.array() - mean_dxhat -
                           trace.xhat.col(j).array() * mean_dxhat_xhat))
                       .matrix();
    } else {
      d_x.col(j) = d_xhat * inv;
    }
  }

  Eigen::MatrixXd grad = d_x;
  for (int l = static_cast<int>(linears_.size()) - 1; l >= 0; --l) {
    // ReLU backward; the subgradient at exactly zero is zero.
    grad = (trace.preacts[static_cast<std::size_t>(l)].array() > 0.0)
               .select(grad, Eigen::MatrixXd::Zero(grad.rows(), grad.cols()));
    grads.d_weight[static_cast<std::size_t>(l)] =
        grad.transpose() * trace.inputs[static_cast<std::size_t>(l)];
    grads.d_bias[static_cast<std::size_t>(l)] = grad.colwise().sum().transpose();
    if (l > 0) {
      grad = grad * linears_[static_cast<std::size_t>(l)].weight;
    }
  }
  return grads;
}

void VotingNet::apply_update(const NetGradients& grads, double learning_rate,
                             double weight_decay) {
  const double keep = 1.0 - learning_rate * weight_decay;
  for (std::size_t l = 0; l < linears_.size(); ++l) {
    linears_[l].weight = keep * linears_[l].weight - learning_rate * grads.d_weight[l];
    linears_[l].bias = keep * linears_[l].bias - learning_rate * grads.d_bias[l];
  }
  gamma_ = keep * gamma_ - learning_rate * grads.d_gamma;
  beta_ = keep * beta_ - learning_rate * grads.d_beta;
}

}  // namespace moransac
