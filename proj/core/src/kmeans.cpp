#include "moransac/kmeans.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace moransac {

KMeansResult kmeans(const std::vector<Eigen::VectorXd>& features, int k,
                    std::uint64_t seed) {
  const int n = static_cast<int>(features.size());
  if (k <= 0) throw InputError("kmeans needs k >= 1");
  if (n < k) {
    throw InsufficientPointsError("kmeans: " + std::to_string(n) +
                                  " points for k=" + std::to_string(k));
  }
  const Eigen::Index dim = features.front().size();
  Eigen::MatrixXd data(n, dim);
  for (int i = 0; i < n; ++i) {
    if (features[static_cast<std::size_t>(i)].size() != dim) {
      throw DimensionError("kmeans features have inconsistent dimensions");
    }
    data.row(i) = features[static_cast<std::size_t>(i)];
  }

  // Standardize per dimension. Dimensions with (near-)constant values would
  // blow noise up to unit variance, so anything spread less than 1% of the
  // dominant dimension keeps that shared scale instead; exactly constant
  // dimensions stay at zero.
  const Eigen::RowVectorXd mean = data.colwise().mean();
  data.rowwise() -= mean;
  Eigen::RowVectorXd stddev = (data.array().square().colwise().sum() / n).sqrt();
  const double floor = 0.01 * stddev.maxCoeff();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (!(stddev[j] > 1e-12)) {
      data.col(j).setZero();
    } else {
      data.col(j) /= std::max(stddev[j], floor);
    }
  }

  // Farthest-point initialization, seeded first pick.
  std::mt19937_64 rng(seed);
  std::vector<int> center_idx;
  center_idx.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
  std::vector<double> min_d2(static_cast<std::size_t>(n),
                             std::numeric_limits<double>::infinity());
  while (static_cast<int>(center_idx.size()) < k) {
    const Eigen::RowVectorXd last = data.row(center_idx.back());
    int best = -1;
    double best_d2 = -1;
    for (int i = 0; i < n; ++i) {
      const double d2 = (data.row(i) - last).squaredNorm();
      auto& slot = min_d2[static_cast<std::size_t>(i)];
      if (d2 < slot) slot = d2;
      if (slot > best_d2) {
        best_d2 = slot;
        best = i;
      }
    }
    center_idx.push_back(best);
  }
  Eigen::MatrixXd centers(k, dim);
  for (int c = 0; c < k; ++c) centers.row(c) = data.row(center_idx[static_cast<std::size_t>(c)]);

  KMeansResult result;
  result.labels.assign(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = iter == 0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d2 = (data.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d2 = (data.row(i) - centers.row(c)).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = c;
        }
      }
      if (result.labels[static_cast<std::size_t>(i)] != best) {
        result.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    result.iterations = iter + 1;
    if (!changed) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, dim);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      sums.row(result.labels[static_cast<std::size_t>(i)]) += data.row(i);
      counts[static_cast<std::size_t>(result.labels[static_cast<std::size_t>(i)])] += 1;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      }
      // Empty clusters keep their previous center.
    }
  }

  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int label : result.labels) counts[static_cast<std::size_t>(label)] += 1;
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) result.empty_clusters.push_back(c);
  }
  return result;
}

}  // namespace moransac
