#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "moransac/errors.hpp"

namespace moransac {

struct KMeansResult {
  std::vector<int> labels;
  int iterations = 0;
  std::vector<int> empty_clusters;
};

/// Lloyd's algorithm with seeded farthest-point initialization. Features are
/// standardized per dimension first (zero mean, unit variance; constant
/// dimensions stay zero). Assignment ties resolve toward the lowest cluster
/// index; empty clusters keep their centers and are reported. Stops when the
/// assignment stabilizes or after 100 iterations.
KMeansResult kmeans(const std::vector<Eigen::VectorXd>& features, int k,
                    std::uint64_t seed);

}  // namespace moransac
