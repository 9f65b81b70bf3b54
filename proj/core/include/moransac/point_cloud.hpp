#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "moransac/errors.hpp"

namespace moransac {

using Vec3 = Eigen::Vector3d;

/// N positions in meters with optional per-point color (RGB in [0,1]) and
/// unit-normal channels. Optional channels are either empty or length N.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;
  std::vector<Vec3> normals;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_normals() const { return !normals.empty(); }

  /// Throws InputError if channel lengths disagree, a coordinate is
  /// non-finite, or a stored normal is off unit length by more than 1e-6.
  void validate() const;

  /// Subset of the cloud at the given point indices, channels carried along.
  PointCloud select(const std::vector<int>& indices) const;
};

/// Deterministic seed derivation for sub-tasks (per-iteration RANSAC draws,
/// per-scene generation, per-split sampling). splitmix64-based.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace moransac
