#include "moransac/point_cloud.hpp"

#include <cmath>
#include <string>

namespace moransac {

void PointCloud::validate() const {
  const std::size_t n = positions.size();
  if (!colors.empty() && colors.size() != n) {
    throw InputError("color channel length " + std::to_string(colors.size()) +
                     " does not match position count " + std::to_string(n));
  }
  if (!normals.empty() && normals.size() != n) {
    throw InputError("normal channel length " + std::to_string(normals.size()) +
                     " does not match position count " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!positions[i].allFinite()) {
      throw InputError("non-finite position at index " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const double len = normals[i].norm();
    if (std::abs(len - 1.0) > 1e-6) {
      throw InputError("normal at index " + std::to_string(i) +
                       " has norm " + std::to_string(len));
    }
  }
}

PointCloud PointCloud::select(const std::vector<int>& indices) const {
  PointCloud out;
  out.positions.reserve(indices.size());
  if (has_colors()) out.colors.reserve(indices.size());
  if (has_normals()) out.normals.reserve(indices.size());
  for (int i : indices) {
    out.positions.push_back(positions[static_cast<std::size_t>(i)]);
    if (has_colors()) out.colors.push_back(colors[static_cast<std::size_t>(i)]);
    if (has_normals()) out.normals.push_back(normals[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(splitmix(seed) ^ a) ^ b);
}

}  // namespace moransac
