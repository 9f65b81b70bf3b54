#pragma once

#include <filesystem>
#include <vector>

#include "moransac/errors.hpp"

namespace moransac {

/// Per-point integer cluster labels; -1 means unassigned.
struct Segmentation {
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }

  /// Number of distinct assigned labels.
  int num_clusters() const;

  /// Relabels assigned ids to a contiguous 0..M-1 range, ascending by
  /// original id. Unassigned points stay -1.
  void compact();
};

/// Newline-separated integers, one label per point.
void write_labels(const std::filesystem::path& file, const Segmentation& seg);
Segmentation read_labels(const std::filesystem::path& file);

}  // namespace moransac
