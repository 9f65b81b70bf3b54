#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "moransac/plane.hpp"
#include "moransac/segmentation.hpp"

namespace moransac {

/// One subplane cluster: member indices into the original cloud (kept
/// sorted) and the fitted plane, absent when RANSAC failed.
struct Cluster {
  std::vector<int> points;
  std::optional<Plane> plane;
};

/// cluster id -> cluster; the ordered map keeps every sweep deterministic.
using ClusterDict = std::map<int, Cluster>;

struct MergeParams {
  double beta = 0.2;    // max nearest-pair distance between merged clusters (m)
  double gamma = 0.9;   // min fraction of one cluster within delta of the other's plane
  double delta = 0.005; // point-to-plane tolerance (m)
  int u_neighbors = 5;  // centroid KNN graph degree

  void validate() const;
};

struct MergeStats {
  std::uint64_t point_pair_ops = 0;   // point-to-point distance evaluations
  std::uint64_t point_plane_ops = 0;  // point-to-plane distance evaluations
  int merges = 0;
  int passes = 0;
};

struct MergeTraceRow {
  int pass = 0;
  int id_a = 0;
  int id_b = 0;
  double m_a = 0;
  double m_b = 0;
  double min_d = 0;
  bool merged = false;
};

/// Optional instrumentation. With keep_trace set, every tested pair is
/// recorded and min_d is computed exactly (no early exit), which is what the
/// delta-consistency audit wants.
struct MergeLog {
  MergeStats stats;
  std::vector<MergeTraceRow> trace;
  bool keep_trace = false;
};

void write_merge_trace(const std::filesystem::path& file, const MergeLog& log);

/// Symmetrized U-nearest-neighbor graph over cluster centroids. Vertices are
/// the cluster ids; adjacency lists are sorted ascending.
using ClusterGraph = std::map<int, std::vector<int>>;
ClusterGraph build_cluster_graph(const ClusterDict& dict, const PointCloud& cloud,
                                 int u_neighbors);

struct MergeDecision {
  bool merge = false;
  double m_a = 0;
  double m_b = 0;
  /// Minimum pairwise distance; when the fast path exits early this is the
  /// first pair found below beta (an upper bound that already decides).
  double min_d = 0;
};

/// Merge test of Alg. 2 lines 7-10: m_a is the fraction of a's points within
/// delta of b's plane (and vice versa); the pair merges iff
/// min_d < beta and max(m_a, m_b) > gamma.
MergeDecision try_merge_pair(std::span<const Vec3> points_a,
                             std::span<const Vec3> points_b, const Plane& plane_a,
                             const Plane& plane_b, const MergeParams& params,
                             MergeStats* stats = nullptr, bool exact_min_d = false);

/// Graph-based merging to a fixed point: vertices are visited in ascending id
/// order, each unvisited vertex sweeps its neighbors in ascending id order,
/// and a successful merge absorbs B into A, refits A's plane on the union,
/// and rebuilds the graph. Outer passes repeat until a full pass makes no
/// merge, capped at the initial cluster count. Point count is conserved.
ClusterDict merge_process(ClusterDict dict, const PointCloud& cloud,
                          const MergeParams& params, MergeLog* log = nullptr);

struct TwoStageResult {
  Segmentation seg;
  /// Final clusters keyed by their compact segmentation label.
  ClusterDict clusters;
};

/// Stage 1 merges each dict independently; the union is re-keyed with fresh
/// ids and merged once more. Null-plane clusters keep their points but never
/// merge. Throws InputError when the dicts share point indices.
TwoStageResult two_stage_merge_detail(const std::vector<ClusterDict>& dicts,
                                      const PointCloud& cloud,
                                      const MergeParams& params,
                                      MergeLog* log = nullptr);

Segmentation two_stage_merge(const std::vector<ClusterDict>& dicts,
                             const PointCloud& cloud, const MergeParams& params,
                             MergeLog* log = nullptr);

}  // namespace moransac
