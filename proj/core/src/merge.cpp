#include "moransac/merge.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

namespace moransac {

void MergeParams::validate() const {
  if (!(beta > 0)) throw ConfigError("beta must be positive");
  if (!(gamma > 0 && gamma <= 1)) throw ConfigError("gamma must be in (0, 1]");
  if (!(delta > 0)) throw ConfigError("delta must be positive");
  if (u_neighbors < 1) throw ConfigError("u_neighbors must be at least 1");
}

void write_merge_trace(const std::filesystem::path& file, const MergeLog& log) {
  std::ofstream out(file);
  if (!out) throw InputError("cannot write merge trace " + file.string());
  out << "pass,id_a,id_b,m_a,m_b,min_d,merged\n";
  out.precision(17);
  for (const MergeTraceRow& row : log.trace) {
    out << row.pass << ',' << row.id_a << ',' << row.id_b << ',' << row.m_a << ','
        << row.m_b << ',' << row.min_d << ',' << (row.merged ? 1 : 0) << "\n";
  }
}

namespace {

Vec3 centroid_of(const Cluster& cluster, const PointCloud& cloud) {
  Vec3 sum = Vec3::Zero();
  for (int i : cluster.points) sum += cloud.positions[static_cast<std::size_t>(i)];
  return sum / static_cast<double>(cluster.points.size());
}

}  // namespace

ClusterGraph build_cluster_graph(const ClusterDict& dict, const PointCloud& cloud,
                                 int u_neighbors) {
  ClusterGraph graph;
  if (dict.empty()) return graph;
  std::vector<int> ids;
  std::vector<Vec3> centers;
  ids.reserve(dict.size());
  centers.reserve(dict.size());
  for (const auto& [id, cluster] : dict) {
    if (cluster.points.empty()) throw InputError("cluster graph needs non-empty clusters");
    ids.push_back(id);
    centers.push_back(centroid_of(cluster, cloud));
    graph[id];
  }
  const int m = static_cast<int>(ids.size());
  for (int a = 0; a < m; ++a) {
    std::vector<std::pair<double, int>> dist;
    dist.reserve(static_cast<std::size_t>(m) - 1);
    for (int b = 0; b < m; ++b) {
      if (b == a) continue;
      dist.emplace_back((centers[static_cast<std::size_t>(a)] -
                         centers[static_cast<std::size_t>(b)]).squaredNorm(),
                        ids[static_cast<std::size_t>(b)]);
    }
    std::sort(dist.begin(), dist.end());
    const int take = std::min<int>(u_neighbors, static_cast<int>(dist.size()));
    for (int t = 0; t < take; ++t) {
      const int b = dist[static_cast<std::size_t>(t)].second;
      graph[ids[static_cast<std::size_t>(a)]].push_back(b);
      graph[b].push_back(ids[static_cast<std::size_t>(a)]);
    }
  }
  for (auto& [id, adj] : graph) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return graph;
}

MergeDecision try_merge_pair(std::span<const Vec3> points_a,
                             std::span<const Vec3> points_b, const Plane& plane_a,
                             const Plane& plane_b, const MergeParams& params,
                             MergeStats* stats, bool exact_min_d) {
  params.validate();
  MergeDecision decision;
  decision.min_d = std::numeric_limits<double>::infinity();

  int near_a = 0;
  for (const Vec3& p : points_a) {
    if (plane_b.distance(p) < params.delta) ++near_a;
  }
  int near_b = 0;
  for (const Vec3& p : points_b) {
    if (plane_a.distance(p) < params.delta) ++near_b;
  }
  if (stats) stats->point_plane_ops += points_a.size() + points_b.size();
  decision.m_a = static_cast<double>(near_a) / static_cast<double>(points_a.size());
  decision.m_b = static_cast<double>(near_b) / static_cast<double>(points_b.size());

  const bool coplanar = std::max(decision.m_a, decision.m_b) > params.gamma;
  if (!coplanar && !exact_min_d) {
    return decision;  // min_d untouched; the pair can never merge
  }

  const double beta2 = params.beta * params.beta;
  double min_d2 = std::numeric_limits<double>::infinity();
  for (const Vec3& pa : points_a) {
    for (const Vec3& pb : points_b) {
      const double d2 = (pa - pb).squaredNorm();
      if (stats) stats->point_pair_ops += 1;
      if (d2 < min_d2) {
        min_d2 = d2;
        if (!exact_min_d && min_d2 < beta2) {
          decision.min_d = std::sqrt(min_d2);
          decision.merge = coplanar;
          return decision;
        }
      }
    }
  }
  decision.min_d = std::sqrt(min_d2);
  decision.merge = coplanar && decision.min_d < params.beta;
  return decision;
}

namespace {

std::span<const Vec3> gather(const Cluster& cluster, const PointCloud& cloud,
                             std::vector<Vec3>& scratch) {
  scratch.clear();
  scratch.reserve(cluster.points.size());
  for (int i : cluster.points) scratch.push_back(cloud.positions[static_cast<std::size_t>(i)]);
  return scratch;
}

}  // namespace

ClusterDict merge_process(ClusterDict dict, const PointCloud& cloud,
                          const MergeParams& params, MergeLog* log) {
  params.validate();
  if (dict.empty()) return dict;
  for (const auto& [id, cluster] : dict) {
    if (cluster.points.empty()) throw InputError("merge_process: empty cluster " + std::to_string(id));
  }

  const int initial_k = static_cast<int>(dict.size());
  ClusterGraph graph = build_cluster_graph(dict, cloud, params.u_neighbors);
  std::vector<Vec3> buf_a, buf_b;

  for (int pass = 0; pass < initial_k; ++pass) {
    bool merged_this_pass = false;
    std::set<int> visited;
    std::vector<int> sweep;
    sweep.reserve(dict.size());
    for (const auto& [id, cluster] : dict) sweep.push_back(id);

    for (int a : sweep) {
      if (!dict.count(a) || visited.count(a)) continue;
      bool merged_into_a = true;
      while (merged_into_a) {
        merged_into_a = false;
        const std::vector<int> neighbors = graph[a];
        for (int b : neighbors) {
          if (b == a || !dict.count(b)) continue;
          Cluster& ca = dict[a];
          Cluster& cb = dict[b];
          if (!ca.plane || !cb.plane) continue;
          const MergeDecision decision = try_merge_pair(
              gather(ca, cloud, buf_a), gather(cb, cloud, buf_b), *ca.plane,
              *cb.plane, params, log ? &log->stats : nullptr,
              log && log->keep_trace);
          if (log && log->keep_trace) {
            log->trace.push_back({pass, a, b, decision.m_a, decision.m_b,
                                  decision.min_d, decision.merge});
          }
          if (!decision.merge) continue;

          // Absorb b into a and refit on the union.
          std::vector<int> merged;
          merged.reserve(ca.points.size() + cb.points.size());
          std::merge(ca.points.begin(), ca.points.end(), cb.points.begin(),
                     cb.points.end(), std::back_inserter(merged));
          ca.points = std::move(merged);
          try {
            ca.plane = fit_plane_lsq(cloud.positions, ca.points);
          } catch (const DegenerateFitError&) {
            // Keep the previous plane when the union is too flat to refit.
          }
          dict.erase(b);
          graph = build_cluster_graph(dict, cloud, params.u_neighbors);
          if (log) log->stats.merges += 1;
          merged_this_pass = true;
          merged_into_a = true;
          break;
        }
      }
      visited.insert(a);
    }
    if (log) log->stats.passes += 1;
    if (!merged_this_pass) break;
  }
  return dict;
}

TwoStageResult two_stage_merge_detail(const std::vector<ClusterDict>& dicts,
                                      const PointCloud& cloud,
                                      const MergeParams& params, MergeLog* log) {
  params.validate();
  // The dicts must not share point indices.
  std::set<int> seen;
  std::size_t total = 0;
  for (const ClusterDict& dict : dicts) {
    for (const auto& [id, cluster] : dict) {
      for (int i : cluster.points) {
        if (i < 0 || static_cast<std::size_t>(i) >= cloud.size()) {
          throw InputError("cluster point index out of range");
        }
        seen.insert(i);
        ++total;
      }
    }
  }
  if (seen.size() != total) throw InputError("cluster dicts overlap");

  // Stage 1: merge each dict independently, then union under fresh ids.
  ClusterDict combined;
  int next_id = 0;
  for (const ClusterDict& dict : dicts) {
    ClusterDict merged = merge_process(dict, cloud, params, log);
    for (auto& [id, cluster] : merged) {
      combined.emplace(next_id++, std::move(cluster));
    }
  }

  // Stage 2: one more merge over the union.
  ClusterDict final_dict = merge_process(std::move(combined), cloud, params, log);

  TwoStageResult result;
  result.seg.labels.assign(cloud.size(), -1);
  int label = 0;
  for (auto& [id, cluster] : final_dict) {
    for (int i : cluster.points) result.seg.labels[static_cast<std::size_t>(i)] = label;
    result.clusters.emplace(label, std::move(cluster));
    ++label;
  }
  return result;
}

Segmentation two_stage_merge(const std::vector<ClusterDict>& dicts,
                             const PointCloud& cloud, const MergeParams& params,
                             MergeLog* log) {
  return two_stage_merge_detail(dicts, cloud, params, log).seg;
}

}  // namespace moransac
