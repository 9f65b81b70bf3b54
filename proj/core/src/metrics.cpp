#include "moransac/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

namespace moransac {

namespace {

using VoxelKey = std::array<std::int64_t, 3>;

// Occupied voxels in grid order, each holding its member point indices.
std::vector<std::vector<int>> voxel_groups(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0)) throw InputError("voxel size must be positive");
  Vec3 origin = cloud.positions.front();
  for (const Vec3& p : cloud.positions) origin = origin.cwiseMin(p);
  std::map<VoxelKey, std::vector<int>> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    const VoxelKey key{
        static_cast<std::int64_t>(std::floor((p.x() - origin.x()) / voxel)),
        static_cast<std::int64_t>(std::floor((p.y() - origin.y()) / voxel)),
        static_cast<std::int64_t>(std::floor((p.z() - origin.z()) / voxel))};
    cells[key].push_back(static_cast<int>(i));
  }
  std::vector<std::vector<int>> groups;
  groups.reserve(cells.size());
  for (auto& [key, members] : cells) groups.push_back(std::move(members));
  return groups;
}

int majority_label(const std::vector<int>& members, const std::vector<int>& labels) {
  std::map<int, int> counts;
  for (int i : members) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label >= 0) counts[label] += 1;
  }
  if (counts.empty()) return -1;
  int best_label = -1;
  int best_count = 0;
  for (const auto& [label, count] : counts) {
    if (count > best_count) {  // ties keep the lowest label (map is ordered)
      best_count = count;
      best_label = label;
    }
  }
  return best_label;
}

struct Contingency {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> row;
  std::map<int, double> col;
  double n = 0;
};

Contingency make_contingency(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) {
    throw InputError("label lists differ in length: " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  }
  Contingency t;
  for (std::size_t i = 0; i < a.size(); ++i) {
    t.joint[{a[i], b[i]}] += 1;
    t.row[a[i]] += 1;
    t.col[b[i]] += 1;
  }
  t.n = static_cast<double>(a.size());
  return t;
}

double pairs2(double m) { return m * (m - 1.0) / 2.0; }

}  // namespace

std::vector<int> voxelize_labels(const PointCloud& cloud, const Segmentation& seg,
                                 double voxel) {
  if (seg.labels.size() != cloud.size()) {
    throw InputError("segmentation length does not match the cloud");
  }
  if (cloud.empty()) return {};
  std::vector<int> out;
  for (const std::vector<int>& members : voxel_groups(cloud, voxel)) {
    out.push_back(majority_label(members, seg.labels));
  }
  return out;
}

double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() < 2) throw InputError("rand index needs at least 2 elements");
  const Contingency t = make_contingency(a, b);
  double same_a = 0, same_b = 0, same_both = 0;
  for (const auto& [label, count] : t.row) same_a += pairs2(count);
  for (const auto& [label, count] : t.col) same_b += pairs2(count);
  for (const auto& [cell, count] : t.joint) same_both += pairs2(count);
  const double total = pairs2(t.n);
  const double agreements = total - same_a - same_b + 2.0 * same_both;
  return agreements / total;
}

double variation_of_information(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() < 2) throw InputError("VOI needs at least 2 elements");
  const Contingency t = make_contingency(a, b);
  auto entropy = [&](const std::map<int, double>& counts) {
    double h = 0;
    for (const auto& [label, count] : counts) {
      const double p = count / t.n;
      h -= p * std::log(p);
    }
    return h;
  };
  double mutual = 0;
  for (const auto& [cell, count] : t.joint) {
    const double pij = count / t.n;
    const double pi = t.row.at(cell.first) / t.n;
    const double pj = t.col.at(cell.second) / t.n;
    mutual += pij * std::log(pij / (pi * pj));
  }
  return std::max(0.0, entropy(t.row) + entropy(t.col) - 2.0 * mutual);
}

double segmentation_covering(const std::vector<int>& gt, const std::vector<int>& pred) {
  const Contingency t = make_contingency(gt, pred);
  double weight_total = 0;
  for (const auto& [label, count] : t.row) {
    if (label >= 0) weight_total += count;
  }
  if (weight_total == 0) return 0.0;

  // Best IoU per gt region over assigned predicted regions.
  std::map<int, double> best;
  for (const auto& [cell, inter] : t.joint) {
    const auto [gl, pl] = cell;
    if (gl < 0 || pl < 0) continue;
    const double uni = t.row.at(gl) + t.col.at(pl) - inter;
    const double iou = inter / uni;
    auto [it, inserted] = best.emplace(gl, iou);
    if (!inserted && iou > it->second) it->second = iou;
  }
  double covering = 0;
  for (const auto& [label, count] : t.row) {
    if (label < 0) continue;
    const auto it = best.find(label);
    if (it != best.end()) covering += count * it->second;
  }
  return covering / weight_total;
}

MetricsReport evaluate(const PointCloud& cloud, const Segmentation& gt,
                       const Segmentation& pred, double voxel) {
  if (gt.labels.size() != cloud.size() || pred.labels.size() != cloud.size()) {
    throw InputError("segmentation lengths do not match the cloud");
  }
  if (cloud.empty()) throw InputError("no occupied voxels: empty cloud");
  const auto groups = voxel_groups(cloud, voxel);
  std::vector<int> gt_voxels, pred_voxels;
  gt_voxels.reserve(groups.size());
  pred_voxels.reserve(groups.size());
  for (const std::vector<int>& members : groups) {
    gt_voxels.push_back(majority_label(members, gt.labels));
    pred_voxels.push_back(majority_label(members, pred.labels));
  }
  MetricsReport report;
  report.voxel_size = voxel;
  report.voxel_count = groups.size();
  if (groups.size() < 2) {
    // A single voxel carries no pair information; identical-by-definition.
    report.ri = 1.0;
    report.voi = 0.0;
    report.sc = gt_voxels == pred_voxels ? 1.0 : 0.0;
    return report;
  }
  report.ri = rand_index(gt_voxels, pred_voxels);
  report.voi = variation_of_information(gt_voxels, pred_voxels);
  report.sc = segmentation_covering(gt_voxels, pred_voxels);
  return report;
}

std::vector<MetricsReport> evaluate_sweep(const PointCloud& cloud,
                                          const Segmentation& gt,
                                          const Segmentation& pred,
                                          const std::vector<double>& voxels) {
  std::vector<MetricsReport> reports;
  reports.reserve(voxels.size());
  for (double v : voxels) reports.push_back(evaluate(cloud, gt, pred, v));
  return reports;
}

}  // namespace moransac
