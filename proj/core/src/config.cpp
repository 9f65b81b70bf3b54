#include "moransac/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace moransac {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T v{};
  if (!(in >> v)) throw ConfigError("cannot parse value '" + value + "' for key " + key);
  std::string rest;
  if (in >> rest) throw ConfigError("trailing garbage in value for key " + key);
  return v;
}

std::vector<double> parse_double_list(const std::string& key, std::string value) {
  std::replace(value.begin(), value.end(), ',', ' ');
  std::istringstream in(value);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (out.empty()) throw ConfigError("empty list for key " + key);
  return out;
}

std::vector<int> parse_int_list(const std::string& key, std::string value) {
  std::replace(value.begin(), value.end(), ',', ' ');
  std::istringstream in(value);
  std::vector<int> out;
  int v;
  while (in >> v) out.push_back(v);
  if (out.empty()) throw ConfigError("empty list for key " + key);
  return out;
}

}  // namespace

std::map<std::string, std::string> read_kv_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open config file " + file.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (!trim(line).empty()) throw ConfigError("malformed config line: " + line);
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key in config line: " + line);
    kv[key] = value;
  }
  return kv;
}

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
    train.seed = seed;
  } else if (key == "normals.k") {
    normal_k = parse_number<int>(key, value);
    train.normal_k = normal_k;
  } else if (key == "points.cap") {
    points_cap = parse_number<int>(key, value);
  } else if (key == "ransac.threshold") {
    ransac_threshold = parse_number<double>(key, value);
  } else if (key == "ransac.max_iterations") {
    ransac_max_iterations = parse_number<int>(key, value);
  } else if (key == "ransac.min_inliers") {
    ransac_min_inliers = parse_number<int>(key, value);
  } else if (key == "ransac.max_planes") {
    ransac_max_planes = parse_number<int>(key, value);
  } else if (key == "pseudo.threshold") {
    pseudo_threshold = parse_number<double>(key, value);
    train.pseudo_ransac.inlier_threshold = pseudo_threshold;
  } else if (key == "pseudo.max_iterations") {
    pseudo_max_iterations = parse_number<int>(key, value);
    train.pseudo_ransac.max_iterations = pseudo_max_iterations;
  } else if (key == "pseudo.min_inliers") {
    pseudo_min_inliers = parse_number<int>(key, value);
    train.pseudo_ransac.min_inliers = pseudo_min_inliers;
  } else if (key == "merge.beta") {
    merge.beta = parse_number<double>(key, value);
  } else if (key == "merge.gamma") {
    merge.gamma = parse_number<double>(key, value);
  } else if (key == "merge.delta") {
    merge.delta = parse_number<double>(key, value);
  } else if (key == "merge.u") {
    merge.u_neighbors = parse_number<int>(key, value);
  } else if (key == "train.epochs") {
    train.epochs = parse_number<int>(key, value);
  } else if (key == "train.learning_rate") {
    train.learning_rate = parse_number<double>(key, value);
  } else if (key == "train.weight_decay") {
    train.weight_decay = parse_number<double>(key, value);
  } else if (key == "train.k_min") {
    train.k_min = parse_number<int>(key, value);
  } else if (key == "train.k_max") {
    train.k_max = parse_number<int>(key, value);
  } else if (key == "train.alpha") {
    train.alpha = parse_number<double>(key, value);
  } else if (key == "train.points_per_cloud") {
    train.points_per_cloud = parse_number<int>(key, value);
  } else if (key == "net.hidden") {
    train.net.backbone_hidden = parse_int_list(key, value);
  } else if (key == "net.feature_dim") {
    train.net.feature_dim = parse_number<int>(key, value);
  } else if (key == "loss.norm") {
    if (value == "l1" || value == "L1") {
      train.loss_norm = LossNorm::kL1;
    } else if (value == "l2" || value == "L2") {
      train.loss_norm = LossNorm::kL2;
    } else {
      throw ConfigError("loss.norm must be l1 or l2, got '" + value + "'");
    }
  } else if (key == "dpc.k_infer") {
    k_infer = parse_number<int>(key, value);
  } else if (key == "dpc.splits") {
    kmeans_splits = parse_number<int>(key, value);
  } else if (key == "grasp.floor_angle_deg") {
    grasp_floor_angle_deg = parse_number<double>(key, value);
  } else if (key == "grasp.up") {
    const std::vector<double> v = parse_double_list(key, value);
    if (v.size() != 3) throw ConfigError("grasp.up needs three components");
    up = Vec3(v[0], v[1], v[2]);
  } else if (key == "eval.voxels") {
    eval_voxels = parse_double_list(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void RunConfig::apply_all(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) apply(key, value);
}

void RunConfig::validate() const {
  if (normal_k < 3) throw ConfigError("normals.k must be at least 3");
  if (points_cap < 16) throw ConfigError("points.cap too small");
  if (!(ransac_threshold > 0)) throw ConfigError("ransac.threshold must be positive");
  if (ransac_max_iterations < 1) throw ConfigError("ransac.max_iterations must be at least 1");
  if (ransac_min_inliers < 0) throw ConfigError("ransac.min_inliers must be non-negative");
  if (ransac_max_planes < 1) throw ConfigError("ransac.max_planes must be at least 1");
  if (!(pseudo_threshold > 0)) throw ConfigError("pseudo.threshold must be positive");
  if (pseudo_max_iterations < 1) throw ConfigError("pseudo.max_iterations must be at least 1");
  if (pseudo_min_inliers < 3) throw ConfigError("pseudo.min_inliers must be at least 3");
  if (k_infer < 1) throw ConfigError("dpc.k_infer must be at least 1");
  if (kmeans_splits < 1) throw ConfigError("dpc.splits must be at least 1");
  if (!(grasp_floor_angle_deg > 0 && grasp_floor_angle_deg < 90)) {
    throw ConfigError("grasp.floor_angle_deg must lie in (0, 90)");
  }
  if (up.norm() < 1e-9) throw ConfigError("grasp.up must be a nonzero vector");
  if (eval_voxels.empty()) throw ConfigError("eval.voxels must not be empty");
  for (double v : eval_voxels) {
    if (!(v > 0)) throw ConfigError("eval.voxels entries must be positive");
  }
  merge.validate();
  train.validate();
}

RunConfig RunConfig::from_file(const std::filesystem::path& file) {
  RunConfig config;
  config.apply_all(read_kv_file(file));
  config.validate();
  return config;
}

RansacParams RunConfig::baseline_params(std::size_t cloud_size) const {
  RansacParams params;
  params.inlier_threshold = ransac_threshold;
  params.max_iterations = ransac_max_iterations;
  params.min_inliers =
      ransac_min_inliers > 0 ? ransac_min_inliers : default_min_inliers(cloud_size);
  params.seed = seed;
  return params;
}

RansacParams RunConfig::pseudo_params() const {
  RansacParams params;
  params.inlier_threshold = pseudo_threshold;
  params.max_iterations = pseudo_max_iterations;
  params.min_inliers = pseudo_min_inliers;
  params.seed = seed;
  return params;
}

InferParams RunConfig::infer_params() const {
  InferParams params;
  params.k_per_split = k_infer;
  params.kmeans_splits = kmeans_splits;
  params.seed = seed;
  params.cluster_ransac = pseudo_params();
  return params;
}

}  // namespace moransac
