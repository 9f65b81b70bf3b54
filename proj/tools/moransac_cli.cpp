// moransac: plane instance segmentation of cluttered RGB-D point clouds.
//
// Subcommands: synth, train, segment, baseline, eval, grasp.
// Exit codes: 0 success, 2 input/config error, 3 pipeline failure, 1 other.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "moransac/camera.hpp"
#include "moransac/config.hpp"
#include "moransac/dpc.hpp"
#include "moransac/grasp.hpp"
#include "moransac/image_io.hpp"
#include "moransac/metrics.hpp"
#include "moransac/model_io.hpp"
#include "moransac/pipeline.hpp"
#include "moransac/ply_io.hpp"
#include "moransac/synth.hpp"
#include "moransac/train.hpp"

namespace fs = std::filesystem;
using namespace moransac;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitInput = 2;
constexpr int kExitPipeline = 3;

struct CommonOpts {
  std::string config_file;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_file, "key = value config file");
  cmd->add_option("--seed", opts.seed, "override the RNG seed");
}

RunConfig make_config(const CommonOpts& opts) {
  RunConfig config;
  if (!opts.config_file.empty()) config = RunConfig::from_file(opts.config_file);
  if (opts.seed) {
    config.apply("seed", std::to_string(*opts.seed));
  }
  config.validate();
  return config;
}

struct InputOpts {
  std::string input;       // PLY file or scene archive directory
  std::string depth, rgb, intrinsics, gt_image;
};

void add_input(CLI::App* cmd, InputOpts& opts) {
  cmd->add_option("--input", opts.input, "input PLY file or scene directory");
  cmd->add_option("--depth", opts.depth, "16-bit depth PGM");
  cmd->add_option("--rgb", opts.rgb, "8-bit RGB PPM aligned with --depth");
  cmd->add_option("--intrinsics", opts.intrinsics, "intrinsics key-value file");
  cmd->add_option("--gt-image", opts.gt_image, "per-pixel label PGM");
}

struct LoadedInput {
  PointCloud cloud;
  std::optional<Segmentation> gt;
  std::optional<CameraIntrinsics> intrinsics;  // set for frame inputs
  int frame_width = 0;
  int frame_height = 0;
};

LoadedInput load_input(const InputOpts& opts, const RunConfig& config) {
  LoadedInput in;
  if (!opts.depth.empty()) {
    if (opts.intrinsics.empty()) {
      throw InputError("frame input needs --intrinsics alongside --depth");
    }
    const DepthImage depth = read_depth_pgm(opts.depth);
    LoadedFrame frame = load_rgbd_frame(opts.depth, opts.rgb, opts.intrinsics,
                                        opts.gt_image, config.normal_k);
    in.cloud = std::move(frame.cloud);
    in.gt = std::move(frame.gt);
    in.intrinsics = read_intrinsics(opts.intrinsics);
    in.frame_width = depth.width;
    in.frame_height = depth.height;
    return in;
  }
  if (opts.input.empty()) {
    throw InputError("no input given; use --input or --depth/--intrinsics");
  }
  if (fs::is_directory(opts.input)) {
    Scene scene = load_scene(opts.input);
    in.cloud = std::move(scene.cloud);
    in.gt = std::move(scene.gt);
  } else {
    in.cloud = read_ply(opts.input);
  }
  return in;
}

void write_clusters_csv(const fs::path& file, const ClusterDict& clusters) {
  std::ofstream out(file);
  if (!out) throw InputError("cannot write " + file.string());
  out << "label,count,nx,ny,nz,offset\n";
  out.precision(17);
  for (const auto& [label, cluster] : clusters) {
    out << label << ',' << cluster.points.size() << ',';
    if (cluster.plane) {
      out << cluster.plane->normal.x() << ',' << cluster.plane->normal.y() << ','
          << cluster.plane->normal.z() << ',' << cluster.plane->offset;
    } else {
      out << ",,,";
    }
    out << "\n";
  }
}

// 2D label projection of the segmented cloud, with a one-pixel dilation pass
// to close projection holes.
void write_projection(const fs::path& file, const PointCloud& cloud,
                      const Segmentation& seg, const CameraIntrinsics& k,
                      int width, int height) {
  const FrameRender render = project_to_frame(cloud, k, width, height);
  RgbImage img = RgbImage::zeros(width, height);
  std::vector<bool> filled(static_cast<std::size_t>(width) * height, false);
  auto paint = [](RgbImage& dst, std::size_t pix, const Vec3& c) {
    dst.pixels[pix] = {static_cast<std::uint8_t>(std::lround(c.x() * 255)),
                       static_cast<std::uint8_t>(std::lround(c.y() * 255)),
                       static_cast<std::uint8_t>(std::lround(c.z() * 255))};
  };
  for (std::size_t pix = 0; pix < render.point_index.size(); ++pix) {
    const int idx = render.point_index[pix];
    if (idx < 0) continue;
    paint(img, pix, label_color(seg.labels[static_cast<std::size_t>(idx)]));
    filled[pix] = true;
  }
  RgbImage dilated = img;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * width + x;
      if (filled[pix]) continue;
      for (const auto [dx, dy] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
        const std::size_t np = static_cast<std::size_t>(ny) * width + nx;
        if (filled[np]) {
          dilated.pixels[pix] = img.pixels[np];
          break;
        }
      }
    }
  }
  write_rgb_ppm(file, dilated);
}

void export_segmentation(const fs::path& out_dir, const PipelineOutput& result,
                         const LoadedInput& input) {
  fs::create_directories(out_dir);
  write_labels(out_dir / "labels.txt", result.seg);
  write_ply(out_dir / "segmented.ply", colorize_by_labels(result.cloud, result.seg));
  write_clusters_csv(out_dir / "clusters.csv", result.clusters);
  if (input.intrinsics) {
    write_projection(out_dir / "projection.ppm", result.cloud, result.seg,
                     *input.intrinsics, input.frame_width, input.frame_height);
  }
}

int run_synth(const CommonOpts& common, const std::string& out_dir, int scenes,
              int objects, int points_per_face, double noise, double outliers,
              const std::string& kinds) {
  const RunConfig config = make_config(common);
  SceneSpec spec;
  spec.object_count = objects;
  spec.points_per_face = points_per_face;
  spec.noise_sigma = noise;
  spec.outlier_fraction = outliers;
  spec.kinds.clear();
  std::stringstream ks(kinds);
  std::string kind;
  while (std::getline(ks, kind, ',')) {
    if (kind == "box") {
      spec.kinds.push_back(ObjectKind::kBox);
    } else if (kind == "cylinder") {
      spec.kinds.push_back(ObjectKind::kCylinder);
    } else {
      throw InputError("unknown object kind '" + kind + "'");
    }
  }
  for (int s = 0; s < scenes; ++s) {
    spec.seed = mix_seed(config.seed, static_cast<std::uint64_t>(s));
    const Scene scene = gen_scene(spec);
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04d", s);
    save_scene(fs::path(out_dir) / name, scene, &spec);
  }
  std::cout << "wrote " << scenes << " scenes to " << out_dir << "\n";
  return kExitOk;
}

int run_train(const CommonOpts& common, const std::string& data_dir,
              const std::string& model_out, const std::string& resume,
              std::optional<int> epochs) {
  RunConfig config = make_config(common);
  if (epochs) config.train.epochs = *epochs;
  config.validate();

  std::vector<PointCloud> dataset;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "cloud.ply")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  for (const fs::path& dir : dirs) dataset.push_back(load_scene(dir).cloud);
  if (dataset.empty()) throw InputError("no scene archives under " + data_dir);

  ModelFile model;
  if (!resume.empty()) model = load_model(resume);
  VotingNet net = std::move(model.net);
  const TrainResult result = train(net, dataset, config.train);

  model.net = std::move(net);
  model.epochs_trained += static_cast<std::uint32_t>(result.epochs_trained);
  save_model(model_out, model);
  write_loss_log(fs::path(model_out).string() + ".loss.csv", result.log);

  std::cout << "trained on " << dataset.size() << " clouds for "
            << result.epochs_trained << " epochs (total "
            << model.epochs_trained << ")\n";
  for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e) {
    std::cout << "epoch " << e << " mean loss " << result.epoch_mean_loss[e] << "\n";
  }
  return kExitOk;
}

int run_segment(const CommonOpts& common, const InputOpts& input_opts,
                const std::string& model_file, bool no_net,
                const std::string& out_dir) {
  const RunConfig config = make_config(common);
  const LoadedInput input = load_input(input_opts, config);

  std::optional<VotingNet> net;
  if (!no_net) {
    if (model_file.empty()) {
      throw InputError("segment needs --model, or --no-net for the ablation");
    }
    net = load_model(model_file).net;
  }
  const PipelineOutput result =
      run_segmentation(input.cloud, net ? &*net : nullptr, config);
  if (!out_dir.empty()) export_segmentation(out_dir, result, input);
  std::cout << "segmented " << result.cloud.size() << " points into "
            << result.seg.num_clusters() << " clusters\n";
  return kExitOk;
}

int run_baseline_cmd(const CommonOpts& common, const InputOpts& input_opts,
                     const std::string& out_dir) {
  const RunConfig config = make_config(common);
  const LoadedInput input = load_input(input_opts, config);
  const PipelineOutput result = run_baseline(input.cloud, config);
  if (!out_dir.empty()) export_segmentation(out_dir, result, input);
  std::cout << "baseline segmented " << result.cloud.size() << " points into "
            << result.seg.num_clusters() << " clusters\n";
  return kExitOk;
}

int run_eval(const CommonOpts& common, const std::string& cloud_file,
             const std::string& scene_dir, const std::string& gt_file,
             const std::string& pred_file, const std::string& voxel_list,
             const std::string& out_file) {
  RunConfig config = make_config(common);
  if (!voxel_list.empty()) config.apply("eval.voxels", voxel_list);

  PointCloud cloud;
  Segmentation gt;
  if (!scene_dir.empty()) {
    Scene scene = load_scene(scene_dir);
    cloud = std::move(scene.cloud);
    gt = std::move(scene.gt);
  } else {
    if (cloud_file.empty() || gt_file.empty()) {
      throw InputError("eval needs --scene, or --cloud plus --gt");
    }
    cloud = read_ply(cloud_file);
    gt = read_labels(gt_file);
  }
  const Segmentation pred = read_labels(pred_file);
  if (pred.labels.size() != cloud.size() || gt.labels.size() != cloud.size()) {
    throw InputError("label counts do not match the cloud");
  }

  const std::vector<MetricsReport> reports =
      evaluate_sweep(cloud, gt, pred, config.eval_voxels);
  std::printf("%10s %10s %8s %8s %8s\n", "voxel", "voxels", "VOI", "RI", "SC");
  for (const MetricsReport& r : reports) {
    std::printf("%10.4f %10zu %8.4f %8.4f %8.4f\n", r.voxel_size, r.voxel_count,
                r.voi, r.ri, r.sc);
  }
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out) throw InputError("cannot write " + out_file);
    out << "voxel_size,voxel_count,voi,ri,sc\n";
    out.precision(17);
    for (const MetricsReport& r : reports) {
      out << r.voxel_size << ',' << r.voxel_count << ',' << r.voi << ',' << r.ri
          << ',' << r.sc << "\n";
    }
  }
  return kExitOk;
}

int run_grasp(const CommonOpts& common, const InputOpts& input_opts,
              const std::string& model_file, bool no_net, const std::string& up_str,
              const std::string& out_dir) {
  const RunConfig config = make_config(common);
  const LoadedInput input = load_input(input_opts, config);

  std::optional<VotingNet> net;
  if (!no_net) {
    if (model_file.empty()) {
      throw InputError("grasp needs --model, or --no-net for the ablation");
    }
    net = load_model(model_file).net;
  }
  Vec3 up = config.up;
  if (!up_str.empty()) {
    std::string s = up_str;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    if (!(in >> up.x() >> up.y() >> up.z())) {
      throw InputError("cannot parse --up '" + up_str + "'");
    }
  }

  const PipelineOutput result =
      run_segmentation(input.cloud, net ? &*net : nullptr, config);
  const GraspSelection grasp =
      select_grasp_point(result.cloud, result.clusters, up, config.grasp_floor_angle_deg);

  std::printf("grasp point %.6f %.6f %.6f (cluster %d)\n", grasp.point.x(),
              grasp.point.y(), grasp.point.z(), grasp.cluster_id);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    export_segmentation(out_dir, result, input);
    std::ofstream out(fs::path(out_dir) / "grasp.txt");
    out.precision(17);
    out << grasp.point.x() << " " << grasp.point.y() << " " << grasp.point.z()
        << " " << grasp.cluster_id << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-object plane instance segmentation for cluttered RGB-D clouds"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic scene archives");
  CommonOpts synth_common;
  add_common(synth, synth_common);
  std::string synth_out = "scenes";
  int synth_scenes = 10, synth_objects = 5, synth_ppf = 600;
  double synth_noise = 0.002, synth_outliers = 0.05;
  std::string synth_kinds = "box";
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--scenes", synth_scenes, "number of scenes");
  synth->add_option("--objects", synth_objects, "objects per scene");
  synth->add_option("--points-per-face", synth_ppf, "samples per face");
  synth->add_option("--noise", synth_noise, "surface noise sigma (m)");
  synth->add_option("--outliers", synth_outliers, "outlier fraction [0,1)");
  synth->add_option("--kinds", synth_kinds, "comma list of box,cylinder");

  // train
  auto* train_cmd = app.add_subcommand("train", "train the voting network");
  CommonOpts train_common;
  add_common(train_cmd, train_common);
  std::string train_data, train_out = "model.morn", train_resume;
  std::optional<int> train_epochs;
  train_cmd->add_option("--data", train_data, "directory of scene archives")->required();
  train_cmd->add_option("--out", train_out, "model file to write");
  train_cmd->add_option("--resume", train_resume, "continue from an existing model");
  train_cmd->add_option("--epochs", train_epochs, "override train.epochs");

  // segment
  auto* segment = app.add_subcommand("segment", "full segmentation pipeline");
  CommonOpts seg_common;
  InputOpts seg_input;
  add_common(segment, seg_common);
  add_input(segment, seg_input);
  std::string seg_model, seg_out;
  bool seg_no_net = false;
  segment->add_option("--model", seg_model, "trained voting net file");
  segment->add_flag("--no-net", seg_no_net, "ablation: subclusters without votes");
  segment->add_option("--out", seg_out, "output directory");

  // baseline
  auto* baseline = app.add_subcommand("baseline", "sequential multi-plane RANSAC");
  CommonOpts base_common;
  InputOpts base_input;
  add_common(baseline, base_common);
  add_input(baseline, base_input);
  std::string base_out;
  baseline->add_option("--out", base_out, "output directory");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "VOI/RI/SC against ground truth");
  CommonOpts eval_common;
  add_common(eval_cmd, eval_common);
  std::string eval_cloud, eval_scene, eval_gt, eval_pred, eval_voxels, eval_out;
  eval_cmd->add_option("--cloud", eval_cloud, "cloud PLY (with --gt)");
  eval_cmd->add_option("--scene", eval_scene, "scene archive with ground truth");
  eval_cmd->add_option("--gt", eval_gt, "ground-truth label file");
  eval_cmd->add_option("--pred", eval_pred, "predicted label file")->required();
  eval_cmd->add_option("--voxel", eval_voxels, "comma list of voxel sizes (m)");
  eval_cmd->add_option("--out", eval_out, "metrics CSV to write");

  // grasp
  auto* grasp = app.add_subcommand("grasp", "suction grasp point selection");
  CommonOpts grasp_common;
  InputOpts grasp_input;
  add_common(grasp, grasp_common);
  add_input(grasp, grasp_input);
  std::string grasp_model, grasp_up, grasp_out;
  bool grasp_no_net = false;
  grasp->add_option("--model", grasp_model, "trained voting net file");
  grasp->add_flag("--no-net", grasp_no_net, "ablation: subclusters without votes");
  grasp->add_option("--up", grasp_up, "up direction x,y,z");
  grasp->add_option("--out", grasp_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*synth) {
      return run_synth(synth_common, synth_out, synth_scenes, synth_objects,
                       synth_ppf, synth_noise, synth_outliers, synth_kinds);
    }
    if (*train_cmd) {
      return run_train(train_common, train_data, train_out, train_resume,
                       train_epochs);
    }
    if (*segment) {
      return run_segment(seg_common, seg_input, seg_model, seg_no_net, seg_out);
    }
    if (*baseline) {
      return run_baseline_cmd(base_common, base_input, base_out);
    }
    if (*eval_cmd) {
      return run_eval(eval_common, eval_cloud, eval_scene, eval_gt, eval_pred,
                      eval_voxels, eval_out);
    }
    if (*grasp) {
      return run_grasp(grasp_common, grasp_input, grasp_model, grasp_no_net,
                       grasp_up, grasp_out);
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const PipelineError& e) {
    std::cerr << "pipeline error: " << e.what() << "\n";
    return kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
