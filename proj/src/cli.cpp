#include "augundo/cli.hpp"

#include "augundo/harness.hpp"
#include "augundo/io.hpp"
#include "augundo/pipeline.hpp"
#include "augundo/scenegen.hpp"
#include "augundo/undo.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

namespace augundo::cli {

namespace {

namespace fs = std::filesystem;
using pipeline::AugmentationConfig;

// Dense depth files may hold any positive value a 16-bit millimeter PNG can.
constexpr DepthRange kFileRange{0.001, 65.535};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::string preset;
  std::string out;
};

void add_common(CLI::App* app, CommonOptions& o, const std::string& default_preset) {
  o.preset = default_preset;
  app->add_option("--config", o.config_path, "Augmentation config (JSON)")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "Random seed (overrides the config seed)");
  app->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--preset", o.preset, "Config preset when no --config is given")
      ->check(CLI::IsMember({"void", "kitti", "none"}));
  app->add_option("--out", o.out, "Output directory or file");
}

AugmentationConfig resolve_config(const CommonOptions& o) {
  AugmentationConfig c;
  if (!o.config_path.empty()) {
    c = io::config_from_text(io::read_text_file(o.config_path));
  } else if (o.preset == "kitti") {
    c = AugmentationConfig::kitti_preset();
  } else if (o.preset == "none") {
    c = AugmentationConfig::none();
  } else {
    c = AugmentationConfig::void_preset();
  }
  if (o.seed) c.seed = *o.seed;
  return c;
}

DenseDepthMap read_dense(const fs::path& path) {
  Grid<double> g = io::read_depth_png(path);
  return DenseDepthMap::create(g.dims(), std::move(g.storage()), kFileRange);
}

struct WeightOptions {
  loss::LossWeights weights;
  bool l2 = false;
  bool mask_smoothness = false;

  void add(CLI::App* app) {
    app->add_option("--alpha", weights.alpha, "Photometric weight");
    app->add_option("--beta", weights.beta, "Sparse-depth weight");
    app->add_option("--lambda", weights.lambda, "Smoothness weight");
    app->add_option("--ssim-weight", weights.ssim_weight, "SSIM share of the photometric error");
    app->add_flag("--l2", l2, "Squared sparse-depth error");
    app->add_flag("--mask-smoothness", mask_smoothness, "Restrict smoothness to mask-1 neighbour pairs");
  }
  [[nodiscard]] loss::LossOptions options() const {
    return {l2 ? loss::SparseNorm::L2 : loss::SparseNorm::L1, !mask_smoothness};
  }
};

int cmd_augment(const CommonOptions& o, const std::vector<std::string>& samples, const std::vector<std::string>& depths,
                std::ostream& out) {
  if (!depths.empty() && depths.size() != samples.size()) {
    throw Error(ErrorCode::BadParam, "--depth must be given once per --sample");
  }
  const AugmentationConfig config = resolve_config(o);
  const fs::path out_dir = o.out.empty() ? fs::path("augmented") : fs::path(o.out);
  std::vector<std::string> lines(samples.size());
  pipeline::parallel_for(samples.size(), o.workers, [&](std::size_t i) {
    const io::LoadedSample loaded = io::load_sample(samples[i]);
    const auto& t = loaded.triplet;
    Rng rng(mix_seed(config.seed, i));
    const pipeline::AugmentationSample sample = pipeline::sample_augmentation(config, t.current.dims(), rng);
    const fs::path dir = out_dir / fs::path(samples[i]).stem();
    io::write_image_png(dir / "augmented_image.png", pipeline::augment_image(t.current, sample));
    io::write_depth_png(dir / "augmented_sparse.png", pipeline::augment_sparse(t.sparse, sample).grid());
    io::write_text_file(dir / "record.json", io::record_to_text(sample.geometric));
    io::write_text_file(dir / "sample.json", io::sample_to_text(sample));
    if (!depths.empty()) {
      const DenseDepthMap d = read_dense(depths[i]);
      if (d.dims() != t.current.dims()) throw Error(ErrorCode::DimsMismatch, "depth and image dims differ");
      const DenseDepthMap warped =
          sample.geometric.empty() ? d : geometric::warp_dense_depth(d, geometric::compose(sample.geometric));
      io::write_depth_png(dir / "augmented_depth.png", warped.grid());
    }
    lines[i] = dir.string() + " transforms=" + std::to_string(sample.geometric.size()) +
               " photometric=" + std::to_string(sample.photometric.size());
  });
  for (const auto& l : lines) out << l << "\n";
  return kSuccess;
}

int cmd_undo(const CommonOptions& o, const std::string& depth_path, const std::string& record_path,
             std::ostream& out) {
  const DenseDepthMap d_aug = read_dense(depth_path);
  const auto record = io::record_from_text(io::read_text_file(record_path));
  const auto result = undo::undo_depth(d_aug, record);
  const fs::path dir = o.out.empty() ? fs::path("undone") : fs::path(o.out);
  io::write_depth_png(dir / "depth.png", result.depth.grid());
  io::write_mask_png(dir / "mask.png", result.mask);
  out << dir.string() << " valid_pixels=" << result.mask.count_valid() << "\n";
  return kSuccess;
}

int cmd_loss(const CommonOptions& o, const std::string& sample_path, const std::string& depth_path,
             const std::string& mask_path, const std::string& predictor_name, const WeightOptions& w,
             std::ostream& out) {
  const io::LoadedSample loaded = io::load_sample(sample_path);
  const auto& t = loaded.triplet;
  loss::LossBreakdown result;
  if (!depth_path.empty()) {
    const DenseDepthMap depth = read_dense(depth_path);
    const ValidityMask mask = mask_path.empty() ? ValidityMask::ones(t.current.dims()) : io::read_mask_png(mask_path);
    result = loss::total_loss(t.current, {t.prev, t.next}, t.sparse, depth, mask, t.intrinsics,
                              {t.pose_prev, t.pose_next}, w.weights, w.options());
  } else {
    std::unique_ptr<pipeline::DepthPredictor> predictor;
    if (predictor_name == "oracle") {
      if (!loaded.ground_truth) throw Error(ErrorCode::MissingKey, "oracle predictor needs 'ground_truth' in the sidecar");
      const Grid<double>& gt = *loaded.ground_truth;
      predictor = std::make_unique<pipeline::OraclePredictor>(
          DenseDepthMap::create(gt.dims(), gt.storage(), kFileRange));
    } else {
      predictor = std::make_unique<pipeline::NearestFillPredictor>();
    }
    const AugmentationConfig config = resolve_config(o);
    Rng rng(config.seed);
    const auto step = pipeline::run_augundo_step(t, config, *predictor, w.weights, rng, w.options());
    result = step.loss;
    if (!o.out.empty()) io::save_artifacts(step.artifacts, step.loss, o.out);
  }
  const std::string report = io::loss_to_text(result);
  if (!o.out.empty()) io::write_text_file(fs::path(o.out) / "loss.json", report);
  out << report;
  return kSuccess;
}

int cmd_metrics(const CommonOptions& o, const std::string& pred, const std::string& gt, pipeline::EvalRange range,
                std::ostream& out) {
  const auto m = pipeline::evaluate_metrics(io::read_depth_png(pred), io::read_depth_png(gt), range);
  const std::string report = io::metrics_to_text(m);
  if (!o.out.empty()) io::write_text_file(o.out, report);
  out << report;
  return kSuccess;
}

int cmd_harness(const CommonOptions& o, int size, int trials, const std::vector<std::string>& excluded,
                std::ostream& out, std::ostream& err) {
  harness::HarnessOptions h;
  h.config = resolve_config(o);
  h.seed = o.seed.value_or(7);
  h.size = size;
  h.trials = trials;
  for (const auto& name : excluded) h.excluded.push_back(pipeline::ablation_family_from_string(name));
  const auto results = harness::run_harness(h);
  std::size_t failed = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    if (!r.passed) ++failed;
  }
  out << (results.size() - failed) << "/" << results.size() << " checks passed\n";
  if (failed > 0) {
    err << format_error("InvariantFailure", std::to_string(failed) + " harness checks failed") << "\n";
    return kInvariantFailure;
  }
  return kSuccess;
}

struct ScenegenOptions {
  int count = 1;
  std::string kind = "plane";
  int height = 64;
  int width = 64;
  double fx = 500.0;
  std::size_t points = 400;
};

int cmd_scenegen(const CommonOptions& o, const ScenegenOptions& s, std::ostream& out) {
  if (o.out.empty()) throw Error(ErrorCode::BadParam, "scenegen needs --out");
  const std::uint64_t seed = o.seed.value_or(0);
  const Dims dims{s.height, s.width};
  const auto k = CameraIntrinsics::create(s.fx, s.fx, (dims.width - 1) / 2.0, (dims.height - 1) / 2.0);
  std::vector<std::string> lines(static_cast<std::size_t>(std::max(0, s.count)));
  pipeline::parallel_for(lines.size(), o.workers, [&](std::size_t i) {
    Rng rng(mix_seed(seed, i));
    scenegen::SceneKind kind = scenegen::FrontoPlane{rng.uniform(1.5, 3.0)};
    if (s.kind == "step") kind = scenegen::TwoPlaneStep{1.0, 3.0, dims.width / 2};
    const auto scene = scenegen::make_scene(kind, dims, k, rng.next_seed());
    auto pose = [&](double sign) {
      const double tx = sign * rng.uniform(0.005, 0.02);
      const double ty = rng.uniform(-0.005, 0.005);
      const Eigen::Matrix3d r = axis_angle_rotation(Eigen::Vector3d::UnitY(), rng.uniform(-0.3, 0.3));
      return validate_pose(r, Eigen::Vector3d(tx, ty, rng.uniform(-0.01, 0.01)));
    };
    const RigidPose prev = pose(1.0);
    const RigidPose next = pose(-1.0);
    SparseDepthMap sparse = scenegen::sample_sparse(scene.depth, std::min(s.points, dims.area()), rng);
    const auto triplet = pipeline::make_synthetic_triplet(scene, prev, next, std::move(sparse));
    char stem[32];
    std::snprintf(stem, sizeof stem, "sample_%04zu", i);
    lines[i] = io::save_sample(o.out, stem, triplet, &scene.depth.grid()).string();
  });
  for (const auto& l : lines) out << l << "\n";
  return kSuccess;
}

}  // namespace

std::string format_error(std::string_view code, std::string_view message) {
  std::string escaped;
  for (const char c : message) {
    if (c == '"' || c == '\\') {
      escaped += '\\';
      escaped += c;
    } else if (c == '\n' || c == '\r') {
      escaped += ' ';
    } else {
      escaped += c;
    }
  }
  return "error: code=" + std::string(code) + " message=\"" + escaped + "\"";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"AugUndo: augment depth-completion inputs, undo geometric transforms, evaluate the loss"};
  app.require_subcommand(1);

  CommonOptions common;
  WeightOptions weights;

  auto* augment = app.add_subcommand("augment", "Augment samples and write transform records");
  std::vector<std::string> augment_samples, augment_depths;
  add_common(augment, common, "void");
  augment->add_option("--sample", augment_samples, "Sample sidecar (JSON); repeatable")->required()->check(CLI::ExistingFile);
  augment->add_option("--depth", augment_depths, "Dense depth PNG to forward-warp; one per sample")->check(CLI::ExistingFile);

  auto* undo_cmd = app.add_subcommand("undo", "Warp predicted depth back to the original frame");
  std::string undo_depth_path, undo_record_path;
  add_common(undo_cmd, common, "void");
  undo_cmd->add_option("--depth", undo_depth_path, "Depth PNG on the augmented canvas")->required()->check(CLI::ExistingFile);
  undo_cmd->add_option("--record", undo_record_path, "Transform record (JSON)")->required()->check(CLI::ExistingFile);

  auto* loss_cmd = app.add_subcommand("loss", "Compute the masked loss for a sample");
  std::string loss_sample, loss_depth, loss_mask, loss_predictor = "oracle";
  add_common(loss_cmd, common, "void");
  weights.add(loss_cmd);
  loss_cmd->add_option("--sample", loss_sample, "Sample sidecar (JSON)")->required()->check(CLI::ExistingFile);
  loss_cmd->add_option("--depth", loss_depth, "Depth on the original frame; skips augmentation")->check(CLI::ExistingFile);
  loss_cmd->add_option("--mask", loss_mask, "Validity mask PNG for --depth")->check(CLI::ExistingFile);
  loss_cmd->add_option("--predictor", loss_predictor, "Predictor for the full step")
      ->check(CLI::IsMember({"oracle", "nearest"}));

  auto* harness_cmd = app.add_subcommand("harness", "Run the property suite on synthetic scenes");
  int harness_size = 64, harness_trials = 50;
  std::vector<std::string> harness_excluded;
  add_common(harness_cmd, common, "void");
  harness_cmd->add_option("--size", harness_size, "Image side")->check(CLI::Range(8, 1024));
  harness_cmd->add_option("--trials", harness_trials, "Records per check")->check(CLI::Range(1, 100000));
  harness_cmd->add_option("--exclude", harness_excluded, "Ablation families to disable")
      ->check(CLI::IsMember({"TRN", "ROT", "HUE", "COJ", "RMP", "FLP", "RZD", "RMI"}));

  auto* metrics_cmd = app.add_subcommand("metrics", "Compare a depth map against ground truth");
  std::string metrics_pred, metrics_gt;
  pipeline::EvalRange range;
  add_common(metrics_cmd, common, "void");
  metrics_cmd->add_option("--pred", metrics_pred, "Predicted depth PNG")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--gt", metrics_gt, "Ground-truth depth PNG")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--min", range.min, "Minimum evaluated depth (m)");
  metrics_cmd->add_option("--max", range.max, "Maximum evaluated depth (m)");

  auto* scenegen_cmd = app.add_subcommand("scenegen", "Write synthetic samples with ground truth");
  ScenegenOptions scene_options;
  add_common(scenegen_cmd, common, "void");
  scenegen_cmd->add_option("--count", scene_options.count, "Number of samples")->check(CLI::NonNegativeNumber);
  scenegen_cmd->add_option("--kind", scene_options.kind, "Scene kind")->check(CLI::IsMember({"plane", "step"}));
  scenegen_cmd->add_option("--height", scene_options.height, "Image height")->check(CLI::Range(8, 4096));
  scenegen_cmd->add_option("--width", scene_options.width, "Image width")->check(CLI::Range(8, 4096));
  scenegen_cmd->add_option("--fx", scene_options.fx, "Focal length (px)")->check(CLI::PositiveNumber);
  scenegen_cmd->add_option("--points", scene_options.points, "Sparse points per sample");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kSuccess;
    }
    err << format_error("Usage", e.what()) << "\n";
    return kUsage;
  }

  try {
    if (augment->parsed()) return cmd_augment(common, augment_samples, augment_depths, out);
    if (undo_cmd->parsed()) return cmd_undo(common, undo_depth_path, undo_record_path, out);
    if (loss_cmd->parsed()) {
      return cmd_loss(common, loss_sample, loss_depth, loss_mask, loss_predictor, weights, out);
    }
    if (harness_cmd->parsed()) return cmd_harness(common, harness_size, harness_trials, harness_excluded, out, err);
    if (metrics_cmd->parsed()) return cmd_metrics(common, metrics_pred, metrics_gt, range, out);
    if (scenegen_cmd->parsed()) return cmd_scenegen(common, scene_options, out);
  } catch (const Error& e) {
    err << format_error(to_string(e.code()), e.what()) << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << format_error("IoError", e.what()) << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace augundo::cli
