#include "augundo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace augundo::pipeline {

namespace {

using geometric::TransformRecord;
using photometric::PhotometricTransform;

void require_same(Dims expected, Dims actual, const char* what) {
  if (expected != actual) {
    throw Error(ErrorCode::DimsMismatch,
                std::string(what) + " has dims " + to_string(actual) + ", expected " + to_string(expected));
  }
}

void check_family(const FamilyConfig& f, const char* name, double lo, double hi, bool open_lo) {
  if (!(f.probability >= 0.0 && f.probability <= 1.0)) {
    throw Error(ErrorCode::BadRange, std::string(name) + ": probability outside [0, 1]");
  }
  if (!f.enabled) return;
  const bool lo_ok = open_lo ? f.min > lo : f.min >= lo;
  if (!(f.min <= f.max) || !lo_ok || !(f.max <= hi)) {
    throw Error(ErrorCode::BadRange, std::string(name) + ": range [" + std::to_string(f.min) + ", " +
                                         std::to_string(f.max) + "] is empty or outside its domain");
  }
}

FamilyConfig family(double lo, double hi, double p = 0.5) { return {true, p, lo, hi}; }

PhotometricConfig indoor_photometric() {
  PhotometricConfig p;
  p.brightness = family(0.5, 1.5);
  p.contrast = family(0.5, 1.5);
  p.saturation = family(0.5, 1.5);
  p.hue = family(-0.1, 0.1);
  p.patch_occlusion = family(0.001, 0.005);
  p.patch_size = 5;
  p.point_removal = family(0.6, 0.7);
  return p;
}

std::vector<PhotometricTransform> sample_photometric(const AugmentationConfig& config, Rng& rng) {
  const PhotometricConfig& p = config.photometric;
  const bool block = config.mode == InclusionMode::Block;
  const bool block_on = block && rng.bernoulli(config.application_probability);
  auto include = [&](const FamilyConfig& f) {
    if (!f.enabled) return false;
    return block ? block_on : rng.bernoulli(f.probability);
  };

  std::vector<PhotometricTransform> out;
  if (include(p.brightness)) out.push_back(PhotometricTransform::brightness(rng.uniform(p.brightness.min, p.brightness.max)));
  if (include(p.contrast)) out.push_back(PhotometricTransform::contrast(rng.uniform(p.contrast.min, p.contrast.max)));
  if (include(p.saturation)) out.push_back(PhotometricTransform::saturation(rng.uniform(p.saturation.min, p.saturation.max)));
  if (include(p.hue)) out.push_back(PhotometricTransform::hue(rng.uniform(p.hue.min, p.hue.max)));
  if (include(p.patch_occlusion)) {
    const double fraction = rng.uniform(p.patch_occlusion.min, p.patch_occlusion.max);
    out.push_back(PhotometricTransform::patch_occlusion(fraction, p.patch_size, rng.next_seed()));
  }
  if (include(p.point_removal)) {
    const double rate = rng.uniform(p.point_removal.min, p.point_removal.max);
    out.push_back(PhotometricTransform::sparse_point_removal(rate, rng.next_seed()));
  }
  return out;
}

geometric::GeometricConfig effective_geometric(const AugmentationConfig& config) {
  geometric::GeometricConfig g = config.geometric;
  g.mode = config.mode;
  g.block_probability = config.application_probability;
  return g;
}

SparseDepthMap zero_pad(const SparseDepthMap& z, const undo::PadRecord& pad) {
  const Dims inner = z.dims();
  const Dims outer{inner.height + pad.top + pad.bottom, inner.width + pad.left + pad.right};
  std::vector<double> out(outer.area(), 0.0);
  for (int row = 0; row < inner.height; ++row) {
    for (int col = 0; col < inner.width; ++col) {
      out[static_cast<std::size_t>(row + pad.top) * outer.width + col + pad.left] = z.at(row, col);
    }
  }
  return SparseDepthMap::create(outer, std::move(out));
}

// Steps 6-8 given the prediction on the augmented canvas.
StepResult finish_step(const FrameTriplet& triplet, StepArtifacts artifacts, const loss::LossWeights& weights,
                       const loss::LossOptions& options) {
  const TransformRecord& record = artifacts.sample.geometric;
  require_same(record.final_dims(), artifacts.predicted_augmented.dims(), "prediction");

  undo::UndoResult undone = undo::undo_depth(artifacts.predicted_augmented, record);
  artifacts.depth = std::move(undone.depth);
  artifacts.mask = std::move(undone.mask);
  artifacts.events.push_back(AlgorithmStep::UndoGeometric);

  // total_loss reconstructs each neighbour (step 7) before evaluating the
  // objective (step 8); the reconstructions come back through the maps.
  artifacts.events.push_back(AlgorithmStep::Reconstruct);
  const loss::LossBreakdown breakdown = loss::total_loss(triplet.current, {triplet.prev, triplet.next}, triplet.sparse, artifacts.depth,
                                 artifacts.mask, triplet.intrinsics, {triplet.pose_prev, triplet.pose_next}, weights,
                                 options, &artifacts.maps);
  artifacts.events.push_back(AlgorithmStep::ComputeLoss);
  return {breakdown, std::move(artifacts)};
}

// Steps 3-4: effective maps of the record, then the augmented inputs.
StepArtifacts begin_step(const FrameTriplet& triplet, AugmentationSample sample, std::vector<AlgorithmStep> events) {
  triplet.validate();
  if (sample.geometric.original_dims() != triplet.current.dims()) {
    if (!sample.geometric.empty()) {
      require_same(triplet.current.dims(), sample.geometric.original_dims(), "transform record");
    }
    sample.geometric = TransformRecord(triplet.current.dims());
  }
  StepArtifacts a{std::move(sample),
                  triplet.current,
                  triplet.sparse,
                  DenseDepthMap::filled(triplet.current.dims(), 1.0),
                  DenseDepthMap::filled(triplet.current.dims(), 1.0),
                  ValidityMask::ones(triplet.current.dims()),
                  {},
                  std::move(events)};
  if (!a.sample.geometric.empty()) {
    // Both maps are checked here so a malformed record fails before any work.
    (void)geometric::compose(a.sample.geometric);
    (void)geometric::invert(a.sample.geometric);
  }
  a.events.push_back(AlgorithmStep::ComposeInverse);
  a.augmented_image = augment_image(triplet.current, a.sample);
  a.augmented_sparse = augment_sparse(triplet.sparse, a.sample);
  a.events.push_back(AlgorithmStep::Augment);
  return a;
}

StepResult execute(const FrameTriplet& triplet, AugmentationSample sample, std::vector<AlgorithmStep> events,
                   const DepthPredictor& predictor, const loss::LossWeights& weights,
                   const loss::LossOptions& options) {
  StepArtifacts a = begin_step(triplet, std::move(sample), std::move(events));
  a.predicted_augmented = predictor.predict(a.augmented_image, a.augmented_sparse, a.sample.geometric);
  require_same(a.augmented_image.dims(), a.predicted_augmented.dims(), "prediction");
  a.events.push_back(AlgorithmStep::Predict);
  return finish_step(triplet, std::move(a), weights, options);
}

}  // namespace

FrameTriplet make_synthetic_triplet(const scenegen::SyntheticScene& scene, const RigidPose& pose_prev,
                                    const RigidPose& pose_next, SparseDepthMap sparse) {
  FrameTriplet t{scenegen::render_view(scene, pose_prev), scene.image, scenegen::render_view(scene, pose_next),
                 std::move(sparse), scene.intrinsics, pose_prev, pose_next};
  t.validate();
  return t;
}

void FrameTriplet::validate() const {
  const Dims d = current.dims();
  require_same(d, prev.dims(), "previous frame");
  require_same(d, next.dims(), "next frame");
  require_same(d, sparse.dims(), "sparse depth");
}

void PhotometricConfig::validate() const {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  check_family(brightness, "brightness", 0.0, kInf, true);
  check_family(contrast, "contrast", 0.0, kInf, true);
  check_family(saturation, "saturation", 0.0, kInf, true);
  check_family(hue, "hue", -0.5, 0.5, false);
  check_family(patch_occlusion, "patch_occlusion", 0.0, 1.0, true);
  check_family(point_removal, "point_removal", 0.0, 1.0, false);
  if (patch_size < 1 || patch_size % 2 == 0) {
    throw Error(ErrorCode::BadRange, "patch size must be a positive odd integer");
  }
}

AugmentationConfig AugmentationConfig::void_preset() {
  AugmentationConfig c;
  c.photometric = indoor_photometric();
  c.geometric.flip = family(0.0, 0.0);
  c.geometric.flip_horizontal = true;
  c.geometric.flip_vertical = true;
  c.geometric.resize = family(0.6, 1.0);
  c.geometric.rotate = family(-25.0, 25.0);
  c.geometric.translate = family(-0.1, 0.1);
  return c;
}

AugmentationConfig AugmentationConfig::kitti_preset() {
  AugmentationConfig c = void_preset();
  c.geometric.flip_vertical = false;
  c.geometric.resize.enabled = false;
  c.geometric.rotate = family(-20.0, 20.0);
  return c;
}

AugmentationConfig AugmentationConfig::none() { return AugmentationConfig{}; }

AugmentationConfig AugmentationConfig::flips_only() {
  AugmentationConfig c;
  c.geometric.flip = family(0.0, 0.0, 1.0);
  c.geometric.flip_horizontal = true;
  c.geometric.flip_vertical = true;
  return c;
}

void AugmentationConfig::validate() const {
  photometric.validate();
  geometric.validate();
  if (!(application_probability >= 0.0 && application_probability <= 1.0)) {
    throw Error(ErrorCode::BadRange, "application probability outside [0, 1]");
  }
}

std::string_view to_string(AblationFamily family) {
  switch (family) {
    case AblationFamily::TRN: return "TRN";
    case AblationFamily::ROT: return "ROT";
    case AblationFamily::HUE: return "HUE";
    case AblationFamily::COJ: return "COJ";
    case AblationFamily::RMP: return "RMP";
    case AblationFamily::FLP: return "FLP";
    case AblationFamily::RZD: return "RZD";
    case AblationFamily::RMI: return "RMI";
  }
  return "?";
}

AblationFamily ablation_family_from_string(std::string_view name) {
  for (auto f : {AblationFamily::TRN, AblationFamily::ROT, AblationFamily::HUE, AblationFamily::COJ,
                 AblationFamily::RMP, AblationFamily::FLP, AblationFamily::RZD, AblationFamily::RMI}) {
    if (to_string(f) == name) return f;
  }
  throw Error(ErrorCode::BadKind, "unknown ablation family '" + std::string(name) + "'");
}

void exclude_family(AugmentationConfig& config, AblationFamily family) {
  switch (family) {
    case AblationFamily::TRN: config.geometric.translate.enabled = false; break;
    case AblationFamily::ROT: config.geometric.rotate.enabled = false; break;
    case AblationFamily::HUE: config.photometric.hue.enabled = false; break;
    case AblationFamily::COJ:
      config.photometric.brightness.enabled = false;
      config.photometric.contrast.enabled = false;
      config.photometric.saturation.enabled = false;
      break;
    case AblationFamily::RMP: config.photometric.point_removal.enabled = false; break;
    case AblationFamily::FLP: config.geometric.flip.enabled = false; break;
    case AblationFamily::RZD: config.geometric.resize.enabled = false; break;
    case AblationFamily::RMI: config.photometric.patch_occlusion.enabled = false; break;
  }
}

AugmentationSample sample_augmentation(const AugmentationConfig& config, Dims dims, Rng& rng) {
  config.validate();
  AugmentationSample s;
  s.photometric = sample_photometric(config, rng);
  s.geometric = geometric::sample_geometric(effective_geometric(config), dims, rng);
  return s;
}

Image augment_image(const Image& image, const AugmentationSample& sample) {
  Image out = image;
  for (const auto& t : sample.photometric) {
    if (t.acts_on_image()) out = t.apply(out);
  }
  if (sample.geometric.empty()) return out;
  require_same(sample.geometric.original_dims(), image.dims(), "image");
  return geometric::warp_image(out, geometric::compose(sample.geometric));
}

SparseDepthMap augment_sparse(const SparseDepthMap& sparse, const AugmentationSample& sample) {
  SparseDepthMap out = sparse;
  for (const auto& t : sample.photometric) out = t.apply(out);
  if (sample.geometric.empty()) return out;
  require_same(sample.geometric.original_dims(), sparse.dims(), "sparse depth");
  return geometric::warp_sparse_depth(out, geometric::compose(sample.geometric));
}

DenseDepthMap OraclePredictor::predict(const Image& image, const SparseDepthMap& /*sparse*/,
                                       const TransformRecord& applied) const {
  DenseDepthMap d = gt_;
  if (!applied.empty()) {
    require_same(gt_.dims(), applied.original_dims(), "ground truth");
    d = geometric::warp_dense_depth(gt_, geometric::compose(applied));
  }
  if (d.dims() == image.dims()) return d;
  return undo::batch_center_pad(std::vector<DenseDepthMap>{d}, image.dims()).items.front();
}

DenseDepthMap NearestFillPredictor::predict(const Image& image, const SparseDepthMap& sparse,
                                            const TransformRecord& /*applied*/) const {
  const Dims dims = image.dims();
  require_same(dims, sparse.dims(), "sparse depth");
  const int h = dims.height;
  const int w = dims.width;
  if (sparse.point_count() == 0) return DenseDepthMap::filled(dims, range_.clamp(fallback_), range_);

  // Column pass: nearest point row within each column.
  std::vector<int> nearest_row(dims.area(), -1);
  for (int col = 0; col < w; ++col) {
    int last = -1;
    for (int row = 0; row < h; ++row) {
      if (sparse.has_point(row, col)) last = row;
      nearest_row[static_cast<std::size_t>(row) * w + col] = last;
    }
    last = -1;
    for (int row = h - 1; row >= 0; --row) {
      if (sparse.has_point(row, col)) last = row;
      int& best = nearest_row[static_cast<std::size_t>(row) * w + col];
      if (last >= 0 && (best < 0 || last - row < row - best)) best = last;
    }
  }

  // Row pass: lower envelope of parabolas (c - q)^2 + f(q).
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> out(dims.area());
  std::vector<double> f(w);
  std::vector<int> v(w);
  std::vector<double> z(w + 1);
  for (int row = 0; row < h; ++row) {
    for (int q = 0; q < w; ++q) {
      const int nr = nearest_row[static_cast<std::size_t>(row) * w + q];
      f[q] = nr < 0 ? kInf : static_cast<double>(row - nr) * (row - nr);
    }
    int k = -1;
    for (int q = 0; q < w; ++q) {
      if (f[q] == kInf) continue;
      double s = 0.0;
      while (k >= 0) {
        s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
            (2.0 * (q - v[k]));
        if (s > z[k]) break;
        --k;
      }
      ++k;
      v[k] = q;
      z[k] = k == 0 ? -kInf : s;
      z[k + 1] = kInf;
    }
    int j = 0;
    for (int col = 0; col < w; ++col) {
      while (z[j + 1] < col) ++j;
      const int src_col = v[j];
      const int src_row = nearest_row[static_cast<std::size_t>(row) * w + src_col];
      out[static_cast<std::size_t>(row) * w + col] = range_.clamp(sparse.at(src_row, src_col));
    }
  }
  return DenseDepthMap::create(dims, std::move(out), range_);
}

std::string_view to_string(AlgorithmStep step) {
  switch (step) {
    case AlgorithmStep::SamplePhotometric: return "sample_photometric";
    case AlgorithmStep::SampleGeometric: return "sample_geometric";
    case AlgorithmStep::ComposeInverse: return "compose_inverse";
    case AlgorithmStep::Augment: return "augment";
    case AlgorithmStep::Predict: return "predict";
    case AlgorithmStep::UndoGeometric: return "undo_geometric";
    case AlgorithmStep::Reconstruct: return "reconstruct";
    case AlgorithmStep::ComputeLoss: return "compute_loss";
  }
  return "?";
}

StepResult run_augundo_step(const FrameTriplet& triplet, const AugmentationConfig& config,
                            const DepthPredictor& predictor, const loss::LossWeights& weights, Rng& rng,
                            const loss::LossOptions& options) {
  triplet.validate();
  config.validate();
  AugmentationSample sample;
  std::vector<AlgorithmStep> events;
  sample.photometric = sample_photometric(config, rng);
  events.push_back(AlgorithmStep::SamplePhotometric);
  sample.geometric = geometric::sample_geometric(effective_geometric(config), triplet.current.dims(), rng);
  events.push_back(AlgorithmStep::SampleGeometric);
  return execute(triplet, std::move(sample), std::move(events), predictor, weights, options);
}

StepResult replay_augundo_step(const FrameTriplet& triplet, const AugmentationSample& sample,
                               const DepthPredictor& predictor, const loss::LossWeights& weights,
                               const loss::LossOptions& options) {
  return execute(triplet, sample, {AlgorithmStep::SamplePhotometric, AlgorithmStep::SampleGeometric}, predictor,
                 weights, options);
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<StepResult> run_augundo_batch(const std::vector<BatchItem>& items, const AugmentationConfig& config,
                                          const loss::LossWeights& weights, std::uint64_t base_seed,
                                          unsigned workers, const loss::LossOptions& options) {
  config.validate();
  for (const auto& item : items) {
    if (item.triplet == nullptr || item.predictor == nullptr) {
      throw Error(ErrorCode::BadParam, "batch item without triplet or predictor");
    }
  }
  const std::size_t n = items.size();
  std::vector<std::optional<StepArtifacts>> staged(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const FrameTriplet& triplet = *items[i].triplet;
    triplet.validate();
    Rng rng(mix_seed(base_seed, i));
    AugmentationSample sample;
    std::vector<AlgorithmStep> events;
    sample.photometric = sample_photometric(config, rng);
    events.push_back(AlgorithmStep::SamplePhotometric);
    sample.geometric = geometric::sample_geometric(effective_geometric(config), triplet.current.dims(), rng);
    events.push_back(AlgorithmStep::SampleGeometric);
    staged[i] = begin_step(triplet, std::move(sample), std::move(events));
  });

  std::vector<Dims> dims;
  dims.reserve(n);
  for (const auto& a : staged) dims.push_back(a->augmented_image.dims());
  const Dims target = n == 0 ? Dims{} : undo::batch_target_dims(dims);

  std::vector<std::optional<StepResult>> results(n);
  parallel_for(n, workers, [&](std::size_t i) {
    StepArtifacts& a = *staged[i];
    const undo::PadRecord pad = undo::center_pad_amounts(a.augmented_image.dims(), target);
    const Image padded_image = undo::batch_center_pad(std::vector<Image>{a.augmented_image}, target).items.front();
    const SparseDepthMap padded_sparse = zero_pad(a.augmented_sparse, pad);
    const DenseDepthMap padded_pred = items[i].predictor->predict(padded_image, padded_sparse, a.sample.geometric);
    require_same(target, padded_pred.dims(), "prediction");
    a.predicted_augmented = undo::remove_center_pad(padded_pred, pad);
    a.events.push_back(AlgorithmStep::Predict);
    results[i] = finish_step(*items[i].triplet, std::move(a), weights, options);
  });
  std::vector<StepResult> out;
  out.reserve(n);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

MetricRecord evaluate_metrics(const Grid<double>& prediction, const Grid<double>& ground_truth, EvalRange range) {
  require_same(ground_truth.dims(), prediction.dims(), "prediction");
  MetricRecord m;
  double abs_sum = 0.0, sq_sum = 0.0, iabs_sum = 0.0, isq_sum = 0.0, rel_sum = 0.0, sqrel_sum = 0.0;
  std::size_t d1 = 0, d2 = 0, d3 = 0;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    const double gt = ground_truth[i];
    if (!(gt > 0.0) || gt < range.min || gt > range.max) continue;
    const double d = prediction[i];
    if (!(d > 0.0)) throw Error(ErrorCode::NegativeDepth, "prediction must be positive on evaluated pixels");
    const double err = d - gt;
    const double ierr = 1.0 / d - 1.0 / gt;
    abs_sum += std::abs(err);
    sq_sum += err * err;
    iabs_sum += std::abs(ierr);
    isq_sum += ierr * ierr;
    rel_sum += std::abs(err) / gt;
    sqrel_sum += err * err / gt;
    const double ratio = std::max(d / gt, gt / d);
    if (ratio < 1.25) ++d1;
    if (ratio < 1.25 * 1.25) ++d2;
    if (ratio < 1.25 * 1.25 * 1.25) ++d3;
    ++m.count;
  }
  if (m.count == 0) throw Error(ErrorCode::EmptyEvalSet, "no ground-truth pixel inside the evaluation range");
  const double n = static_cast<double>(m.count);
  m.mae_mm = 1000.0 * abs_sum / n;
  m.rmse_mm = 1000.0 * std::sqrt(sq_sum / n);
  m.imae = iabs_sum / n;
  m.irmse = std::sqrt(isq_sum / n);
  m.abs_rel = rel_sum / n;
  m.sq_rel = sqrel_sum / n;
  m.delta1 = static_cast<double>(d1) / n;
  m.delta2 = static_cast<double>(d2) / n;
  m.delta3 = static_cast<double>(d3) / n;
  return m;
}

MetricRecord evaluate_metrics(const DenseDepthMap& prediction, const DenseDepthMap& ground_truth, EvalRange range) {
  return evaluate_metrics(prediction.grid(), ground_truth.grid(), range);
}

}  // namespace augundo::pipeline
