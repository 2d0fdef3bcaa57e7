#pragma once

#include "augundo/core.hpp"
#include "augundo/geometric.hpp"
#include "augundo/loss.hpp"
#include "augundo/photometric.hpp"
#include "augundo/random.hpp"
#include "augundo/scenegen.hpp"
#include "augundo/undo.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace augundo::pipeline {

/// Reference frame with its two temporal neighbours. Each pose carries
/// reference-camera points into the matching neighbour.
struct FrameTriplet {
  Image prev;
  Image current;
  Image next;
  SparseDepthMap sparse;
  CameraIntrinsics intrinsics;
  RigidPose pose_prev;
  RigidPose pose_next;

  /// Throws DimsMismatch unless every grid shares the reference dims.
  void validate() const;
};

/// Reference view of `scene` with neighbours rendered at the two poses.
FrameTriplet make_synthetic_triplet(const scenegen::SyntheticScene& scene, const RigidPose& pose_prev,
                                    const RigidPose& pose_next, SparseDepthMap sparse);

using geometric::FamilyConfig;
using geometric::InclusionMode;

/// Factor ranges for brightness/contrast/saturation, turns for hue, pixel
/// fractions for patch occlusion and rates for point removal.
struct PhotometricConfig {
  FamilyConfig brightness;
  FamilyConfig contrast;
  FamilyConfig saturation;
  FamilyConfig hue;
  FamilyConfig patch_occlusion;
  int patch_size = 5;
  FamilyConfig point_removal;

  void validate() const;
  bool operator==(const PhotometricConfig&) const = default;
};

struct AugmentationConfig {
  PhotometricConfig photometric;
  geometric::GeometricConfig geometric;
  /// Per-family: each enabled family draws its own inclusion. Block: one draw
  /// per block (photometric, geometric) with `application_probability`.
  InclusionMode mode = InclusionMode::PerFamily;
  double application_probability = 0.5;
  std::uint64_t seed = 0;

  /// Depth-completion settings used on the indoor benchmark.
  static AugmentationConfig void_preset();
  /// Outdoor settings: horizontal flips only, no resize, +-20 degrees.
  static AugmentationConfig kitti_preset();
  /// Every family disabled.
  static AugmentationConfig none();
  /// Only flips (both directions) with probability 1.
  static AugmentationConfig flips_only();

  /// Throws BadRange.
  void validate() const;
  bool operator==(const AugmentationConfig&) const = default;
};

/// Family switches mirroring the ablation grid.
enum class AblationFamily { TRN, ROT, HUE, COJ, RMP, FLP, RZD, RMI };

std::string_view to_string(AblationFamily family);
AblationFamily ablation_family_from_string(std::string_view name);
void exclude_family(AugmentationConfig& config, AblationFamily family);

/// Everything sampled for one step: replaying it reproduces the step exactly.
struct AugmentationSample {
  std::vector<photometric::PhotometricTransform> photometric;
  geometric::TransformRecord geometric;

  bool operator==(const AugmentationSample&) const = default;
};

/// Photometric families in the order brightness, contrast, saturation, hue,
/// patch occlusion, point removal; then the geometric record.
AugmentationSample sample_augmentation(const AugmentationConfig& config, Dims dims, Rng& rng);

/// Applies photometric then geometric augmentation to the reference image
/// and sparse depth.
Image augment_image(const Image& image, const AugmentationSample& sample);
SparseDepthMap augment_sparse(const SparseDepthMap& sparse, const AugmentationSample& sample);

/// Stand-in for a depth-completion network.
class DepthPredictor {
 public:
  virtual ~DepthPredictor() = default;

  /// `applied` is the geometric record that produced the inputs. Learned
  /// predictors ignore it; it lets oracle predictors stay equivariant.
  /// Output dims equal the input image dims.
  [[nodiscard]] virtual DenseDepthMap predict(const Image& image, const SparseDepthMap& sparse,
                                              const geometric::TransformRecord& applied) const = 0;
};

/// Returns the ground truth carried into the augmented frame by the
/// nearest-neighbour forward warp (center-padded when the input is a padded
/// batch member).
class OraclePredictor final : public DepthPredictor {
 public:
  explicit OraclePredictor(DenseDepthMap ground_truth) : gt_(std::move(ground_truth)) {}

  [[nodiscard]] DenseDepthMap predict(const Image& image, const SparseDepthMap& sparse,
                                      const geometric::TransformRecord& applied) const override;

 private:
  DenseDepthMap gt_;
};

/// Each pixel takes the depth of its Euclidean-nearest sparse point (exact
/// distance transform); an empty map yields `fallback_depth` everywhere.
class NearestFillPredictor final : public DepthPredictor {
 public:
  explicit NearestFillPredictor(DepthRange range = DepthRange::indoor(), double fallback_depth = 1.0)
      : range_(range), fallback_(fallback_depth) {}

  [[nodiscard]] DenseDepthMap predict(const Image& image, const SparseDepthMap& sparse,
                                      const geometric::TransformRecord& applied) const override;

 private:
  DepthRange range_;
  double fallback_;
};

/// Steps of one AugUndo iteration, in execution order.
enum class AlgorithmStep {
  SamplePhotometric = 1,
  SampleGeometric,
  ComposeInverse,
  Augment,
  Predict,
  UndoGeometric,
  Reconstruct,
  ComputeLoss,
};

std::string_view to_string(AlgorithmStep step);

struct StepArtifacts {
  AugmentationSample sample;
  Image augmented_image;
  SparseDepthMap augmented_sparse;
  DenseDepthMap predicted_augmented;
  DenseDepthMap depth;
  ValidityMask mask;
  loss::LossMaps maps;
  std::vector<AlgorithmStep> events;
};

struct StepResult {
  loss::LossBreakdown loss;
  StepArtifacts artifacts;
};

/// One full iteration: sample, augment only the reference inputs, predict,
/// undo, reconstruct from the original neighbours with the original poses
/// and evaluate the masked loss against the original image and sparse depth.
StepResult run_augundo_step(const FrameTriplet& triplet, const AugmentationConfig& config,
                            const DepthPredictor& predictor, const loss::LossWeights& weights, Rng& rng,
                            const loss::LossOptions& options = {});

/// Same as run_augundo_step with sampling bypassed.
StepResult replay_augundo_step(const FrameTriplet& triplet, const AugmentationSample& sample,
                               const DepthPredictor& predictor, const loss::LossWeights& weights,
                               const loss::LossOptions& options = {});

struct BatchItem {
  const FrameTriplet* triplet = nullptr;
  const DepthPredictor* predictor = nullptr;
};

/// Runs a batch: sample i uses seed mix_seed(base_seed, i), augmented inputs
/// are center-padded to the largest canvas before prediction and the pad is
/// removed before undo. Results do not depend on `workers`.
std::vector<StepResult> run_augundo_batch(const std::vector<BatchItem>& items, const AugmentationConfig& config,
                                          const loss::LossWeights& weights, std::uint64_t base_seed,
                                          unsigned workers = 1, const loss::LossOptions& options = {});

/// Runs fn(i) for i in [0, count) on up to `workers` threads; rethrows the
/// first failure after all workers join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

struct EvalRange {
  double min = 0.2;
  double max = 5.0;
};

/// MAE/RMSE in millimeters, inverse errors in 1/m, the rest unitless.
struct MetricRecord {
  double mae_mm = 0.0;
  double rmse_mm = 0.0;
  double imae = 0.0;
  double irmse = 0.0;
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::size_t count = 0;
};

/// Evaluates pixels whose ground truth is > 0 and inside `range`. Throws
/// EmptyEvalSet when none qualify, DimsMismatch on differing dims.
MetricRecord evaluate_metrics(const Grid<double>& prediction, const Grid<double>& ground_truth, EvalRange range);
MetricRecord evaluate_metrics(const DenseDepthMap& prediction, const DenseDepthMap& ground_truth, EvalRange range);

}  // namespace augundo::pipeline
