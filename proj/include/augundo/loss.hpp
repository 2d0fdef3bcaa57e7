#pragma once

#include "augundo/core.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

// Unsupervised depth-completion objective evaluated on the original frame.
namespace augundo::loss {

struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double lambda = 0.04;
  double ssim_weight = 0.85;

  /// Throws BadParam unless all weights are >= 0 and ssim_weight <= 1.
  void validate() const;

  bool operator==(const LossWeights&) const = default;
};

enum class SparseNorm { L1, L2 };

struct LossOptions {
  SparseNorm sparse_norm = SparseNorm::L1;
  /// When false, smoothness only uses neighbour pairs that are both mask-1.
  bool smoothness_includes_masked = true;

  bool operator==(const LossOptions&) const = default;
};

struct LossBreakdown {
  double photometric = 0.0;
  double sparse = 0.0;
  double smoothness = 0.0;
  double total = 0.0;
  std::size_t valid_pixel_count = 0;

  bool operator==(const LossBreakdown&) const = default;
};

/// Per-pixel sampling coordinates in the source view.
struct ReprojectedCoords {
  Grid<double> u;
  Grid<double> v;
  /// 1 where the transformed point has z <= kMinDepth
  Grid<std::uint8_t> behind_camera;

  [[nodiscard]] Dims dims() const noexcept { return u.dims(); }
};

inline constexpr double kMinDepth = 1e-6;

/// Back-projects every pixel with its depth and projects it into the view
/// reached by `pose`, using `intrinsics` both ways. An identity pose returns
/// the pixel grid exactly.
ReprojectedCoords reproject(const DenseDepthMap& depth, const CameraIntrinsics& intrinsics, const RigidPose& pose);

struct Reconstruction {
  Image image;
  /// 0 where the sample fell outside the source frame or behind the camera
  ValidityMask in_frame;
};

/// Bilinear sampling of `source` at `coords`. Out-of-frame samples are
/// edge-replicated in the image and flagged 0 in the mask.
Reconstruction reconstruct(const Image& source, const ReprojectedCoords& coords);

/// Local SSIM over 3x3 windows (edge-replicated borders), averaged over
/// channels, with C1 = 0.01^2 and C2 = 0.03^2.
Grid<double> ssim_map(const Image& a, const Image& b);

/// w * (1 - SSIM) / 2 + (1 - w) * mean-over-channels |a - b|.
Grid<double> photometric_error(const Image& reconstructed, const Image& target, double ssim_weight);

/// |d - z| (or squared) on Omega_z, 0 elsewhere.
Grid<double> sparse_depth_error(const DenseDepthMap& depth, const SparseDepthMap& sparse,
                                SparseNorm norm = SparseNorm::L1);

/// Edge-aware smoothness: per-axis mean of |forward depth difference| weighted
/// by exp(-|forward difference of channel-mean image|), summed over axes.
double smoothness(const DenseDepthMap& depth, const Image& image);

/// Intermediate maps of total_loss, one entry per neighbouring frame.
struct LossMaps {
  std::vector<Reconstruction> reconstructions;
  std::vector<Grid<double>> photometric;
  Grid<double> sparse;
};

/// Masked objective. Photometric error is averaged over mask-1, in-frame
/// pixels and summed over neighbours; sparse error is averaged over mask-1
/// pixels of Omega_z; smoothness is unmasked unless configured otherwise.
/// Reconstructed pixels outside that support are replaced by the target
/// before SSIM, so depth at mask-0 pixels cannot leak into the data terms
/// through the SSIM window. Means over empty supports are 0.
LossBreakdown total_loss(const Image& target, const std::vector<Image>& neighbours, const SparseDepthMap& sparse,
                         const DenseDepthMap& depth, const ValidityMask& mask, const CameraIntrinsics& intrinsics,
                         const std::vector<RigidPose>& poses, const LossWeights& weights,
                         const LossOptions& options = {}, LossMaps* maps = nullptr);

}  // namespace augundo::loss
