#pragma once

#include "augundo/core.hpp"
#include "augundo/random.hpp"

#include <cstdint>
#include <variant>

// Synthetic scenes whose depth and camera motion are known exactly.
namespace augundo::scenegen {

struct FrontoPlane {
  double depth_m = 2.0;
};

/// Near half-plane over columns < split_column in front of a full far plane.
struct TwoPlaneStep {
  double near_m = 1.0;
  double far_m = 3.0;
  int split_column = 32;
};

using SceneKind = std::variant<FrontoPlane, TwoPlaneStep>;

/// Smooth RGB value noise defined on the whole reference image plane, so any
/// view can be rendered by evaluating it at reference-frame coordinates.
class ValueNoiseTexture {
 public:
  explicit ValueNoiseTexture(std::uint64_t seed) : seed_(seed) {}

  /// Intensity in [0.1, 0.9] at continuous reference pixel (u, v).
  [[nodiscard]] double sample(double u, double v, int channel) const;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

 private:
  [[nodiscard]] double lattice(long long i, long long j, int channel, int octave) const;

  std::uint64_t seed_;
};

struct SyntheticScene {
  Image image;
  DenseDepthMap depth;
  CameraIntrinsics intrinsics;
  SceneKind kind;
  ValueNoiseTexture texture;
};

/// Throws BadKind for non-positive depths or a split outside the image.
SyntheticScene make_scene(const SceneKind& kind, Dims dims, const CameraIntrinsics& intrinsics,
                          std::uint64_t texture_seed);

/// Fraction of reference pixels whose ground-truth reprojection under `pose`
/// stays inside the frame.
double covisible_fraction(const SyntheticScene& scene, const RigidPose& pose);

/// Image seen by a camera displaced by `pose` (points map from the reference
/// camera into it), rendered by ray casting against the scene planes. Throws
/// ExcessiveMotion when fewer than half of the reference pixels stay in view.
Image render_view(const SyntheticScene& scene, const RigidPose& pose);

/// `n_points` distinct uniformly drawn pixels carrying the true depth.
/// Throws TooManyPoints.
SparseDepthMap sample_sparse(const DenseDepthMap& depth, std::size_t n_points, Rng& rng);

/// Top-`n_points` Harris responses (3x3 structure tensor, k = 0.04) of
/// `image`, ties broken by pixel index.
SparseDepthMap sample_sparse_corners(const DenseDepthMap& depth, const Image& image, std::size_t n_points);

}  // namespace augundo::scenegen
