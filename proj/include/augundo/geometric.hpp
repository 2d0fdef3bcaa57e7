#pragma once

#include "augundo/core.hpp"
#include "augundo/random.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string_view>
#include <vector>

// Geometric augmentations as homogeneous maps on pixel coordinates, their
// composition, and closed-form inverses.
namespace augundo::geometric {

enum class TransformKind { FlipH, FlipV, Resize, Rotate, Translate };

std::string_view to_string(TransformKind kind);
TransformKind transform_kind_from_string(std::string_view name);

/// A single geometric transform bound to the canvas it acts on.
///
/// Matrices map input pixel coordinates [u, v, 1] to output canvas
/// coordinates:
///  - FlipH / FlipV mirror about the canvas: u' = (W - 1) - u.
///  - Resize scales content about the canvas center on a canvas of unchanged
///    size; factors below 1 shrink.
///  - Rotate turns about the input center by `degrees` (image axes, v down)
///    and recenters on an output canvas that tightly holds the rotated
///    input rectangle plus `pad` pixels on every side.
///  - Translate shifts by whole pixels on a canvas of unchanged size.
class GeometricTransform {
 public:
  static GeometricTransform flip_horizontal(Dims dims);
  static GeometricTransform flip_vertical(Dims dims);
  /// Throws NonInvertibleParam for a zero factor, BadParam for negative ones.
  static GeometricTransform resize(Dims dims, double scale_h, double scale_w);
  static GeometricTransform rotate(Dims dims, double degrees, int pad = 0);
  static GeometricTransform translate(Dims dims, int shift_u, int shift_v);

  /// Smallest canvas holding `dims` rotated by `degrees`.
  static Dims tight_rotation_canvas(Dims dims, double degrees);

  [[nodiscard]] TransformKind kind() const noexcept { return kind_; }
  [[nodiscard]] Dims in_dims() const noexcept { return in_; }
  [[nodiscard]] Dims out_dims() const noexcept { return out_; }
  [[nodiscard]] double scale_h() const noexcept { return scale_h_; }
  [[nodiscard]] double scale_w() const noexcept { return scale_w_; }
  [[nodiscard]] double degrees() const noexcept { return degrees_; }
  [[nodiscard]] int pad() const noexcept { return pad_; }
  [[nodiscard]] int shift_u() const noexcept { return shift_u_; }
  [[nodiscard]] int shift_v() const noexcept { return shift_v_; }

  [[nodiscard]] Eigen::Matrix3d matrix() const;

  /// Closed-form inverse: flips are involutions, Resize(s) -> Resize(1/s),
  /// Rotate(t) -> Rotate(-t) onto the original canvas (the center crop),
  /// Translate(t) -> Translate(-t).
  [[nodiscard]] GeometricTransform inverse() const;

  /// True when the map sends integer coordinates to integer coordinates.
  [[nodiscard]] bool is_integer_map() const noexcept {
    return kind_ == TransformKind::FlipH || kind_ == TransformKind::FlipV || kind_ == TransformKind::Translate;
  }

  bool operator==(const GeometricTransform&) const = default;

 private:
  GeometricTransform(TransformKind kind, Dims in, Dims out) : kind_(kind), in_(in), out_(out) {}

  TransformKind kind_;
  Dims in_;
  Dims out_;
  double scale_h_ = 1.0;
  double scale_w_ = 1.0;
  double degrees_ = 0.0;
  int pad_ = 0;
  int shift_u_ = 0;
  int shift_v_ = 0;
};

struct HomogeneousMap {
  Eigen::Matrix3d matrix;
  Dims out_dims;
};

HomogeneousMap as_matrix(const GeometricTransform& t);

/// Ordered transforms in application order; each stage consumes the canvas
/// produced by the previous one.
class TransformRecord {
 public:
  TransformRecord() = default;
  explicit TransformRecord(Dims original_dims) : original_(original_dims) {}

  /// Throws DimsMismatch unless `t` acts on the current final canvas.
  void append(const GeometricTransform& t);

  [[nodiscard]] Dims original_dims() const noexcept { return original_; }
  [[nodiscard]] Dims final_dims() const noexcept {
    return transforms_.empty() ? original_ : transforms_.back().out_dims();
  }
  [[nodiscard]] const std::vector<GeometricTransform>& transforms() const noexcept { return transforms_; }
  [[nodiscard]] bool empty() const noexcept { return transforms_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return transforms_.size(); }
  [[nodiscard]] TransformRecord prefix(std::size_t count) const;
  [[nodiscard]] bool integer_only() const;

  bool operator==(const TransformRecord&) const = default;

 private:
  Dims original_{};
  std::vector<GeometricTransform> transforms_;
};

/// Affine map between two canvases with its exact paired inverse.
struct CoordinateMap {
  Dims source_dims;
  Dims target_dims;
  /// source pixel -> target pixel
  Eigen::Matrix3d forward;
  /// target pixel -> source pixel
  Eigen::Matrix3d backward;
  /// canvas dims per stage, source first
  std::vector<Dims> canvas_trace;
};

CoordinateMap identity_map(Dims dims);

/// Single effective map of the whole chain. Throws EmptyRecord.
CoordinateMap compose(const TransformRecord& record);

/// Map from the final canvas back to the original one, built from per-kind
/// inverses composed in reverse order. Throws EmptyRecord.
CoordinateMap invert(const TransformRecord& record);

/// Applies a homogeneous affine matrix to a pixel coordinate. All warps and
/// masks go through this one function so they agree bit-for-bit.
inline Eigen::Vector2d apply(const Eigen::Matrix3d& m, double u, double v) {
  return {m(0, 0) * u + m(0, 1) * v + m(0, 2), m(1, 0) * u + m(1, 1) * v + m(1, 2)};
}

/// Nearest integer with ties away from zero.
inline int round_coord(double x) { return static_cast<int>(std::lround(x)); }

/// Optional instrumentation for warp_image: 1 at output pixels whose source
/// coordinate fell outside the input frame and was edge-replicated.
struct WarpProbe {
  Grid<std::uint8_t> replicated;
};

/// Inverse-warped bilinear resampling onto map.target_dims; sources outside
/// the input frame are clamped to it (edge replication).
Image warp_image(const Image& img, const CoordinateMap& map, WarpProbe* probe = nullptr);

/// Forward splat of every point to round(map(x)); out-of-canvas points are
/// dropped and collisions keep the smaller depth. Never interpolates.
SparseDepthMap warp_sparse_depth(const SparseDepthMap& z, const CoordinateMap& map);

/// Nearest-neighbour inverse warp of a dense depth map with edge replication.
DenseDepthMap warp_dense_depth(const DenseDepthMap& d, const CoordinateMap& map);

/// One sampled family: included with `probability`, parameters uniform in
/// [min, max].
struct FamilyConfig {
  bool enabled = false;
  double probability = 0.5;
  double min = 0.0;
  double max = 0.0;

  bool operator==(const FamilyConfig&) const = default;
};

enum class InclusionMode { PerFamily, Block };

/// Translate ranges are fractions of the current canvas size; rotate ranges
/// are degrees; resize ranges are scale factors.
struct GeometricConfig {
  FamilyConfig flip;
  bool flip_horizontal = true;
  bool flip_vertical = true;
  FamilyConfig resize;
  bool resize_anisotropic = false;
  FamilyConfig rotate;
  FamilyConfig translate;
  InclusionMode mode = InclusionMode::PerFamily;
  double block_probability = 0.5;

  /// Throws BadRange on inverted or out-of-domain ranges.
  void validate() const;

  bool operator==(const GeometricConfig&) const = default;
};

/// Samples a record in the canonical order Flip -> Resize -> Rotate -> Translate.
TransformRecord sample_geometric(const GeometricConfig& config, Dims dims, Rng& rng);

}  // namespace augundo::geometric
