#pragma once

#include "augundo/core.hpp"
#include "augundo/random.hpp"

#include <cstdint>
#include <string_view>

// Photometric and occlusion augmentations. None of them is inverted: the loss
// always consumes the original image and sparse depth, which is the undo.
namespace augundo::photometric {

/// ITU-R BT.601 luma.
inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

Image adjust_brightness(const Image& img, double factor);

/// Blends toward the scalar mean luma of the whole image.
Image adjust_contrast(const Image& img, double factor);

/// Blends each pixel toward its own luma.
Image adjust_saturation(const Image& img, double factor);

/// Rotates hue by `delta` turns of the hue circle; |delta| <= 0.5.
/// Zero-saturation pixels are left untouched.
Image adjust_hue(const Image& img, double delta);

/// Zeroes ceil(fraction * H * W) patch_size x patch_size squares (clipped at
/// the borders) around centers drawn uniformly with replacement.
Image occlude_patches(const Image& img, double pixel_fraction, int patch_size, Rng& rng);

/// Zeroes exactly floor(rate * |Omega_z|) points chosen without replacement.
SparseDepthMap remove_sparse_points(const SparseDepthMap& z, double rate, Rng& rng);

enum class PhotometricKind { Brightness, Contrast, Saturation, Hue, PatchOcclusion, SparsePointRemoval };

std::string_view to_string(PhotometricKind kind);
PhotometricKind photometric_kind_from_string(std::string_view name);

/// One sampled photometric/occlusion operation with everything needed to
/// replay it bit-for-bit.
struct PhotometricTransform {
  PhotometricKind kind = PhotometricKind::Brightness;
  /// factor, hue delta, pixel fraction or removal rate depending on kind
  double value = 1.0;
  int patch_size = 5;
  std::uint64_t rng_seed = 0;

  static PhotometricTransform brightness(double factor);
  static PhotometricTransform contrast(double factor);
  static PhotometricTransform saturation(double factor);
  static PhotometricTransform hue(double delta);
  static PhotometricTransform patch_occlusion(double pixel_fraction, int patch_size, std::uint64_t seed);
  static PhotometricTransform sparse_point_removal(double rate, std::uint64_t seed);

  [[nodiscard]] bool acts_on_image() const noexcept { return kind != PhotometricKind::SparsePointRemoval; }

  /// Identity for kinds that do not act on images.
  [[nodiscard]] Image apply(const Image& img) const;
  /// Identity for kinds that do not act on sparse depth.
  [[nodiscard]] SparseDepthMap apply(const SparseDepthMap& z) const;

  bool operator==(const PhotometricTransform&) const = default;
};

}  // namespace augundo::photometric
