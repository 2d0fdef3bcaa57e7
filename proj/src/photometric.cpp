#include "augundo/photometric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace augundo::photometric {

namespace {

void require_factor(double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::BadFactor, "factor must be a positive finite real, got " + std::to_string(factor));
  }
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

template <typename PixelFn>
Image map_pixels(const Image& img, PixelFn&& fn) {
  std::vector<double> out(img.pixels().begin(), img.pixels().end());
  for (std::size_t i = 0; i < out.size(); i += 3) fn(out[i], out[i + 1], out[i + 2]);
  return Image::create(img.dims(), std::move(out));
}

// Standard hexcone RGB <-> HSV with h in [0, 1).
void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double chroma = mx - mn;
  v = mx;
  s = mx > 0.0 ? chroma / mx : 0.0;
  if (chroma <= 0.0) {
    h = 0.0;
    return;
  }
  double sector;
  if (mx == r) {
    sector = std::fmod((g - b) / chroma, 6.0);
  } else if (mx == g) {
    sector = (b - r) / chroma + 2.0;
  } else {
    sector = (r - g) / chroma + 4.0;
  }
  h = sector / 6.0;
  if (h < 0.0) h += 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double hh = h * 6.0;
  const int sector = static_cast<int>(std::floor(hh)) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

}  // namespace

Image adjust_brightness(const Image& img, double factor) {
  require_factor(factor);
  return map_pixels(img, [factor](double& r, double& g, double& b) {
    r = clamp01(factor * r);
    g = clamp01(factor * g);
    b = clamp01(factor * b);
  });
}

Image adjust_contrast(const Image& img, double factor) {
  require_factor(factor);
  const auto px = img.pixels();
  double sum = 0.0;
  for (std::size_t i = 0; i < px.size(); i += 3) sum += luma(px[i], px[i + 1], px[i + 2]);
  const double mean = sum / static_cast<double>(img.dims().area());
  return map_pixels(img, [factor, mean](double& r, double& g, double& b) {
    r = clamp01(mean + factor * (r - mean));
    g = clamp01(mean + factor * (g - mean));
    b = clamp01(mean + factor * (b - mean));
  });
}

Image adjust_saturation(const Image& img, double factor) {
  require_factor(factor);
  return map_pixels(img, [factor](double& r, double& g, double& b) {
    const double y = luma(r, g, b);
    r = clamp01(y + factor * (r - y));
    g = clamp01(y + factor * (g - y));
    b = clamp01(y + factor * (b - y));
  });
}

Image adjust_hue(const Image& img, double delta) {
  if (!(std::abs(delta) <= 0.5)) {
    throw Error(ErrorCode::BadDelta, "hue delta must lie in [-0.5, 0.5], got " + std::to_string(delta));
  }
  if (delta == 0.0) return img;
  return map_pixels(img, [delta](double& r, double& g, double& b) {
    double h, s, v;
    rgb_to_hsv(r, g, b, h, s, v);
    if (s <= 0.0) return;
    h = std::fmod(h + delta + 1.0, 1.0);
    hsv_to_rgb(h, s, v, r, g, b);
    r = clamp01(r);
    g = clamp01(g);
    b = clamp01(b);
  });
}

Image occlude_patches(const Image& img, double pixel_fraction, int patch_size, Rng& rng) {
  if (!(pixel_fraction > 0.0 && pixel_fraction <= 1.0)) {
    throw Error(ErrorCode::BadFraction, "pixel fraction must lie in (0, 1]");
  }
  if (patch_size <= 0 || patch_size % 2 == 0) {
    throw Error(ErrorCode::BadPatchSize, "patch size must be an odd positive integer");
  }
  const Dims dims = img.dims();
  const auto centers = static_cast<std::size_t>(std::ceil(pixel_fraction * static_cast<double>(dims.area()) - 1e-9));
  const int half = patch_size / 2;
  std::vector<double> out(img.pixels().begin(), img.pixels().end());
  for (std::size_t n = 0; n < centers; ++n) {
    const auto idx = rng.index(dims.area());
    const int row = static_cast<int>(idx / dims.width);
    const int col = static_cast<int>(idx % dims.width);
    for (int r = std::max(0, row - half); r <= std::min(dims.height - 1, row + half); ++r) {
      for (int c = std::max(0, col - half); c <= std::min(dims.width - 1, col + half); ++c) {
        const std::size_t base = (static_cast<std::size_t>(r) * dims.width + c) * 3;
        out[base] = out[base + 1] = out[base + 2] = 0.0;
      }
    }
  }
  return Image::create(dims, std::move(out));
}

SparseDepthMap remove_sparse_points(const SparseDepthMap& z, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::BadRate, "removal rate must lie in [0, 1)");
  std::vector<std::size_t> points;
  const auto values = z.grid().values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0) points.push_back(i);
  }
  // 1e-9 absorbs representation error such as 0.6 * 10 = 5.999...
  const auto removed = static_cast<std::size_t>(std::floor(rate * static_cast<double>(points.size()) + 1e-9));
  std::vector<double> out(values.begin(), values.end());
  // Partial Fisher-Yates: the first `removed` slots become a uniform sample.
  for (std::size_t i = 0; i < removed; ++i) {
    const std::size_t j = i + rng.index(points.size() - i);
    std::swap(points[i], points[j]);
    out[points[i]] = 0.0;
  }
  return SparseDepthMap::create(z.dims(), std::move(out));
}

std::string_view to_string(PhotometricKind kind) {
  switch (kind) {
    case PhotometricKind::Brightness: return "brightness";
    case PhotometricKind::Contrast: return "contrast";
    case PhotometricKind::Saturation: return "saturation";
    case PhotometricKind::Hue: return "hue";
    case PhotometricKind::PatchOcclusion: return "patch_occlusion";
    case PhotometricKind::SparsePointRemoval: return "sparse_point_removal";
  }
  return "unknown";
}

PhotometricKind photometric_kind_from_string(std::string_view name) {
  for (auto kind : {PhotometricKind::Brightness, PhotometricKind::Contrast, PhotometricKind::Saturation,
                    PhotometricKind::Hue, PhotometricKind::PatchOcclusion, PhotometricKind::SparsePointRemoval}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::BadKind, "unknown photometric kind '" + std::string(name) + "'");
}

PhotometricTransform PhotometricTransform::brightness(double factor) {
  require_factor(factor);
  return {PhotometricKind::Brightness, factor, 0, 0};
}

PhotometricTransform PhotometricTransform::contrast(double factor) {
  require_factor(factor);
  return {PhotometricKind::Contrast, factor, 0, 0};
}

PhotometricTransform PhotometricTransform::saturation(double factor) {
  require_factor(factor);
  return {PhotometricKind::Saturation, factor, 0, 0};
}

PhotometricTransform PhotometricTransform::hue(double delta) {
  if (!(std::abs(delta) <= 0.5)) throw Error(ErrorCode::BadDelta, "hue delta must lie in [-0.5, 0.5]");
  return {PhotometricKind::Hue, delta, 0, 0};
}

PhotometricTransform PhotometricTransform::patch_occlusion(double pixel_fraction, int patch_size,
                                                           std::uint64_t seed) {
  if (!(pixel_fraction > 0.0 && pixel_fraction <= 1.0)) {
    throw Error(ErrorCode::BadFraction, "pixel fraction must lie in (0, 1]");
  }
  if (patch_size <= 0 || patch_size % 2 == 0) {
    throw Error(ErrorCode::BadPatchSize, "patch size must be an odd positive integer");
  }
  return {PhotometricKind::PatchOcclusion, pixel_fraction, patch_size, seed};
}

PhotometricTransform PhotometricTransform::sparse_point_removal(double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::BadRate, "removal rate must lie in [0, 1)");
  return {PhotometricKind::SparsePointRemoval, rate, 0, seed};
}

Image PhotometricTransform::apply(const Image& img) const {
  switch (kind) {
    case PhotometricKind::Brightness: return adjust_brightness(img, value);
    case PhotometricKind::Contrast: return adjust_contrast(img, value);
    case PhotometricKind::Saturation: return adjust_saturation(img, value);
    case PhotometricKind::Hue: return adjust_hue(img, value);
    case PhotometricKind::PatchOcclusion: {
      Rng rng(rng_seed);
      return occlude_patches(img, value, patch_size, rng);
    }
    case PhotometricKind::SparsePointRemoval: return img;
  }
  return img;
}

SparseDepthMap PhotometricTransform::apply(const SparseDepthMap& z) const {
  if (kind != PhotometricKind::SparsePointRemoval) return z;
  Rng rng(rng_seed);
  return remove_sparse_points(z, value, rng);
}

}  // namespace augundo::photometric
