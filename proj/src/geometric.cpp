#include "augundo/geometric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace augundo::geometric {

namespace {

void require_canvas(Dims dims) {
  if (dims.height < 2 || dims.width < 2) {
    throw Error(ErrorCode::DegenerateDims, "canvas must be at least 2x2, got " + to_string(dims));
  }
}

// Exact values at multiples of 90 degrees keep quarter turns integer maps.
void exact_sincos(double degrees, double& s, double& c) {
  const double quarter = degrees / 90.0;
  if (quarter == std::round(quarter)) {
    const auto q = static_cast<long long>(std::round(quarter));
    switch (((q % 4) + 4) % 4) {
      case 0: s = 0.0; c = 1.0; return;
      case 1: s = 1.0; c = 0.0; return;
      case 2: s = 0.0; c = -1.0; return;
      default: s = -1.0; c = 0.0; return;
    }
  }
  const double rad = degrees * M_PI / 180.0;
  s = std::sin(rad);
  c = std::cos(rad);
}

Eigen::Vector2d center_of(Dims dims) { return {(dims.width - 1) / 2.0, (dims.height - 1) / 2.0}; }

}  // namespace

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::FlipH: return "flip_h";
    case TransformKind::FlipV: return "flip_v";
    case TransformKind::Resize: return "resize";
    case TransformKind::Rotate: return "rotate";
    case TransformKind::Translate: return "translate";
  }
  return "unknown";
}

TransformKind transform_kind_from_string(std::string_view name) {
  for (auto kind : {TransformKind::FlipH, TransformKind::FlipV, TransformKind::Resize, TransformKind::Rotate,
                    TransformKind::Translate}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::BadKind, "unknown geometric transform kind '" + std::string(name) + "'");
}

GeometricTransform GeometricTransform::flip_horizontal(Dims dims) {
  require_canvas(dims);
  return {TransformKind::FlipH, dims, dims};
}

GeometricTransform GeometricTransform::flip_vertical(Dims dims) {
  require_canvas(dims);
  return {TransformKind::FlipV, dims, dims};
}

GeometricTransform GeometricTransform::resize(Dims dims, double scale_h, double scale_w) {
  require_canvas(dims);
  if (scale_h == 0.0 || scale_w == 0.0) {
    throw Error(ErrorCode::NonInvertibleParam, "resize factor of 0 has no inverse");
  }
  if (!(scale_h > 0.0) || !(scale_w > 0.0) || !std::isfinite(scale_h) || !std::isfinite(scale_w)) {
    throw Error(ErrorCode::BadParam, "resize factors must be positive and finite");
  }
  GeometricTransform t(TransformKind::Resize, dims, dims);
  t.scale_h_ = scale_h;
  t.scale_w_ = scale_w;
  return t;
}

Dims GeometricTransform::tight_rotation_canvas(Dims dims, double degrees) {
  double s, c;
  exact_sincos(degrees, s, c);
  // Pixel footprints span [-0.5, W - 0.5]; the rotated footprint has extent
  // W|c| + H|s| horizontally. The epsilon keeps exact fits from rounding up.
  const double w = dims.width * std::abs(c) + dims.height * std::abs(s);
  const double h = dims.width * std::abs(s) + dims.height * std::abs(c);
  return {static_cast<int>(std::ceil(h - 1e-9)), static_cast<int>(std::ceil(w - 1e-9))};
}

GeometricTransform GeometricTransform::rotate(Dims dims, double degrees, int pad) {
  require_canvas(dims);
  if (!std::isfinite(degrees)) throw Error(ErrorCode::BadParam, "rotation angle must be finite");
  if (pad < 0) throw Error(ErrorCode::BadParam, "rotation pad must be non-negative");
  const Dims tight = tight_rotation_canvas(dims, degrees);
  GeometricTransform t(TransformKind::Rotate, dims, {tight.height + 2 * pad, tight.width + 2 * pad});
  t.degrees_ = degrees;
  t.pad_ = pad;
  return t;
}

GeometricTransform GeometricTransform::translate(Dims dims, int shift_u, int shift_v) {
  require_canvas(dims);
  GeometricTransform t(TransformKind::Translate, dims, dims);
  t.shift_u_ = shift_u;
  t.shift_v_ = shift_v;
  return t;
}

Eigen::Matrix3d GeometricTransform::matrix() const {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  switch (kind_) {
    case TransformKind::FlipH:
      m(0, 0) = -1.0;
      m(0, 2) = in_.width - 1;
      break;
    case TransformKind::FlipV:
      m(1, 1) = -1.0;
      m(1, 2) = in_.height - 1;
      break;
    case TransformKind::Resize: {
      const Eigen::Vector2d c = center_of(in_);
      m(0, 0) = scale_w_;
      m(1, 1) = scale_h_;
      m(0, 2) = c.x() - scale_w_ * c.x();
      m(1, 2) = c.y() - scale_h_ * c.y();
      break;
    }
    case TransformKind::Rotate: {
      double s, c;
      exact_sincos(degrees_, s, c);
      const Eigen::Vector2d ci = center_of(in_);
      const Eigen::Vector2d co = center_of(out_);
      m(0, 0) = c;
      m(0, 1) = -s;
      m(1, 0) = s;
      m(1, 1) = c;
      m(0, 2) = co.x() - (c * ci.x() - s * ci.y());
      m(1, 2) = co.y() - (s * ci.x() + c * ci.y());
      break;
    }
    case TransformKind::Translate:
      m(0, 2) = shift_u_;
      m(1, 2) = shift_v_;
      break;
  }
  return m;
}

GeometricTransform GeometricTransform::inverse() const {
  switch (kind_) {
    case TransformKind::FlipH:
    case TransformKind::FlipV:
      return *this;
    case TransformKind::Resize:
      if (scale_h_ == 0.0 || scale_w_ == 0.0) {
        throw Error(ErrorCode::NonInvertibleParam, "resize factor of 0 has no inverse");
      }
      return resize(in_, 1.0 / scale_h_, 1.0 / scale_w_);
    case TransformKind::Rotate: {
      // Rotating back about the enlarged canvas center onto the original
      // canvas is the center crop: exactly the recorded padding is removed.
      GeometricTransform t(TransformKind::Rotate, out_, in_);
      t.degrees_ = -degrees_;
      return t;
    }
    case TransformKind::Translate:
      return translate(in_, -shift_u_, -shift_v_);
  }
  return *this;
}

HomogeneousMap as_matrix(const GeometricTransform& t) { return {t.matrix(), t.out_dims()}; }

void TransformRecord::append(const GeometricTransform& t) {
  if (t.in_dims() != final_dims()) {
    throw Error(ErrorCode::DimsMismatch, "transform expects canvas " + to_string(t.in_dims()) +
                                             " but record ends at " + to_string(final_dims()));
  }
  transforms_.push_back(t);
}

TransformRecord TransformRecord::prefix(std::size_t count) const {
  TransformRecord out(original_);
  for (std::size_t i = 0; i < std::min(count, transforms_.size()); ++i) out.append(transforms_[i]);
  return out;
}

bool TransformRecord::integer_only() const {
  return std::all_of(transforms_.begin(), transforms_.end(),
                     [](const GeometricTransform& t) { return t.is_integer_map(); });
}

CoordinateMap identity_map(Dims dims) {
  return {dims, dims, Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Identity(), {dims}};
}

CoordinateMap compose(const TransformRecord& record) {
  if (record.empty()) throw Error(ErrorCode::EmptyRecord, "cannot compose an empty transform record");
  CoordinateMap map = identity_map(record.original_dims());
  for (const auto& t : record.transforms()) {
    map.forward = t.matrix() * map.forward;
    map.backward = map.backward * t.inverse().matrix();
    map.canvas_trace.push_back(t.out_dims());
  }
  map.target_dims = record.final_dims();
  return map;
}

CoordinateMap invert(const TransformRecord& record) {
  CoordinateMap fwd = compose(record);
  std::reverse(fwd.canvas_trace.begin(), fwd.canvas_trace.end());
  return {fwd.target_dims, fwd.source_dims, fwd.backward, fwd.forward, std::move(fwd.canvas_trace)};
}

Image warp_image(const Image& img, const CoordinateMap& map, WarpProbe* probe) {
  if (img.dims() != map.source_dims) {
    throw Error(ErrorCode::DimsMismatch, "image " + to_string(img.dims()) + " does not match map source " +
                                             to_string(map.source_dims));
  }
  const Dims out_dims = map.target_dims;
  const int w = img.width();
  const int h = img.height();
  const double max_u = w - 1;
  const double max_v = h - 1;
  std::vector<double> out(out_dims.area() * 3);
  if (probe != nullptr) probe->replicated = Grid<std::uint8_t>(out_dims, 0);

  for (int row = 0; row < out_dims.height; ++row) {
    for (int col = 0; col < out_dims.width; ++col) {
      const Eigen::Vector2d src = apply(map.backward, col, row);
      double u = src.x();
      double v = src.y();
      const bool inside = u >= 0.0 && u <= max_u && v >= 0.0 && v <= max_v;
      if (!inside) {
        if (probe != nullptr) probe->replicated.at(row, col) = 1;
        u = std::isnan(u) ? 0.0 : std::clamp(u, 0.0, max_u);
        v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, max_v);
      }
      const int u0 = static_cast<int>(std::floor(u));
      const int v0 = static_cast<int>(std::floor(v));
      const int u1 = std::min(u0 + 1, w - 1);
      const int v1 = std::min(v0 + 1, h - 1);
      const double fu = u - u0;
      const double fv = v - v0;
      const std::size_t dst = (static_cast<std::size_t>(row) * out_dims.width + col) * 3;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = (1.0 - fu) * img.at(v0, u0, ch) + fu * img.at(v0, u1, ch);
        const double bottom = (1.0 - fu) * img.at(v1, u0, ch) + fu * img.at(v1, u1, ch);
        out[dst + ch] = std::clamp((1.0 - fv) * top + fv * bottom, 0.0, 1.0);
      }
    }
  }
  return Image::create(out_dims, std::move(out));
}

SparseDepthMap warp_sparse_depth(const SparseDepthMap& z, const CoordinateMap& map) {
  if (z.dims() != map.source_dims) {
    throw Error(ErrorCode::DimsMismatch, "sparse depth does not match map source dims");
  }
  Grid<double> out(map.target_dims, 0.0);
  for (int row = 0; row < z.height(); ++row) {
    for (int col = 0; col < z.width(); ++col) {
      const double d = z.at(row, col);
      if (!(d > 0.0)) continue;
      const Eigen::Vector2d dst = apply(map.forward, col, row);
      const int c = round_coord(dst.x());
      const int r = round_coord(dst.y());
      if (!map.target_dims.contains(r, c)) continue;
      double& slot = out.at(r, c);
      if (slot == 0.0 || d < slot) slot = d;
    }
  }
  return SparseDepthMap::create(map.target_dims, std::move(out.storage()));
}

DenseDepthMap warp_dense_depth(const DenseDepthMap& d, const CoordinateMap& map) {
  if (d.dims() != map.source_dims) {
    throw Error(ErrorCode::DimsMismatch, "dense depth does not match map source dims");
  }
  const Dims out_dims = map.target_dims;
  std::vector<double> out(out_dims.area());
  for (int row = 0; row < out_dims.height; ++row) {
    for (int col = 0; col < out_dims.width; ++col) {
      const Eigen::Vector2d src = apply(map.backward, col, row);
      const int c = std::clamp(round_coord(src.x()), 0, d.width() - 1);
      const int r = std::clamp(round_coord(src.y()), 0, d.height() - 1);
      out[static_cast<std::size_t>(row) * out_dims.width + col] = d.at(r, c);
    }
  }
  return DenseDepthMap::create(out_dims, std::move(out), d.range());
}

namespace {

void validate_family(const FamilyConfig& f, const char* name, double lo, double hi) {
  if (!(f.probability >= 0.0 && f.probability <= 1.0)) {
    throw Error(ErrorCode::BadRange, std::string(name) + " probability must lie in [0, 1]");
  }
  if (!f.enabled) return;
  if (!(f.min <= f.max) || !(f.min >= lo) || !(f.max <= hi)) {
    throw Error(ErrorCode::BadRange, std::string(name) + " range [" + std::to_string(f.min) + ", " +
                                         std::to_string(f.max) + "] is inverted or outside [" +
                                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace

void GeometricConfig::validate() const {
  if (flip.enabled && !flip_horizontal && !flip_vertical) {
    throw Error(ErrorCode::BadRange, "flip enabled with no flip direction");
  }
  if (!(flip.probability >= 0.0 && flip.probability <= 1.0)) {
    throw Error(ErrorCode::BadRange, "flip probability must lie in [0, 1]");
  }
  validate_family(resize, "resize", std::numeric_limits<double>::min(), 10.0);
  validate_family(rotate, "rotate", -180.0, 180.0);
  validate_family(translate, "translate", -0.99, 0.99);
  if (!(block_probability >= 0.0 && block_probability <= 1.0)) {
    throw Error(ErrorCode::BadRange, "block probability must lie in [0, 1]");
  }
}

TransformRecord sample_geometric(const GeometricConfig& config, Dims dims, Rng& rng) {
  config.validate();
  TransformRecord record(dims);
  const bool block_on = config.mode == InclusionMode::Block && rng.bernoulli(config.block_probability);
  auto include = [&](const FamilyConfig& f) {
    if (!f.enabled) return false;
    if (config.mode == InclusionMode::Block) return block_on;
    return rng.bernoulli(f.probability);
  };

  if (include(config.flip)) {
    bool horizontal = config.flip_horizontal;
    if (config.flip_horizontal && config.flip_vertical) horizontal = rng.bernoulli(0.5);
    record.append(horizontal ? GeometricTransform::flip_horizontal(record.final_dims())
                             : GeometricTransform::flip_vertical(record.final_dims()));
  }
  if (include(config.resize)) {
    const double s_h = rng.uniform(config.resize.min, config.resize.max);
    const double s_w = config.resize_anisotropic ? rng.uniform(config.resize.min, config.resize.max) : s_h;
    record.append(GeometricTransform::resize(record.final_dims(), s_h, s_w));
  }
  if (include(config.rotate)) {
    record.append(GeometricTransform::rotate(record.final_dims(), rng.uniform(config.rotate.min, config.rotate.max)));
  }
  if (include(config.translate)) {
    const Dims d = record.final_dims();
    const double fu = rng.uniform(config.translate.min, config.translate.max);
    const double fv = rng.uniform(config.translate.min, config.translate.max);
    record.append(GeometricTransform::translate(d, static_cast<int>(std::lround(fu * d.width)),
                                                static_cast<int>(std::lround(fv * d.height))));
  }
  return record;
}

}  // namespace augundo::geometric
