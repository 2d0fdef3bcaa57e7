#include "augundo/undo.hpp"

#include <algorithm>
#include <string>

namespace augundo::undo {

using geometric::apply;
using geometric::round_coord;
using geometric::TransformRecord;

UndoResult undo_depth(const DenseDepthMap& d_aug, const TransformRecord& record, UndoProbe* probe) {
  if (d_aug.dims() != record.final_dims()) {
    throw Error(ErrorCode::DimsMismatch, "predicted depth is " + to_string(d_aug.dims()) +
                                             " but the record ends on a " + to_string(record.final_dims()) +
                                             " canvas");
  }
  const Dims out_dims = record.original_dims();
  if (probe != nullptr) probe->source_index = Grid<std::int64_t>(out_dims, 0);
  if (record.empty()) {
    if (probe != nullptr) {
      for (std::size_t i = 0; i < out_dims.area(); ++i) probe->source_index[i] = static_cast<std::int64_t>(i);
    }
    return {d_aug, ValidityMask::ones(out_dims)};
  }

  const geometric::CoordinateMap inverse = geometric::invert(record);
  std::vector<double> out(out_dims.area());
  for (int row = 0; row < out_dims.height; ++row) {
    for (int col = 0; col < out_dims.width; ++col) {
      const Eigen::Vector2d src = apply(inverse.backward, col, row);
      const int c = std::clamp(round_coord(src.x()), 0, d_aug.width() - 1);
      const int r = std::clamp(round_coord(src.y()), 0, d_aug.height() - 1);
      const std::size_t i = static_cast<std::size_t>(row) * out_dims.width + col;
      out[i] = d_aug.at(r, c);
      if (probe != nullptr) probe->source_index[i] = static_cast<std::int64_t>(r) * d_aug.width() + c;
    }
  }
  return {DenseDepthMap::create(out_dims, std::move(out), d_aug.range()),
          build_validity_mask(record, out_dims)};
}

ValidityMask build_validity_mask(const TransformRecord& record, Dims original_dims) {
  if (original_dims != record.original_dims()) {
    throw Error(ErrorCode::DimsMismatch, "mask dims " + to_string(original_dims) + " disagree with record origin " +
                                             to_string(record.original_dims()));
  }
  Grid<std::uint8_t> mask(original_dims, 1);
  const double max_u = original_dims.width - 1;
  const double max_v = original_dims.height - 1;
  for (std::size_t stage = 1; stage <= record.size(); ++stage) {
    // The prefix map is built exactly as warp_image/undo_depth build theirs,
    // so the tests below reproduce the samplers' arithmetic.
    const geometric::CoordinateMap map = geometric::compose(record.prefix(stage));
    for (int row = 0; row < original_dims.height; ++row) {
      for (int col = 0; col < original_dims.width; ++col) {
        std::uint8_t& m = mask.at(row, col);
        if (m == 0) continue;
        const Eigen::Vector2d dst = apply(map.forward, col, row);
        const int c = round_coord(dst.x());
        const int r = round_coord(dst.y());
        if (!map.target_dims.contains(r, c)) {
          m = 0;
          continue;
        }
        const Eigen::Vector2d src = apply(map.backward, c, r);
        if (!(src.x() >= 0.0 && src.x() <= max_u && src.y() >= 0.0 && src.y() <= max_v)) m = 0;
      }
    }
  }
  return ValidityMask::create(original_dims, std::move(mask.storage()));
}

PadRecord center_pad_amounts(Dims item, Dims target) {
  if (target.height < item.height || target.width < item.width) {
    throw Error(ErrorCode::TargetTooSmall, "cannot pad " + to_string(item) + " into " + to_string(target));
  }
  const int dh = target.height - item.height;
  const int dw = target.width - item.width;
  return {dh / 2, dh - dh / 2, dw / 2, dw - dw / 2};
}

Dims batch_target_dims(const std::vector<Dims>& dims) {
  Dims out{0, 0};
  for (const auto& d : dims) {
    out.height = std::max(out.height, d.height);
    out.width = std::max(out.width, d.width);
  }
  return out;
}

namespace {

template <typename T>
std::vector<T> pad_buffer(const std::vector<T>& src, Dims dims, int channels, const PadRecord& pad, Dims target) {
  std::vector<T> out(target.area() * channels);
  for (int row = 0; row < target.height; ++row) {
    const int sr = std::clamp(row - pad.top, 0, dims.height - 1);
    for (int col = 0; col < target.width; ++col) {
      const int sc = std::clamp(col - pad.left, 0, dims.width - 1);
      const std::size_t s = (static_cast<std::size_t>(sr) * dims.width + sc) * channels;
      const std::size_t d = (static_cast<std::size_t>(row) * target.width + col) * channels;
      for (int ch = 0; ch < channels; ++ch) out[d + ch] = src[s + ch];
    }
  }
  return out;
}

template <typename T>
std::vector<T> crop_buffer(const std::vector<T>& src, Dims dims, int channels, const PadRecord& pad) {
  const Dims inner{dims.height - pad.top - pad.bottom, dims.width - pad.left - pad.right};
  if (inner.height < 2 || inner.width < 2 || pad.top < 0 || pad.bottom < 0 || pad.left < 0 || pad.right < 0) {
    throw Error(ErrorCode::DimsMismatch, "pad record does not fit inside " + to_string(dims));
  }
  std::vector<T> out(inner.area() * channels);
  for (int row = 0; row < inner.height; ++row) {
    for (int col = 0; col < inner.width; ++col) {
      const std::size_t s = (static_cast<std::size_t>(row + pad.top) * dims.width + col + pad.left) * channels;
      const std::size_t d = (static_cast<std::size_t>(row) * inner.width + col) * channels;
      for (int ch = 0; ch < channels; ++ch) out[d + ch] = src[s + ch];
    }
  }
  return out;
}

}  // namespace

PaddedBatch<Image> batch_center_pad(const std::vector<Image>& items, Dims target) {
  PaddedBatch<Image> out;
  for (const auto& item : items) {
    const PadRecord pad = center_pad_amounts(item.dims(), target);
    std::vector<double> src(item.pixels().begin(), item.pixels().end());
    out.items.push_back(Image::create(target, pad_buffer(src, item.dims(), 3, pad, target)));
    out.pads.push_back(pad);
  }
  return out;
}

PaddedBatch<DenseDepthMap> batch_center_pad(const std::vector<DenseDepthMap>& items, Dims target) {
  PaddedBatch<DenseDepthMap> out;
  for (const auto& item : items) {
    const PadRecord pad = center_pad_amounts(item.dims(), target);
    out.items.push_back(
        DenseDepthMap::create(target, pad_buffer(item.grid().storage(), item.dims(), 1, pad, target), item.range()));
    out.pads.push_back(pad);
  }
  return out;
}

Image remove_center_pad(const Image& item, const PadRecord& pad) {
  std::vector<double> src(item.pixels().begin(), item.pixels().end());
  const Dims inner{item.height() - pad.top - pad.bottom, item.width() - pad.left - pad.right};
  return Image::create(inner, crop_buffer(src, item.dims(), 3, pad));
}

DenseDepthMap remove_center_pad(const DenseDepthMap& item, const PadRecord& pad) {
  const Dims inner{item.height() - pad.top - pad.bottom, item.width() - pad.left - pad.right};
  return DenseDepthMap::create(inner, crop_buffer(item.grid().storage(), item.dims(), 1, pad), item.range());
}

}  // namespace augundo::undo
