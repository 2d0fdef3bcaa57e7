#pragma once

#include "augundo/core.hpp"
#include "augundo/geometric.hpp"

#include <cstdint>
#include <vector>

// Returns predicted depth from the augmented frame to the original frame and
// tracks which original pixels are recoverable.
namespace augundo::undo {

struct UndoResult {
  DenseDepthMap depth;
  ValidityMask mask;
};

/// Optional instrumentation for undo_depth: for each original pixel, the
/// linear index of the augmented-frame pixel that was read.
struct UndoProbe {
  Grid<std::int64_t> source_index;
};

/// Nearest-neighbour inverse warp of `d_aug` through invert(record), with edge
/// replication, onto the original canvas. Throws DimsMismatch when `d_aug`
/// is not on the record's final canvas.
UndoResult undo_depth(const DenseDepthMap& d_aug, const geometric::TransformRecord& record,
                      UndoProbe* probe = nullptr);

/// mask(x) = 1 iff for every prefix T1..Tj of the record, the augmented pixel
/// that nearest-neighbour undo reads for x lies on that prefix's canvas and
/// its bilinear source lies inside the original frame, so no edge-replicated
/// value is ever read. Conjoining over prefixes makes the mask monotone:
/// appending a transform never revives a masked pixel.
ValidityMask build_validity_mask(const geometric::TransformRecord& record, Dims original_dims);

/// Pixels added on each side by batch_center_pad.
struct PadRecord {
  int top = 0;
  int bottom = 0;
  int left = 0;
  int right = 0;

  bool operator==(const PadRecord&) const = default;
};

/// Centered placement of `item` in `target`; the odd remainder goes to the
/// bottom/right. Throws TargetTooSmall.
PadRecord center_pad_amounts(Dims item, Dims target);

template <typename T>
struct PaddedBatch {
  std::vector<T> items;
  std::vector<PadRecord> pads;
};

/// Edge-replicated center padding of every item to `target`.
PaddedBatch<Image> batch_center_pad(const std::vector<Image>& items, Dims target);
PaddedBatch<DenseDepthMap> batch_center_pad(const std::vector<DenseDepthMap>& items, Dims target);

/// Elementwise maximum of item dims.
Dims batch_target_dims(const std::vector<Dims>& dims);

Image remove_center_pad(const Image& item, const PadRecord& pad);
DenseDepthMap remove_center_pad(const DenseDepthMap& item, const PadRecord& pad);

}  // namespace augundo::undo
