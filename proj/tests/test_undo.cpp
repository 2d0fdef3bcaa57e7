#include <gtest/gtest.h>

#include "augundo/undo.hpp"
#include "support.hpp"

#include <functional>

namespace augundo::undo {
namespace {

using augundo::testing::random_depth;
using augundo::testing::random_image;
using geometric::compose;
using geometric::GeometricTransform;
using geometric::TransformRecord;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected augundo::Error";
  return ErrorCode::IoError;
}

TransformRecord single(const GeometricTransform& t) {
  TransformRecord r(t.in_dims());
  r.append(t);
  return r;
}

TEST(UndoDepth, FlipRoundTripIsBitwise) {
  Rng rng(1);
  const DenseDepthMap d = random_depth({9, 13}, rng);
  TransformRecord rec({9, 13});
  rec.append(GeometricTransform::flip_horizontal({9, 13}));
  rec.append(GeometricTransform::flip_vertical({9, 13}));
  rec.append(GeometricTransform::translate({9, 13}, 0, 0));
  const DenseDepthMap aug = geometric::warp_dense_depth(d, compose(rec));
  const UndoResult back = undo_depth(aug, rec);
  EXPECT_EQ(back.depth.grid(), d.grid());
  EXPECT_EQ(back.mask.count_valid(), d.dims().area());
}

TEST(UndoDepth, EmptyRecordIsIdentity) {
  Rng rng(2);
  const DenseDepthMap d = random_depth({5, 6}, rng);
  const UndoResult r = undo_depth(d, TransformRecord({5, 6}));
  EXPECT_EQ(r.depth.grid(), d.grid());
  EXPECT_EQ(r.mask.count_valid(), 30u);
}

TEST(UndoDepth, TranslationLosesTheRightStrip) {
  Rng rng(8);
  const DenseDepthMap d = random_depth({16, 16}, rng);
  const auto rec = single(GeometricTransform::translate({16, 16}, 4, 0));
  const UndoResult back = undo_depth(geometric::warp_dense_depth(d, compose(rec)), rec);
  EXPECT_EQ(back.mask.count_valid(), 16u * 12u);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      EXPECT_EQ(back.mask.valid(r, c), c < 12);
      if (c < 12) EXPECT_EQ(back.depth.at(r, c), d.at(r, c));
    }
  }
}

TEST(UndoDepth, RejectsWrongCanvas) {
  Rng rng(3);
  const DenseDepthMap d = random_depth({8, 8}, rng);
  const auto rec = single(GeometricTransform::rotate({8, 8}, 20.0));
  EXPECT_EQ(code_of([&] { undo_depth(d, rec); }), ErrorCode::DimsMismatch);
}

TEST(UndoDepth, ProbeReportsReadIndices) {
  Rng rng(4);
  const DenseDepthMap d = random_depth({6, 6}, rng);
  UndoProbe probe;
  undo_depth(d, single(GeometricTransform::flip_horizontal({6, 6})), &probe);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) EXPECT_EQ(probe.source_index.at(r, c), r * 6 + (5 - c));
  }
}

TEST(ValidityMask, TranslateKeepsOnlyShiftedInPixels) {
  const ValidityMask m = build_validity_mask(single(GeometricTransform::translate({8, 8}, 5, 0)), {8, 8});
  EXPECT_EQ(m.count_valid(), 24u);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) EXPECT_EQ(m.grid().at(r, c), c < 3 ? 1 : 0);
  }
}

TEST(ValidityMask, EnlargingResizeCropsTheBorder) {
  const ValidityMask m = build_validity_mask(single(GeometricTransform::resize({64, 64}, 1.25, 1.25)), {64, 64});
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) {
      const bool inside = r >= 6 && r <= 57 && c >= 6 && c <= 57;
      EXPECT_EQ(m.grid().at(r, c), inside ? 1 : 0) << r << "," << c;
    }
  }
}

TEST(ValidityMask, ShrinkingResizeKeepsTheInterior) {
  // The outermost ring lands on augmented pixels whose bilinear source lies
  // just outside the frame, so only the interior survives.
  const ValidityMask m = build_validity_mask(single(GeometricTransform::resize({64, 64}, 0.8, 0.8)), {64, 64});
  for (int r = 1; r < 63; ++r) {
    for (int c = 1; c < 63; ++c) EXPECT_EQ(m.grid().at(r, c), 1) << r << "," << c;
  }
  EXPECT_EQ(m.grid().at(0, 0), 0);
}

TEST(ValidityMask, TranslationAfterRotationPushesContentOut) {
  const ValidityMask m = build_validity_mask(single(GeometricTransform::rotate({32, 32}, 30.0)), {32, 32});
  EXPECT_GT(m.count_valid(), 32u * 32u * 9 / 10);
  TransformRecord rec({32, 32});
  rec.append(GeometricTransform::rotate({32, 32}, 30.0));
  rec.append(GeometricTransform::translate(rec.final_dims(), 10, 10));
  const ValidityMask shifted = build_validity_mask(rec, {32, 32});
  EXPECT_LT(shifted.count_valid(), m.count_valid());
  EXPECT_EQ(shifted.grid().at(16, 16), 1);
  EXPECT_EQ(shifted.grid().at(31, 31), 0);
}

TEST(ValidityMask, MonotoneUnderPrefixes) {
  geometric::GeometricConfig cfg;
  cfg.flip = {true, 0.5, 0, 0};
  cfg.resize = {true, 0.5, 0.6, 1.4};
  cfg.rotate = {true, 0.5, -25, 25};
  cfg.translate = {true, 0.5, -0.2, 0.2};
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const TransformRecord rec = geometric::sample_geometric(cfg, {24, 30}, rng);
    for (std::size_t k = 1; k <= rec.size(); ++k) {
      const ValidityMask shorter = build_validity_mask(rec.prefix(k - 1), {24, 30});
      const ValidityMask longer = build_validity_mask(rec.prefix(k), {24, 30});
      for (std::size_t i = 0; i < longer.grid().size(); ++i) EXPECT_LE(longer.grid()[i], shorter.grid()[i]);
    }
  }
}

TEST(ValidityMask, RejectsWrongDims) {
  EXPECT_EQ(code_of([] { build_validity_mask(TransformRecord({8, 8}), {8, 9}); }), ErrorCode::DimsMismatch);
}

TEST(CenterPad, SplitsOddRemainderToBottomRight) {
  EXPECT_EQ(center_pad_amounts({30, 30}, {32, 32}), (PadRecord{1, 1, 1, 1}));
  EXPECT_EQ(center_pad_amounts({31, 31}, {32, 32}), (PadRecord{0, 1, 0, 1}));
  EXPECT_EQ(center_pad_amounts({30, 30}, {33, 33}), (PadRecord{1, 2, 1, 2}));
  EXPECT_EQ(center_pad_amounts({10, 12}, {10, 15}), (PadRecord{0, 0, 1, 2}));
  EXPECT_EQ(center_pad_amounts({10, 12}, {10, 12}), (PadRecord{}));
  EXPECT_EQ(code_of([] { center_pad_amounts({33, 10}, {32, 32}); }), ErrorCode::TargetTooSmall);
}

TEST(CenterPad, PadThenRemoveIsIdentity) {
  Rng rng(6);
  const std::vector<Image> imgs{random_image({10, 12}, rng), random_image({13, 9}, rng)};
  const Dims target = batch_target_dims({imgs[0].dims(), imgs[1].dims()});
  EXPECT_EQ(target, (Dims{13, 12}));
  const auto padded = batch_center_pad(imgs, target);
  ASSERT_EQ(padded.items.size(), 2u);
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    EXPECT_EQ(padded.items[i].dims(), target);
    EXPECT_EQ(remove_center_pad(padded.items[i], padded.pads[i]), imgs[i]);
  }
  const std::vector<DenseDepthMap> depths{random_depth({7, 7}, rng)};
  const auto pd = batch_center_pad(depths, {10, 11});
  EXPECT_EQ(remove_center_pad(pd.items[0], pd.pads[0]).grid(), depths[0].grid());
  // Edge replication: the padded corner repeats the original corner.
  EXPECT_EQ(pd.items[0].at(0, 0), depths[0].at(0, 0));
  EXPECT_EQ(pd.items[0].at(9, 10), depths[0].at(6, 6));
}

TEST(CenterPad, RemoveRejectsOversizedPad) {
  Rng rng(7);
  const DenseDepthMap d = random_depth({6, 6}, rng);
  EXPECT_EQ(code_of([&] { remove_center_pad(d, PadRecord{3, 3, 0, 0}); }), ErrorCode::DimsMismatch);
}

}  // namespace
}  // namespace augundo::undo
