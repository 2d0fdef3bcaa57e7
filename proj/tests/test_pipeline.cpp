#include <gtest/gtest.h>

#include "augundo/pipeline.hpp"
#include "support.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace augundo::pipeline {
namespace {

using augundo::testing::random_depth;
using augundo::testing::random_image;
using augundo::testing::random_sparse;
using augundo::testing::translation;
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

struct Scene {
  scenegen::SyntheticScene scene;
  FrameTriplet triplet;
};

Scene make_fixture(Dims dims = {64, 64}, std::uint64_t seed = 3) {
  const auto k = CameraIntrinsics::create(500.0, 500.0, (dims.width - 1) / 2.0, (dims.height - 1) / 2.0);
  auto scene = scenegen::make_scene(scenegen::FrontoPlane{2.0}, dims, k, seed);
  Rng rng(seed);
  auto sparse = scenegen::sample_sparse(scene.depth, dims.area() / 10, rng);
  auto triplet = make_synthetic_triplet(scene, translation(-0.02), translation(-0.01), std::move(sparse));
  return {std::move(scene), std::move(triplet)};
}

TEST(Presets, IndoorSettings) {
  const auto c = AugmentationConfig::void_preset();
  const auto& p = c.photometric;
  for (const auto* f : {&p.brightness, &p.contrast, &p.saturation}) {
    EXPECT_TRUE(f->enabled);
    EXPECT_EQ(f->min, 0.5);
    EXPECT_EQ(f->max, 1.5);
    EXPECT_EQ(f->probability, 0.5);
  }
  EXPECT_EQ(p.hue.min, -0.1);
  EXPECT_EQ(p.hue.max, 0.1);
  EXPECT_EQ(p.patch_occlusion.min, 0.001);
  EXPECT_EQ(p.patch_occlusion.max, 0.005);
  EXPECT_EQ(p.patch_size, 5);
  EXPECT_EQ(p.point_removal.min, 0.6);
  EXPECT_EQ(p.point_removal.max, 0.7);
  const auto& g = c.geometric;
  EXPECT_TRUE(g.flip.enabled && g.flip_horizontal && g.flip_vertical);
  EXPECT_EQ(g.resize.min, 0.6);
  EXPECT_EQ(g.resize.max, 1.0);
  EXPECT_EQ(g.rotate.min, -25.0);
  EXPECT_EQ(g.rotate.max, 25.0);
  EXPECT_EQ(g.translate.min, -0.1);
  EXPECT_EQ(g.translate.max, 0.1);
  for (const auto* f : {&g.flip, &g.resize, &g.rotate, &g.translate}) EXPECT_EQ(f->probability, 0.5);
  EXPECT_EQ(c.mode, InclusionMode::PerFamily);
  EXPECT_NO_THROW(c.validate());
}

TEST(Presets, OutdoorSettings) {
  const auto c = AugmentationConfig::kitti_preset();
  EXPECT_TRUE(c.geometric.flip_horizontal);
  EXPECT_FALSE(c.geometric.flip_vertical);
  EXPECT_FALSE(c.geometric.resize.enabled);
  EXPECT_EQ(c.geometric.rotate.min, -20.0);
  EXPECT_EQ(c.geometric.rotate.max, 20.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(Presets, SampledParametersStayInRange) {
  const auto c = AugmentationConfig::void_preset();
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto s = sample_augmentation(c, {48, 48}, rng);
    for (const auto& t : s.photometric) {
      switch (t.kind) {
        case photometric::PhotometricKind::Hue:
          EXPECT_LE(std::abs(t.value), 0.1);
          break;
        case photometric::PhotometricKind::PatchOcclusion:
          EXPECT_GE(t.value, 0.001);
          EXPECT_LE(t.value, 0.005);
          break;
        case photometric::PhotometricKind::SparsePointRemoval:
          EXPECT_GE(t.value, 0.6);
          EXPECT_LE(t.value, 0.7);
          break;
        default:
          EXPECT_GE(t.value, 0.5);
          EXPECT_LE(t.value, 1.5);
      }
    }
  }
}

TEST(Config, ValidationAndAblation) {
  auto c = AugmentationConfig::void_preset();
  c.photometric.hue.max = 0.7;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::BadRange);
  c = AugmentationConfig::void_preset();
  c.photometric.patch_size = 4;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::BadRange);
  c = AugmentationConfig::void_preset();
  c.application_probability = 1.5;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::BadRange);

  c = AugmentationConfig::void_preset();
  exclude_family(c, AblationFamily::COJ);
  EXPECT_FALSE(c.photometric.brightness.enabled || c.photometric.contrast.enabled || c.photometric.saturation.enabled);
  EXPECT_TRUE(c.photometric.hue.enabled);
  exclude_family(c, AblationFamily::RZD);
  EXPECT_FALSE(c.geometric.resize.enabled);
  exclude_family(c, AblationFamily::RMI);
  EXPECT_FALSE(c.photometric.patch_occlusion.enabled);
  EXPECT_EQ(ablation_family_from_string("FLP"), AblationFamily::FLP);
  EXPECT_EQ(to_string(AblationFamily::RMP), "RMP");
  EXPECT_EQ(code_of([] { ablation_family_from_string("XYZ"); }), ErrorCode::BadKind);
}

TEST(Step, LogsEveryStepInOrder) {
  const auto f = make_fixture();
  const OraclePredictor oracle(f.scene.depth);
  Rng rng(2);
  const auto r = run_augundo_step(f.triplet, AugmentationConfig::void_preset(), oracle, {}, rng);
  ASSERT_EQ(r.artifacts.events.size(), 8u);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(static_cast<int>(r.artifacts.events[i]), i + 1);
  EXPECT_EQ(to_string(AlgorithmStep::UndoGeometric), "undo_geometric");
}

TEST(Step, EmptyConfigWithOracleHasNearZeroResidual) {
  const auto f = make_fixture();
  const OraclePredictor oracle(f.scene.depth);
  Rng rng(3);
  const auto r = run_augundo_step(f.triplet, AugmentationConfig::none(), oracle, {}, rng);
  EXPECT_LE(r.loss.photometric, 1e-3);
  EXPECT_EQ(r.loss.sparse, 0.0);
  EXPECT_EQ(r.loss.valid_pixel_count, 64u * 64u);
  EXPECT_TRUE(r.artifacts.sample.geometric.empty());
}

TEST(Step, FlipsAreLossEquivalent) {
  const auto f = make_fixture();
  const OraclePredictor oracle(f.scene.depth);
  Rng base_rng(0);
  const auto base = run_augundo_step(f.triplet, AugmentationConfig::none(), oracle, {}, base_rng);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto r = run_augundo_step(f.triplet, AugmentationConfig::flips_only(), oracle, {}, rng);
    ASSERT_EQ(r.artifacts.sample.geometric.size(), 1u);
    EXPECT_EQ(r.loss.photometric, base.loss.photometric);
    EXPECT_EQ(r.loss.sparse, base.loss.sparse);
  }
}

TEST(Step, TranslationLosesTheShiftedOutStrip) {
  const auto f = make_fixture();
  const OraclePredictor oracle(f.scene.depth);
  AugmentationSample sample;
  sample.geometric = TransformRecord({64, 64});
  sample.geometric.append(GeometricTransform::translate({64, 64}, 5, 0));
  const auto r = replay_augundo_step(f.triplet, sample, oracle, {});
  EXPECT_EQ(r.loss.valid_pixel_count, 64u * (64u - 5u));
  EXPECT_EQ(r.artifacts.mask.count_valid(), 64u * 59u);
}

TEST(Step, ReplayReproducesTheRun) {
  const auto f = make_fixture();
  const NearestFillPredictor nearest;
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    Rng a(seed), b(seed);
    const auto r1 = run_augundo_step(f.triplet, AugmentationConfig::void_preset(), nearest, {}, a);
    const auto r2 = run_augundo_step(f.triplet, AugmentationConfig::void_preset(), nearest, {}, b);
    EXPECT_EQ(r1.loss, r2.loss);
    EXPECT_EQ(r1.artifacts.augmented_image, r2.artifacts.augmented_image);
    EXPECT_EQ(r1.artifacts.depth.grid(), r2.artifacts.depth.grid());
    const auto replayed = replay_augundo_step(f.triplet, r1.artifacts.sample, nearest, {});
    EXPECT_EQ(replayed.loss, r1.loss);
    EXPECT_EQ(replayed.artifacts.mask, r1.artifacts.mask);
  }
}

TEST(Step, AugmentsOnlyTheReferenceInputs) {
  const auto f = make_fixture();
  AugmentationSample sample;
  sample.photometric.push_back(photometric::PhotometricTransform::brightness(1.3));
  sample.geometric = TransformRecord({64, 64});
  sample.geometric.append(GeometricTransform::flip_horizontal({64, 64}));
  const Image aug = augment_image(f.triplet.current, sample);
  const Image bright = photometric::adjust_brightness(f.triplet.current, 1.3);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) EXPECT_EQ(aug.at(r, c, 0), bright.at(r, 63 - c, 0));
  }
  const SparseDepthMap z = augment_sparse(f.triplet.sparse, sample);
  EXPECT_EQ(z.point_count(), f.triplet.sparse.point_count());
}

TEST(Batch, IndependentOfWorkerCount) {
  std::vector<Scene> fixtures;
  for (std::uint64_t s = 0; s < 4; ++s) fixtures.push_back(make_fixture({40 + 4 * static_cast<int>(s), 48}, s));
  std::vector<OraclePredictor> oracles;
  for (const auto& f : fixtures) oracles.emplace_back(f.scene.depth);
  std::vector<BatchItem> items;
  for (std::size_t i = 0; i < fixtures.size(); ++i) items.push_back({&fixtures[i].triplet, &oracles[i]});
  const auto config = AugmentationConfig::void_preset();
  const auto one = run_augundo_batch(items, config, {}, 99, 1);
  const auto three = run_augundo_batch(items, config, {}, 99, 3);
  ASSERT_EQ(one.size(), items.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].loss, three[i].loss);
    EXPECT_EQ(one[i].artifacts.depth.grid(), three[i].artifacts.depth.grid());
    EXPECT_EQ(one[i].artifacts.depth.dims(), fixtures[i].triplet.current.dims());
  }
}

TEST(Batch, MatchesSingleStepsWhenNoPaddingIsNeeded) {
  std::vector<Scene> fixtures;
  for (std::uint64_t s = 0; s < 3; ++s) fixtures.push_back(make_fixture({32, 40}, s));
  std::vector<NearestFillPredictor> predictors(3);
  std::vector<BatchItem> items;
  for (std::size_t i = 0; i < 3; ++i) items.push_back({&fixtures[i].triplet, &predictors[i]});
  auto config = AugmentationConfig::void_preset();
  exclude_family(config, AblationFamily::ROT);
  const auto batch = run_augundo_batch(items, config, {}, 5, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    Rng rng(mix_seed(5, i));
    const auto single = run_augundo_step(fixtures[i].triplet, config, predictors[i], {}, rng);
    EXPECT_EQ(batch[i].loss, single.loss);
    EXPECT_EQ(batch[i].artifacts.sample, single.artifacts.sample);
  }
}

TEST(ParallelFor, VisitsAllAndRethrows) {
  std::atomic<int> sum{0};
  parallel_for(100, 4, [&](std::size_t i) { sum += static_cast<int>(i); });
  EXPECT_EQ(sum.load(), 4950);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

// Brute force: some sparse point at minimal Euclidean distance carries the
// predicted depth.
TEST(NearestFill, MatchesBruteForceNearestPoint) {
  Rng rng(4);
  const NearestFillPredictor nearest;
  for (int trial = 0; trial < 5; ++trial) {
    const Dims dims{13, 17};
    const SparseDepthMap z = random_sparse(dims, rng, 0.05 + 0.05 * trial);
    if (z.point_count() == 0) continue;
    const Image img = random_image(dims, rng);
    const DenseDepthMap d = nearest.predict(img, z, TransformRecord(dims));
    for (int r = 0; r < dims.height; ++r) {
      for (int c = 0; c < dims.width; ++c) {
        long best = -1;
        for (int pr = 0; pr < dims.height; ++pr) {
          for (int pc = 0; pc < dims.width; ++pc) {
            if (!z.has_point(pr, pc)) continue;
            const long dist = static_cast<long>(pr - r) * (pr - r) + static_cast<long>(pc - c) * (pc - c);
            if (best < 0 || dist < best) best = dist;
          }
        }
        bool matched = false;
        for (int pr = 0; pr < dims.height && !matched; ++pr) {
          for (int pc = 0; pc < dims.width && !matched; ++pc) {
            if (!z.has_point(pr, pc)) continue;
            const long dist = static_cast<long>(pr - r) * (pr - r) + static_cast<long>(pc - c) * (pc - c);
            matched = dist == best && z.at(pr, pc) == d.at(r, c);
          }
        }
        EXPECT_TRUE(matched) << r << "," << c;
      }
    }
  }
  const DenseDepthMap empty = nearest.predict(Image::filled({4, 4}, 0.5), SparseDepthMap::empty({4, 4}), {});
  for (double v : empty.grid().storage()) EXPECT_EQ(v, 1.0);
}

TEST(Metrics, IdenticalMapsScorePerfectly) {
  const auto gt = DenseDepthMap::filled({8, 8}, 2.0);
  const auto m = evaluate_metrics(gt, gt, {});
  EXPECT_EQ(m.mae_mm, 0.0);
  EXPECT_EQ(m.rmse_mm, 0.0);
  EXPECT_EQ(m.imae, 0.0);
  EXPECT_EQ(m.irmse, 0.0);
  EXPECT_EQ(m.abs_rel, 0.0);
  EXPECT_EQ(m.sq_rel, 0.0);
  EXPECT_EQ(m.delta1, 1.0);
  EXPECT_EQ(m.delta2, 1.0);
  EXPECT_EQ(m.delta3, 1.0);
  EXPECT_EQ(m.count, 64u);
}

TEST(Metrics, ConstantOffset) {
  const auto gt = DenseDepthMap::filled({8, 8}, 2.0);
  const auto d = DenseDepthMap::filled({8, 8}, 2.1);
  const auto m = evaluate_metrics(d, gt, {});
  EXPECT_NEAR(m.mae_mm, 100.0, 100.0 * 1e-9);
  EXPECT_NEAR(m.rmse_mm, 100.0, 100.0 * 1e-9);
  EXPECT_NEAR(m.abs_rel, 0.05, 0.05 * 1e-9);
  EXPECT_NEAR(m.sq_rel, 0.005, 0.005 * 1e-9);
  const double inv = 1.0 / 2.0 - 1.0 / 2.1;
  EXPECT_NEAR(m.imae, inv, inv * 1e-9);
  EXPECT_NEAR(m.irmse, inv, inv * 1e-9);
  EXPECT_EQ(m.delta1, 1.0);
}

TEST(Metrics, DoubledDepthFailsEveryThreshold) {
  const auto gt = DenseDepthMap::filled({8, 8}, 2.0);
  const auto d = DenseDepthMap::filled({8, 8}, 4.0);
  const auto m = evaluate_metrics(d, gt, {});
  EXPECT_EQ(m.delta1, 0.0);
  EXPECT_EQ(m.delta2, 0.0);
  EXPECT_EQ(m.delta3, 0.0);
}

TEST(Metrics, MatchesPerPixelReimplementation) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Dims dims{9, 11};
    Grid<double> gt(dims, 0.0), pred(dims, 0.0);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      gt[i] = rng.bernoulli(0.2) ? 0.0 : rng.uniform(0.05, 6.0);
      pred[i] = rng.uniform(0.3, 5.5);
    }
    const EvalRange range{0.2, 5.0};
    double ae = 0, se = 0, iae = 0, ise = 0, rel = 0, sqr = 0, d1 = 0, d2 = 0, d3 = 0, n = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const double g = gt[i];
      if (g <= 0.0 || g < range.min || g > range.max) continue;
      const double p = pred[i];
      n += 1;
      ae += std::abs(p - g);
      se += (p - g) * (p - g);
      iae += std::abs(1 / p - 1 / g);
      ise += (1 / p - 1 / g) * (1 / p - 1 / g);
      rel += std::abs(p - g) / g;
      sqr += (p - g) * (p - g) / g;
      const double ratio = std::max(p / g, g / p);
      d1 += ratio < 1.25;
      d2 += ratio < 1.25 * 1.25;
      d3 += ratio < 1.25 * 1.25 * 1.25;
    }
    const auto m = evaluate_metrics(pred, gt, range);
    EXPECT_EQ(static_cast<double>(m.count), n);
    EXPECT_NEAR(m.mae_mm, 1000 * ae / n, 1e-9 * 1000 * ae / n);
    EXPECT_NEAR(m.rmse_mm, 1000 * std::sqrt(se / n), 1e-9 * 1000 * std::sqrt(se / n));
    EXPECT_NEAR(m.imae, iae / n, 1e-9 * iae / n);
    EXPECT_NEAR(m.irmse, std::sqrt(ise / n), 1e-9 * std::sqrt(ise / n));
    EXPECT_NEAR(m.abs_rel, rel / n, 1e-9 * rel / n);
    EXPECT_NEAR(m.sq_rel, sqr / n, 1e-9 * sqr / n);
    EXPECT_DOUBLE_EQ(m.delta1, d1 / n);
    EXPECT_DOUBLE_EQ(m.delta2, d2 / n);
    EXPECT_DOUBLE_EQ(m.delta3, d3 / n);
  }
}

TEST(Metrics, Errors) {
  Grid<double> gt({4, 4}, 0.0), pred({4, 4}, 1.0);
  EXPECT_EQ(code_of([&] { evaluate_metrics(pred, gt, {}); }), ErrorCode::EmptyEvalSet);
  gt[3] = 2.0;
  pred[3] = 0.0;
  EXPECT_EQ(code_of([&] { evaluate_metrics(pred, gt, {}); }), ErrorCode::NegativeDepth);
  EXPECT_EQ(code_of([&] { evaluate_metrics(Grid<double>({4, 5}, 1.0), gt, {}); }), ErrorCode::DimsMismatch);
}

TEST(FrameTriplet, RejectsMixedDims) {
  auto f = make_fixture({16, 16});
  f.triplet.next = Image::filled({16, 17}, 0.5);
  EXPECT_EQ(code_of([&] { f.triplet.validate(); }), ErrorCode::DimsMismatch);
}

}  // namespace
}  // namespace augundo::pipeline
