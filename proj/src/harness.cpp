#include "augundo/harness.hpp"

#include "augundo/undo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace augundo::harness {

namespace {

using geometric::GeometricTransform;
using geometric::TransformKind;
using geometric::TransformRecord;
using pipeline::AblationFamily;
using pipeline::AugmentationConfig;

constexpr AblationFamily kFamilies[] = {AblationFamily::TRN, AblationFamily::ROT, AblationFamily::HUE,
                                        AblationFamily::COJ, AblationFamily::RMP, AblationFamily::FLP,
                                        AblationFamily::RZD, AblationFamily::RMI};

CameraIntrinsics intrinsics_for(int size) {
  const double c = (size - 1) / 2.0;
  return CameraIntrinsics::create(500.0, 500.0, c, c);
}

RigidPose shift(double tx) { return validate_pose(Eigen::Matrix3d::Identity(), Eigen::Vector3d(tx, 0.0, 0.0)); }

DenseDepthMap random_depth(Dims dims, Rng& rng) {
  std::vector<double> d(dims.area());
  for (auto& v : d) v = rng.uniform(0.5, 4.5);
  return DenseDepthMap::create(dims, std::move(d));
}

Image random_image(Dims dims, Rng& rng) {
  std::vector<double> px(dims.area() * 3);
  for (auto& v : px) v = rng.uniform01();
  return Image::create(dims, std::move(px));
}

TransformRecord random_integer_record(Dims dims, Rng& rng) {
  TransformRecord record(dims);
  const auto count = 1 + rng.index(3);
  for (std::uint64_t i = 0; i < count; ++i) {
    const Dims d = record.final_dims();
    switch (rng.index(3)) {
      case 0: record.append(GeometricTransform::flip_horizontal(d)); break;
      case 1: record.append(GeometricTransform::flip_vertical(d)); break;
      default:
        record.append(GeometricTransform::translate(d, static_cast<int>(rng.index(13)) - 6,
                                                    static_cast<int>(rng.index(13)) - 6));
    }
  }
  return record;
}

TransformRecord random_interpolating_record(Dims dims, Rng& rng) {
  geometric::GeometricConfig config = AugmentationConfig::void_preset().geometric;
  for (;;) {
    TransformRecord r = geometric::sample_geometric(config, dims, rng);
    if (!r.integer_only()) return r;
  }
}

pipeline::FrameTriplet plane_triplet(const scenegen::SyntheticScene& scene, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 1));
  SparseDepthMap sparse = scenegen::sample_sparse(scene.depth, scene.depth.dims().area() / 10, rng);
  // The plane sits at 2 m with fx = 500, so a shift of t meters moves content
  // by 250 t pixels: a quarter and an eighth of the width here.
  const double width = scene.depth.dims().width;
  return pipeline::make_synthetic_triplet(scene, shift(-width / 1000.0), shift(-width / 2000.0), std::move(sparse));
}

struct Check {
  std::vector<CheckResult>& out;

  void record(std::string name, bool passed, const std::string& detail) {
    out.push_back({std::move(name), passed, detail});
  }
};

std::string count_detail(std::size_t failures, std::size_t total, const char* unit) {
  std::ostringstream s;
  s << failures << " failing " << unit << " out of " << total;
  return s.str();
}

bool same_data_terms(const loss::LossBreakdown& a, const loss::LossBreakdown& b) {
  return a.photometric == b.photometric && a.sparse == b.sparse;
}

}  // namespace

bool sample_uses(const pipeline::AugmentationSample& sample, AblationFamily family) {
  using photometric::PhotometricKind;
  auto has_photometric = [&](std::initializer_list<PhotometricKind> kinds) {
    return std::any_of(sample.photometric.begin(), sample.photometric.end(), [&](const auto& t) {
      return std::find(kinds.begin(), kinds.end(), t.kind) != kinds.end();
    });
  };
  auto has_geometric = [&](std::initializer_list<TransformKind> kinds) {
    const auto& ts = sample.geometric.transforms();
    return std::any_of(ts.begin(), ts.end(), [&](const auto& t) {
      return std::find(kinds.begin(), kinds.end(), t.kind()) != kinds.end();
    });
  };
  switch (family) {
    case AblationFamily::TRN: return has_geometric({TransformKind::Translate});
    case AblationFamily::ROT: return has_geometric({TransformKind::Rotate});
    case AblationFamily::HUE: return has_photometric({PhotometricKind::Hue});
    case AblationFamily::COJ:
      return has_photometric({PhotometricKind::Brightness, PhotometricKind::Contrast, PhotometricKind::Saturation});
    case AblationFamily::RMP: return has_photometric({PhotometricKind::SparsePointRemoval});
    case AblationFamily::FLP: return has_geometric({TransformKind::FlipH, TransformKind::FlipV});
    case AblationFamily::RZD: return has_geometric({TransformKind::Resize});
    case AblationFamily::RMI: return has_photometric({PhotometricKind::PatchOcclusion});
  }
  return false;
}

std::vector<CheckResult> run_harness(const HarnessOptions& options) {
  std::vector<CheckResult> results;
  Check check{results};
  const Dims dims{options.size, options.size};
  const auto trials = static_cast<std::size_t>(std::max(1, options.trials));
  AugmentationConfig config = options.config;
  for (const auto f : options.excluded) pipeline::exclude_family(config, f);
  const loss::LossWeights weights;

  {  // Integer maps: undo of the forward warp is the identity on mask-1 pixels.
    Rng rng(mix_seed(options.seed, 100));
    std::size_t failures = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      const DenseDepthMap d = random_depth(dims, rng);
      const TransformRecord rec = random_integer_record(dims, rng);
      const auto undone = undo::undo_depth(geometric::warp_dense_depth(d, geometric::compose(rec)), rec);
      for (std::size_t p = 0; p < dims.area(); ++p) {
        if (undone.mask.grid()[p] != 0 && undone.depth.grid()[p] != d.grid()[p]) {
          ++failures;
          break;
        }
      }
    }
    check.record("roundtrip_integer_maps", failures == 0, count_detail(failures, trials, "records"));
  }

  {  // Interpolating maps: mask-1 values come from within one pixel; no value is invented.
    Rng rng(mix_seed(options.seed, 101));
    std::size_t failures = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      const DenseDepthMap d = random_depth(dims, rng);
      std::vector<double> sorted = d.grid().storage();
      std::sort(sorted.begin(), sorted.end());
      const TransformRecord rec = random_interpolating_record(dims, rng);
      const auto undone = undo::undo_depth(geometric::warp_dense_depth(d, geometric::compose(rec)), rec);
      bool ok = true;
      for (int row = 0; row < dims.height && ok; ++row) {
        for (int col = 0; col < dims.width && ok; ++col) {
          const double v = undone.depth.at(row, col);
          ok = std::binary_search(sorted.begin(), sorted.end(), v);
          if (!ok || !undone.mask.valid(row, col)) continue;
          bool near = false;
          for (int dr = -1; dr <= 1 && !near; ++dr) {
            for (int dc = -1; dc <= 1 && !near; ++dc) {
              near = dims.contains(row + dr, col + dc) && d.at(row + dr, col + dc) == v;
            }
          }
          ok = near;
        }
      }
      if (!ok) ++failures;
    }
    check.record("roundtrip_interpolating_maps", failures == 0, count_detail(failures, trials, "records"));
  }

  {  // Mask-1 pixels never read an edge-replicated augmented pixel.
    Rng rng(mix_seed(options.seed, 102));
    std::size_t failures = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      const Image img = random_image(dims, rng);
      TransformRecord rec = geometric::sample_geometric(AugmentationConfig::void_preset().geometric, dims, rng);
      if (rec.empty()) rec.append(GeometricTransform::translate(dims, 3, -2));
      geometric::WarpProbe wp;
      (void)geometric::warp_image(img, geometric::compose(rec), &wp);
      const DenseDepthMap d_aug = DenseDepthMap::filled(rec.final_dims(), 1.0);
      undo::UndoProbe up;
      const auto undone = undo::undo_depth(d_aug, rec, &up);
      for (std::size_t p = 0; p < dims.area(); ++p) {
        if (undone.mask.grid()[p] != 0 && wp.replicated[static_cast<std::size_t>(up.source_index[p])] != 0) {
          ++failures;
          break;
        }
      }
    }
    check.record("mask_soundness", failures == 0, count_detail(failures, trials, "records"));
  }

  {  // Reprojection of a fronto-parallel plane under a lateral shift.
    const auto k = CameraIntrinsics::create(500.0, 500.0, 31.5, 31.5);
    const auto depth = DenseDepthMap::filled({64, 64}, 2.0);
    const auto coords = loss::reproject(depth, k, shift(0.1));
    double worst = 0.0;
    for (int row = 0; row < 64; ++row) {
      for (int col = 0; col < 64; ++col) {
        worst = std::max({worst, std::abs(coords.u.at(row, col) - (col + 25.0)),
                          std::abs(coords.v.at(row, col) - row)});
      }
    }
    check.record("reprojection_oracle", worst < 1e-9, "max |delta| = " + std::to_string(worst) + " px");
  }

  const scenegen::SyntheticScene scene =
      scenegen::make_scene(scenegen::FrontoPlane{2.0}, dims, intrinsics_for(options.size), options.seed);
  const pipeline::FrameTriplet triplet = plane_triplet(scene, options.seed);
  const pipeline::OraclePredictor oracle(scene.depth);

  {  // Ground-truth depth and poses leave only the interpolation floor.
    const loss::LossWeights w{1.0, 1.0, 0.0, 0.85};
    const auto l = loss::total_loss(triplet.current, {triplet.prev, triplet.next}, triplet.sparse, scene.depth,
                                    ValidityMask::ones(dims), triplet.intrinsics,
                                    {triplet.pose_prev, triplet.pose_next}, w);
    check.record("zero_residual_oracle", l.photometric <= 1e-3 && l.sparse == 0.0,
                 "photometric = " + std::to_string(l.photometric) + ", sparse = " + std::to_string(l.sparse));
  }

  {  // Flip-only augmentation leaves the data terms bitwise unchanged.
    Rng base_rng(0);
    const auto baseline =
        pipeline::run_augundo_step(triplet, AugmentationConfig::none(), oracle, weights, base_rng).loss;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      Rng rng(mix_seed(options.seed, 200 + i));
      const auto r = pipeline::run_augundo_step(triplet, AugmentationConfig::flips_only(), oracle, weights, rng);
      if (!same_data_terms(r.loss, baseline)) ++failures;
    }
    check.record("flip_loss_equivalence", failures == 0, count_detail(failures, trials, "seeds"));
  }

  {  // Depth changes confined to mask-0 pixels do not move the data terms.
    Rng rng(mix_seed(options.seed, 103));
    std::size_t failures = 0;
    std::size_t cases = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      TransformRecord rec(dims);
      rec.append(GeometricTransform::translate(dims, static_cast<int>(rng.index(9)) + 2, -static_cast<int>(rng.index(5))));
      const auto undone = undo::undo_depth(random_depth(dims, rng), rec);
      std::vector<double> perturbed = undone.depth.grid().storage();
      for (std::size_t p = 0; p < perturbed.size(); ++p) {
        if (undone.mask.grid()[p] == 0) perturbed[p] = rng.uniform(0.3, 4.9);
      }
      const auto a = loss::total_loss(triplet.current, {triplet.prev, triplet.next}, triplet.sparse, undone.depth,
                                      undone.mask, triplet.intrinsics, {triplet.pose_prev, triplet.pose_next}, weights);
      const auto b = loss::total_loss(triplet.current, {triplet.prev, triplet.next}, triplet.sparse,
                                      DenseDepthMap::create(dims, std::move(perturbed)), undone.mask,
                                      triplet.intrinsics, {triplet.pose_prev, triplet.pose_next}, weights);
      ++cases;
      if (!same_data_terms(a, b)) ++failures;
    }
    check.record("mask_exclusion", failures == 0, count_detail(failures, cases, "cases"));
  }

  {  // Flips keep every sparse point.
    Rng rng(mix_seed(options.seed, 104));
    std::size_t failures = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      const SparseDepthMap z = scenegen::sample_sparse(random_depth(dims, rng), dims.area() / 3, rng);
      TransformRecord rec(dims);
      rec.append(rng.bernoulli(0.5) ? GeometricTransform::flip_horizontal(dims) : GeometricTransform::flip_vertical(dims));
      if (geometric::warp_sparse_depth(z, geometric::compose(rec)).point_count() != z.point_count()) ++failures;
    }
    check.record("sparse_flip_conservation", failures == 0, count_detail(failures, trials, "maps"));
  }

  {
    const auto m = pipeline::evaluate_metrics(scene.depth, scene.depth, {});
    const bool ok = m.mae_mm == 0.0 && m.rmse_mm == 0.0 && m.imae == 0.0 && m.irmse == 0.0 && m.abs_rel == 0.0 &&
                    m.sq_rel == 0.0 && m.delta1 == 1.0 && m.delta2 == 1.0 && m.delta3 == 1.0;
    check.record("metrics_identity", ok, "identical maps evaluated over " + std::to_string(m.count) + " pixels");
  }

  {  // Same seed, same artifacts; persisted samples replay bitwise.
    const pipeline::NearestFillPredictor fill;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      Rng a(mix_seed(options.seed, 300 + i));
      Rng b(mix_seed(options.seed, 300 + i));
      const auto first = pipeline::run_augundo_step(triplet, config, fill, weights, a);
      const auto second = pipeline::run_augundo_step(triplet, config, fill, weights, b);
      const auto replayed = pipeline::replay_augundo_step(triplet, first.artifacts.sample, fill, weights);
      const bool ok = first.loss == second.loss && first.artifacts.depth == second.artifacts.depth &&
                      first.artifacts.mask == second.artifacts.mask && replayed.loss == first.loss &&
                      replayed.artifacts.depth == first.artifacts.depth;
      if (!ok) ++failures;
    }
    check.record("determinism_and_replay", failures == 0, count_detail(failures, trials, "seeds"));
  }

  for (const auto family : kFamilies) {
    const std::string name(pipeline::to_string(family));
    const bool excluded = std::find(options.excluded.begin(), options.excluded.end(), family) != options.excluded.end();
    Rng rng(mix_seed(options.seed, 400 + static_cast<std::uint64_t>(family)));
    std::size_t hits = 0;
    constexpr std::size_t kDraws = 200;
    for (std::size_t i = 0; i < kDraws; ++i) {
      if (sample_uses(pipeline::sample_augmentation(config, dims, rng), family)) ++hits;
    }
    const bool enabled_in_config = [&] {
      AugmentationConfig probe = config;
      pipeline::exclude_family(probe, family);
      return !(probe == config);
    }();
    const bool ok = enabled_in_config ? hits > 0 : hits == 0;
    check.record("ablation_" + name + (enabled_in_config ? "_on" : "_off"), ok && (!excluded || !enabled_in_config),
                 std::to_string(hits) + " of " + std::to_string(kDraws) + " draws include " + name);
  }
  return results;
}

}  // namespace augundo::harness
