#include "augundo/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace augundo::loss {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void require_same(Dims a, Dims b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimsMismatch, std::string(what) + ": " + to_string(a) + " vs " + to_string(b));
  }
}

}  // namespace

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(lambda >= 0.0)) {
    throw Error(ErrorCode::BadParam, "loss weights must be non-negative");
  }
  if (!(ssim_weight >= 0.0 && ssim_weight <= 1.0)) {
    throw Error(ErrorCode::BadParam, "ssim weight must lie in [0, 1]");
  }
}

ReprojectedCoords reproject(const DenseDepthMap& depth, const CameraIntrinsics& intrinsics, const RigidPose& pose) {
  const Dims dims = depth.dims();
  ReprojectedCoords out{Grid<double>(dims, 0.0), Grid<double>(dims, 0.0), Grid<std::uint8_t>(dims, 0)};
  if (pose.is_identity()) {
    for (int row = 0; row < dims.height; ++row) {
      for (int col = 0; col < dims.width; ++col) {
        out.u.at(row, col) = col;
        out.v.at(row, col) = row;
      }
    }
    return out;
  }
  const Eigen::Matrix3d& rot = pose.rotation();
  const Eigen::Vector3d& t = pose.translation();
  const double fx = intrinsics.fx();
  const double fy = intrinsics.fy();
  const double cx = intrinsics.cx();
  const double cy = intrinsics.cy();
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      const double d = depth.at(row, col);
      const Eigen::Vector3d p(d * (col - cx) / fx, d * (row - cy) / fy, d);
      const Eigen::Vector3d q = rot * p + t;
      if (q.z() <= kMinDepth) {
        out.behind_camera.at(row, col) = 1;
        out.u.at(row, col) = -1.0;
        out.v.at(row, col) = -1.0;
        continue;
      }
      out.u.at(row, col) = fx * q.x() / q.z() + cx;
      out.v.at(row, col) = fy * q.y() / q.z() + cy;
    }
  }
  return out;
}

Reconstruction reconstruct(const Image& source, const ReprojectedCoords& coords) {
  const Dims dims = coords.dims();
  const int w = source.width();
  const int h = source.height();
  std::vector<double> out(dims.area() * 3);
  std::vector<std::uint8_t> in_frame(dims.area(), 0);
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      const std::size_t i = static_cast<std::size_t>(row) * dims.width + col;
      double u = coords.u[i];
      double v = coords.v[i];
      const bool inside = coords.behind_camera[i] == 0 && u >= 0.0 && u <= w - 1 && v >= 0.0 && v <= h - 1;
      in_frame[i] = inside ? 1 : 0;
      u = std::isfinite(u) ? std::clamp(u, 0.0, static_cast<double>(w - 1)) : 0.0;
      v = std::isfinite(v) ? std::clamp(v, 0.0, static_cast<double>(h - 1)) : 0.0;
      const int u0 = static_cast<int>(std::floor(u));
      const int v0 = static_cast<int>(std::floor(v));
      const int u1 = std::min(u0 + 1, w - 1);
      const int v1 = std::min(v0 + 1, h - 1);
      const double fu = u - u0;
      const double fv = v - v0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = (1.0 - fu) * source.at(v0, u0, ch) + fu * source.at(v0, u1, ch);
        const double bottom = (1.0 - fu) * source.at(v1, u0, ch) + fu * source.at(v1, u1, ch);
        out[i * 3 + ch] = std::clamp((1.0 - fv) * top + fv * bottom, 0.0, 1.0);
      }
    }
  }
  return {Image::create(dims, std::move(out)), ValidityMask::create(dims, std::move(in_frame))};
}

Grid<double> ssim_map(const Image& a, const Image& b) {
  require_same(a.dims(), b.dims(), "ssim inputs");
  const Dims dims = a.dims();
  Grid<double> out(dims, 0.0);
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      double total = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          const int r = std::clamp(row + dr, 0, dims.height - 1);
          for (int dc = -1; dc <= 1; ++dc) {
            const int c = std::clamp(col + dc, 0, dims.width - 1);
            const double x = a.at(r, c, ch);
            const double y = b.at(r, c, ch);
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
          }
        }
        const double mx = sx / 9.0;
        const double my = sy / 9.0;
        const double vx = sxx / 9.0 - mx * mx;
        const double vy = syy / 9.0 - my * my;
        const double cxy = sxy / 9.0 - mx * my;
        const double num = (2.0 * mx * my + kC1) * (2.0 * cxy + kC2);
        const double den = (mx * mx + my * my + kC1) * (vx + vy + kC2);
        total += num / den;
      }
      out.at(row, col) = std::clamp(total / 3.0, -1.0, 1.0);
    }
  }
  return out;
}

Grid<double> photometric_error(const Image& reconstructed, const Image& target, double ssim_weight) {
  require_same(reconstructed.dims(), target.dims(), "photometric error inputs");
  if (!(ssim_weight >= 0.0 && ssim_weight <= 1.0)) {
    throw Error(ErrorCode::BadParam, "ssim weight must lie in [0, 1]");
  }
  const Dims dims = target.dims();
  Grid<double> out(dims, 0.0);
  const Grid<double> ssim = ssim_weight > 0.0 ? ssim_map(reconstructed, target) : Grid<double>(dims, 1.0);
  const auto ra = reconstructed.pixels();
  const auto ta = target.pixels();
  for (std::size_t i = 0; i < dims.area(); ++i) {
    const double l1 =
        (std::abs(ra[3 * i] - ta[3 * i]) + std::abs(ra[3 * i + 1] - ta[3 * i + 1]) +
         std::abs(ra[3 * i + 2] - ta[3 * i + 2])) /
        3.0;
    const double structure = std::clamp((1.0 - ssim[i]) / 2.0, 0.0, 1.0);
    out[i] = ssim_weight * structure + (1.0 - ssim_weight) * l1;
  }
  return out;
}

Grid<double> sparse_depth_error(const DenseDepthMap& depth, const SparseDepthMap& sparse, SparseNorm norm) {
  require_same(depth.dims(), sparse.dims(), "sparse depth error inputs");
  Grid<double> out(depth.dims(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double z = sparse.grid()[i];
    if (!(z > 0.0)) continue;
    const double diff = std::abs(depth.grid()[i] - z);
    out[i] = norm == SparseNorm::L1 ? diff : diff * diff;
  }
  return out;
}

namespace {

double smoothness_impl(const DenseDepthMap& depth, const Image& image, const ValidityMask* mask) {
  require_same(depth.dims(), image.dims(), "smoothness inputs");
  const Grid<double> gray = image.gray();
  const Dims dims = depth.dims();
  double sum_u = 0.0;
  double sum_v = 0.0;
  std::size_t n_u = 0;
  std::size_t n_v = 0;
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      const bool here = mask == nullptr || mask->valid(row, col);
      if (col + 1 < dims.width && here && (mask == nullptr || mask->valid(row, col + 1))) {
        sum_u += std::abs(depth.at(row, col + 1) - depth.at(row, col)) *
                 std::exp(-std::abs(gray.at(row, col + 1) - gray.at(row, col)));
        ++n_u;
      }
      if (row + 1 < dims.height && here && (mask == nullptr || mask->valid(row + 1, col))) {
        sum_v += std::abs(depth.at(row + 1, col) - depth.at(row, col)) *
                 std::exp(-std::abs(gray.at(row + 1, col) - gray.at(row, col)));
        ++n_v;
      }
    }
  }
  const double mean_u = n_u > 0 ? sum_u / static_cast<double>(n_u) : 0.0;
  const double mean_v = n_v > 0 ? sum_v / static_cast<double>(n_v) : 0.0;
  return mean_u + mean_v;
}

}  // namespace

double smoothness(const DenseDepthMap& depth, const Image& image) { return smoothness_impl(depth, image, nullptr); }

LossBreakdown total_loss(const Image& target, const std::vector<Image>& neighbours, const SparseDepthMap& sparse,
                         const DenseDepthMap& depth, const ValidityMask& mask, const CameraIntrinsics& intrinsics,
                         const std::vector<RigidPose>& poses, const LossWeights& weights, const LossOptions& options,
                         LossMaps* maps) {
  weights.validate();
  if (neighbours.size() != poses.size()) {
    throw Error(ErrorCode::PoseCountMismatch, std::to_string(neighbours.size()) + " neighbouring frames but " +
                                                  std::to_string(poses.size()) + " poses");
  }
  const Dims dims = target.dims();
  require_same(dims, sparse.dims(), "sparse depth");
  require_same(dims, depth.dims(), "predicted depth");
  require_same(dims, mask.dims(), "validity mask");
  for (const auto& n : neighbours) require_same(dims, n.dims(), "neighbouring frame");

  LossBreakdown out;
  out.valid_pixel_count = mask.count_valid();
  if (maps != nullptr) *maps = LossMaps{};

  const auto target_px = target.pixels();
  for (std::size_t k = 0; k < neighbours.size(); ++k) {
    const ReprojectedCoords coords = reproject(depth, intrinsics, poses[k]);
    Reconstruction rec = reconstruct(neighbours[k], coords);

    std::vector<double> guarded(rec.image.pixels().begin(), rec.image.pixels().end());
    for (std::size_t i = 0; i < dims.area(); ++i) {
      if (mask.grid()[i] != 0 && rec.in_frame.grid()[i] != 0) continue;
      for (int ch = 0; ch < 3; ++ch) guarded[3 * i + ch] = target_px[3 * i + ch];
    }
    const Grid<double> rho = photometric_error(Image::create(dims, std::move(guarded)), target, weights.ssim_weight);

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < dims.area(); ++i) {
      if (mask.grid()[i] == 0 || rec.in_frame.grid()[i] == 0) continue;
      sum += rho[i];
      ++count;
    }
    out.photometric += count > 0 ? sum / static_cast<double>(count) : 0.0;
    if (maps != nullptr) {
      maps->reconstructions.push_back(std::move(rec));
      maps->photometric.push_back(rho);
    }
  }

  const Grid<double> psi = sparse_depth_error(depth, sparse, options.sparse_norm);
  double sparse_sum = 0.0;
  std::size_t sparse_count = 0;
  for (std::size_t i = 0; i < dims.area(); ++i) {
    if (mask.grid()[i] == 0 || !(sparse.grid()[i] > 0.0)) continue;
    sparse_sum += psi[i];
    ++sparse_count;
  }
  out.sparse = sparse_count > 0 ? sparse_sum / static_cast<double>(sparse_count) : 0.0;
  if (maps != nullptr) maps->sparse = psi;

  out.smoothness = smoothness_impl(depth, target, options.smoothness_includes_masked ? nullptr : &mask);
  out.total = weights.alpha * out.photometric + weights.beta * out.sparse + weights.lambda * out.smoothness;
  return out;
}

}  // namespace augundo::loss
