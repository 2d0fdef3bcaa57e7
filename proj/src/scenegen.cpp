#include "augundo/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace augundo::scenegen {

namespace {

constexpr double kSpacing[2] = {16.0, 9.0};
constexpr double kWeight[2] = {0.65, 0.35};

double quintic(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

struct PlaneHit {
  bool ok = false;
  double lambda = 0.0;
  double u = 0.0;
  double v = 0.0;
};

// Intersects the ray origin + lambda * dir (reference camera frame) with the
// plane Z = depth and projects the hit into the reference image.
PlaneHit hit_plane(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, double depth,
                   const CameraIntrinsics& k) {
  PlaneHit hit;
  if (std::abs(dir.z()) < 1e-12) return hit;
  hit.lambda = (depth - origin.z()) / dir.z();
  if (!(hit.lambda > 0.0)) return hit;
  const Eigen::Vector3d p = origin + hit.lambda * dir;
  hit.u = k.fx() * p.x() / p.z() + k.cx();
  hit.v = k.fy() * p.y() / p.z() + k.cy();
  hit.ok = true;
  return hit;
}

}  // namespace

double ValueNoiseTexture::lattice(long long i, long long j, int channel, int octave) const {
  const std::uint64_t stream = static_cast<std::uint64_t>(channel * 2 + octave);
  std::uint64_t h = mix_seed(seed_, stream);
  h = mix_seed(h, static_cast<std::uint64_t>(i));
  h = mix_seed(h, static_cast<std::uint64_t>(j));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double ValueNoiseTexture::sample(double u, double v, int channel) const {
  double value = 0.0;
  for (int octave = 0; octave < 2; ++octave) {
    const double x = u / kSpacing[octave] + 0.37 * (octave + 1);
    const double y = v / kSpacing[octave] + 0.61 * (octave + 1);
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const auto i = static_cast<long long>(fx);
    const auto j = static_cast<long long>(fy);
    const double tx = quintic(x - fx);
    const double ty = quintic(y - fy);
    const double a = lattice(i, j, channel, octave);
    const double b = lattice(i + 1, j, channel, octave);
    const double c = lattice(i, j + 1, channel, octave);
    const double d = lattice(i + 1, j + 1, channel, octave);
    const double top = a + (b - a) * tx;
    const double bottom = c + (d - c) * tx;
    value += kWeight[octave] * (top + (bottom - top) * ty);
  }
  return 0.1 + 0.8 * std::clamp(value, 0.0, 1.0);
}

SyntheticScene make_scene(const SceneKind& kind, Dims dims, const CameraIntrinsics& intrinsics,
                          std::uint64_t texture_seed) {
  if (dims.height < 2 || dims.width < 2) throw Error(ErrorCode::DegenerateDims, "scene dims must be at least 2x2");
  std::vector<double> depth(dims.area());
  double lo = 0.0;
  double hi = 0.0;
  if (const auto* plane = std::get_if<FrontoPlane>(&kind)) {
    if (!(plane->depth_m > 0.0)) throw Error(ErrorCode::BadKind, "plane depth must be positive");
    std::fill(depth.begin(), depth.end(), plane->depth_m);
    lo = hi = plane->depth_m;
  } else {
    const auto& step = std::get<TwoPlaneStep>(kind);
    if (!(step.near_m > 0.0) || !(step.far_m > step.near_m)) {
      throw Error(ErrorCode::BadKind, "step scene needs 0 < near < far");
    }
    if (step.split_column <= 0 || step.split_column >= dims.width) {
      throw Error(ErrorCode::BadKind, "split column must lie strictly inside the image");
    }
    for (int row = 0; row < dims.height; ++row) {
      for (int col = 0; col < dims.width; ++col) {
        depth[static_cast<std::size_t>(row) * dims.width + col] =
            col < step.split_column ? step.near_m : step.far_m;
      }
    }
    lo = step.near_m;
    hi = step.far_m;
  }

  const ValueNoiseTexture texture(texture_seed);
  std::vector<double> pixels(dims.area() * 3);
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      for (int ch = 0; ch < 3; ++ch) {
        pixels[(static_cast<std::size_t>(row) * dims.width + col) * 3 + ch] = texture.sample(col, row, ch);
      }
    }
  }
  const DepthRange range{std::min(DepthRange::indoor().min, lo), std::max(DepthRange::indoor().max, hi)};
  return {Image::create(dims, std::move(pixels)), DenseDepthMap::create(dims, std::move(depth), range), intrinsics,
          kind, texture};
}

double covisible_fraction(const SyntheticScene& scene, const RigidPose& pose) {
  const Dims dims = scene.image.dims();
  const auto& k = scene.intrinsics;
  std::size_t visible = 0;
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      const double d = scene.depth.at(row, col);
      const Eigen::Vector3d p(d * (col - k.cx()) / k.fx(), d * (row - k.cy()) / k.fy(), d);
      const Eigen::Vector3d q = pose.rotation() * p + pose.translation();
      if (q.z() <= 1e-6) continue;
      const double u = k.fx() * q.x() / q.z() + k.cx();
      const double v = k.fy() * q.y() / q.z() + k.cy();
      if (u >= 0.0 && u <= dims.width - 1 && v >= 0.0 && v <= dims.height - 1) ++visible;
    }
  }
  return static_cast<double>(visible) / static_cast<double>(dims.area());
}

Image render_view(const SyntheticScene& scene, const RigidPose& pose) {
  if (pose.is_identity()) return scene.image;
  if (covisible_fraction(scene, pose) < 0.5) {
    throw Error(ErrorCode::ExcessiveMotion, "fewer than half of the reference pixels stay in view");
  }
  const Dims dims = scene.image.dims();
  const auto& k = scene.intrinsics;
  // Camera center and ray directions of the displaced view, in the reference frame.
  const Eigen::Matrix3d rt = pose.rotation().transpose();
  const Eigen::Vector3d origin = -(rt * pose.translation());

  std::vector<double> pixels(dims.area() * 3);
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      const Eigen::Vector3d ray_view((col - k.cx()) / k.fx(), (row - k.cy()) / k.fy(), 1.0);
      const Eigen::Vector3d dir = rt * ray_view;
      PlaneHit hit;
      if (const auto* plane = std::get_if<FrontoPlane>(&scene.kind)) {
        hit = hit_plane(origin, dir, plane->depth_m, k);
      } else {
        const auto& step = std::get<TwoPlaneStep>(scene.kind);
        const PlaneHit near = hit_plane(origin, dir, step.near_m, k);
        hit = near.ok && near.u < step.split_column - 0.5 ? near : hit_plane(origin, dir, step.far_m, k);
      }
      const double u = hit.ok ? hit.u : col;
      const double v = hit.ok ? hit.v : row;
      for (int ch = 0; ch < 3; ++ch) {
        pixels[(static_cast<std::size_t>(row) * dims.width + col) * 3 + ch] = scene.texture.sample(u, v, ch);
      }
    }
  }
  return Image::create(dims, std::move(pixels));
}

SparseDepthMap sample_sparse(const DenseDepthMap& depth, std::size_t n_points, Rng& rng) {
  const Dims dims = depth.dims();
  if (n_points > dims.area()) {
    throw Error(ErrorCode::TooManyPoints, "requested " + std::to_string(n_points) + " points from " +
                                              std::to_string(dims.area()) + " pixels");
  }
  std::vector<std::size_t> order(dims.area());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> out(dims.area(), 0.0);
  for (std::size_t i = 0; i < n_points; ++i) {
    const std::size_t j = i + rng.index(order.size() - i);
    std::swap(order[i], order[j]);
    out[order[i]] = depth.grid()[order[i]];
  }
  return SparseDepthMap::create(dims, std::move(out));
}

SparseDepthMap sample_sparse_corners(const DenseDepthMap& depth, const Image& image, std::size_t n_points) {
  const Dims dims = depth.dims();
  if (image.dims() != dims) throw Error(ErrorCode::DimsMismatch, "image and depth dims differ");
  if (n_points > dims.area()) throw Error(ErrorCode::TooManyPoints, "more points requested than pixels");
  const Grid<double> gray = image.gray();
  Grid<double> gx(dims, 0.0);
  Grid<double> gy(dims, 0.0);
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      const int l = std::max(col - 1, 0), r = std::min(col + 1, dims.width - 1);
      const int t = std::max(row - 1, 0), b = std::min(row + 1, dims.height - 1);
      gx.at(row, col) = (gray.at(row, r) - gray.at(row, l)) / 2.0;
      gy.at(row, col) = (gray.at(b, col) - gray.at(t, col)) / 2.0;
    }
  }
  std::vector<double> response(dims.area());
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      double sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int r = std::clamp(row + dr, 0, dims.height - 1);
          const int c = std::clamp(col + dc, 0, dims.width - 1);
          sxx += gx.at(r, c) * gx.at(r, c);
          syy += gy.at(r, c) * gy.at(r, c);
          sxy += gx.at(r, c) * gy.at(r, c);
        }
      }
      const double trace = sxx + syy;
      response[static_cast<std::size_t>(row) * dims.width + col] = sxx * syy - sxy * sxy - 0.04 * trace * trace;
    }
  }
  std::vector<std::size_t> order(dims.area());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return response[a] > response[b]; });
  std::vector<double> out(dims.area(), 0.0);
  for (std::size_t i = 0; i < n_points; ++i) out[order[i]] = depth.grid()[order[i]];
  return SparseDepthMap::create(dims, std::move(out));
}

}  // namespace augundo::scenegen
