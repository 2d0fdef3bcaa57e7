#pragma once

#include "augundo/core.hpp"
#include "augundo/random.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace augundo::testing {

inline Image random_image(Dims dims, Rng& rng) {
  std::vector<double> px(dims.area() * 3);
  for (auto& v : px) v = rng.uniform01();
  return Image::create(dims, std::move(px));
}

inline DenseDepthMap random_depth(Dims dims, Rng& rng, double lo = 0.5, double hi = 4.5) {
  std::vector<double> d(dims.area());
  for (auto& v : d) v = rng.uniform(lo, hi);
  return DenseDepthMap::create(dims, std::move(d));
}

inline SparseDepthMap random_sparse(Dims dims, Rng& rng, double density) {
  std::vector<double> d(dims.area(), 0.0);
  for (auto& v : d) {
    if (rng.bernoulli(density)) v = rng.uniform(0.5, 4.5);
  }
  return SparseDepthMap::create(dims, std::move(d));
}

inline RigidPose translation(double x, double y = 0.0, double z = 0.0) {
  return validate_pose(Eigen::Matrix3d::Identity(), Eigen::Vector3d(x, y, z));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("augundo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace augundo::testing
