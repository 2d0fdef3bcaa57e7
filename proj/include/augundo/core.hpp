#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace augundo {

/// Failure categories surfaced by every module. The CLI prints the name of
/// the code so callers can parse failures without scraping messages.
enum class ErrorCode {
  OutOfRangeIntensity,
  DegenerateDims,
  NotRotation,
  NegativeDepth,
  DepthOutOfRange,
  BadMaskValue,
  BadIntrinsics,
  BadFactor,
  BadDelta,
  BadFraction,
  BadPatchSize,
  BadRate,
  BadParam,
  EmptyRecord,
  NonInvertibleParam,
  BadRange,
  DimsMismatch,
  TargetTooSmall,
  PoseCountMismatch,
  BadKind,
  ExcessiveMotion,
  TooManyPoints,
  EmptyEvalSet,
  ParseError,
  MissingKey,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Dims {
  int height = 0;
  int width = 0;

  [[nodiscard]] std::size_t area() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  [[nodiscard]] bool contains(int row, int col) const noexcept {
    return row >= 0 && col >= 0 && row < height && col < width;
  }
  auto operator<=>(const Dims&) const = default;
};

std::string to_string(const Dims& dims);

/// Row-major single-channel grid. Coordinates follow the pixel convention
/// x = (u, v) with u = column and v = row.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(Dims dims, T fill) : dims_(dims), data_(dims.area(), fill) {}
  Grid(Dims dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != dims_.area()) {
      throw Error(ErrorCode::DimsMismatch,
                  "grid buffer size does not match " + to_string(dims_));
    }
  }

  [[nodiscard]] Dims dims() const noexcept { return dims_; }
  [[nodiscard]] int height() const noexcept { return dims_.height; }
  [[nodiscard]] int width() const noexcept { return dims_.width; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

  [[nodiscard]] const T& at(int row, int col) const {
    return data_[static_cast<std::size_t>(row) * dims_.width + col];
  }
  T& at(int row, int col) {
    return data_[static_cast<std::size_t>(row) * dims_.width + col];
  }
  [[nodiscard]] const T& operator[](std::size_t i) const { return data_[i]; }
  T& operator[](std::size_t i) { return data_[i]; }

  [[nodiscard]] std::span<const T> values() const noexcept { return data_; }
  [[nodiscard]] std::vector<T>& storage() noexcept { return data_; }
  [[nodiscard]] const std::vector<T>& storage() const noexcept { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  Dims dims_{};
  std::vector<T> data_;
};

/// H x W x 3 intensity image, interleaved RGB, every value in [0, 1].
class Image {
 public:
  static constexpr int kChannels = 3;

  /// Validates dims (both >= 2) and range; throws Error otherwise.
  static Image create(Dims dims, std::vector<double> pixels);
  static Image filled(Dims dims, double value);

  [[nodiscard]] Dims dims() const noexcept { return dims_; }
  [[nodiscard]] int height() const noexcept { return dims_.height; }
  [[nodiscard]] int width() const noexcept { return dims_.width; }
  [[nodiscard]] double at(int row, int col, int channel) const {
    return pixels_[(static_cast<std::size_t>(row) * dims_.width + col) * kChannels + channel];
  }
  [[nodiscard]] std::span<const double> pixels() const noexcept { return pixels_; }

  /// Channel-mean intensity.
  [[nodiscard]] Grid<double> gray() const;

  bool operator==(const Image&) const = default;

 private:
  Image(Dims dims, std::vector<double> pixels) : dims_(dims), pixels_(std::move(pixels)) {}

  Dims dims_{};
  std::vector<double> pixels_;
};

Image validate_image(Dims dims, std::vector<double> pixels);

/// Depths in meters; 0 marks a missing measurement.
class SparseDepthMap {
 public:
  static SparseDepthMap create(Dims dims, std::vector<double> depths);
  static SparseDepthMap empty(Dims dims);

  [[nodiscard]] Dims dims() const noexcept { return depths_.dims(); }
  [[nodiscard]] int height() const noexcept { return depths_.height(); }
  [[nodiscard]] int width() const noexcept { return depths_.width(); }
  [[nodiscard]] double at(int row, int col) const { return depths_.at(row, col); }
  [[nodiscard]] bool has_point(int row, int col) const { return depths_.at(row, col) > 0.0; }
  [[nodiscard]] const Grid<double>& grid() const noexcept { return depths_; }

  /// |Omega_z|: number of strictly positive entries.
  [[nodiscard]] std::size_t point_count() const;

  bool operator==(const SparseDepthMap&) const = default;

 private:
  explicit SparseDepthMap(Grid<double> depths) : depths_(std::move(depths)) {}

  Grid<double> depths_;
};

/// Closed interval of admissible metric depths.
struct DepthRange {
  double min = 0.2;
  double max = 5.0;

  static DepthRange indoor() { return {0.2, 5.0}; }
  [[nodiscard]] bool contains(double d) const noexcept { return d >= min && d <= max; }
  [[nodiscard]] double clamp(double d) const noexcept;
  bool operator==(const DepthRange&) const = default;
};

class DenseDepthMap {
 public:
  /// Throws DepthOutOfRange when any entry falls outside `range`.
  static DenseDepthMap create(Dims dims, std::vector<double> depths,
                              DepthRange range = DepthRange::indoor());
  /// Clamps entries into `range` instead of rejecting them.
  static DenseDepthMap clamped(Dims dims, std::vector<double> depths,
                               DepthRange range = DepthRange::indoor());
  static DenseDepthMap filled(Dims dims, double depth, DepthRange range = DepthRange::indoor());

  [[nodiscard]] Dims dims() const noexcept { return depths_.dims(); }
  [[nodiscard]] int height() const noexcept { return depths_.height(); }
  [[nodiscard]] int width() const noexcept { return depths_.width(); }
  [[nodiscard]] double at(int row, int col) const { return depths_.at(row, col); }
  [[nodiscard]] const Grid<double>& grid() const noexcept { return depths_; }
  [[nodiscard]] DepthRange range() const noexcept { return range_; }

  bool operator==(const DenseDepthMap&) const = default;

 private:
  DenseDepthMap(Grid<double> depths, DepthRange range) : depths_(std::move(depths)), range_(range) {}

  Grid<double> depths_;
  DepthRange range_{};
};

class ValidityMask {
 public:
  static ValidityMask create(Dims dims, std::vector<std::uint8_t> values);
  static ValidityMask ones(Dims dims);
  static ValidityMask zeros(Dims dims);

  [[nodiscard]] Dims dims() const noexcept { return mask_.dims(); }
  [[nodiscard]] bool valid(int row, int col) const { return mask_.at(row, col) != 0; }
  [[nodiscard]] const Grid<std::uint8_t>& grid() const noexcept { return mask_; }
  [[nodiscard]] std::size_t count_valid() const;

  bool operator==(const ValidityMask&) const = default;

 private:
  explicit ValidityMask(Grid<std::uint8_t> mask) : mask_(std::move(mask)) {}

  Grid<std::uint8_t> mask_;
};

class CameraIntrinsics {
 public:
  static CameraIntrinsics create(double fx, double fy, double cx, double cy);

  [[nodiscard]] double fx() const noexcept { return fx_; }
  [[nodiscard]] double fy() const noexcept { return fy_; }
  [[nodiscard]] double cx() const noexcept { return cx_; }
  [[nodiscard]] double cy() const noexcept { return cy_; }
  [[nodiscard]] Eigen::Matrix3d matrix() const;

  bool operator==(const CameraIntrinsics&) const = default;

 private:
  CameraIntrinsics(double fx, double fy, double cx, double cy) : fx_(fx), fy_(fy), cx_(cx), cy_(cy) {}

  double fx_;
  double fy_;
  double cx_;
  double cy_;
};

/// Rigid motion mapping points from the reference camera into another camera.
class RigidPose {
 public:
  static constexpr double kTolerance = 1e-6;

  static RigidPose identity();

  [[nodiscard]] const Eigen::Matrix3d& rotation() const noexcept { return rotation_; }
  [[nodiscard]] const Eigen::Vector3d& translation() const noexcept { return translation_; }
  [[nodiscard]] bool is_identity() const;

  bool operator==(const RigidPose& other) const {
    return rotation_ == other.rotation_ && translation_ == other.translation_;
  }

 private:
  friend RigidPose validate_pose(const Eigen::Matrix3d&, const Eigen::Vector3d&);
  RigidPose(Eigen::Matrix3d r, Eigen::Vector3d t) : rotation_(std::move(r)), translation_(std::move(t)) {}

  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// Throws NotRotation unless `rotation` is orthonormal with det +1 (tol 1e-6).
RigidPose validate_pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

/// Rotation about a unit axis by `degrees`, for building test and scene poses.
Eigen::Matrix3d axis_angle_rotation(const Eigen::Vector3d& axis, double degrees);

}  // namespace augundo
